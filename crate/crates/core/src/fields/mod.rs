//! Grids, sampled fields, analytic initial data and the Fourier/quadrature
//! primitives the rest of the crate is built on.

mod analytic;
pub mod fft;
mod grid;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use analytic::{bump, AnalyticField};
pub use grid::{GridSpec, MIN_POINTS};

use crate::error::{Error, Result};

/// Relative mass allowed outside the grid box when sampling.
pub const COVERAGE_TOLERANCE: f64 = 1e-10;

pub const MAX_DERIVATIVE_ORDER: u32 = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldKind {
    Real,
    Complex,
}

/// Whether [`sample`] enforces the coverage precondition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coverage {
    Enforce,
    Override,
}

/// Samples of a function on a periodic grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledField {
    grid: GridSpec,
    values: Vec<Complex64>,
    kind: FieldKind,
}

impl SampledField {
    pub fn new(grid: GridSpec, mut values: Vec<Complex64>, kind: FieldKind) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::ShapeMismatch(format!("{} values for a grid of {} points", values.len(), grid.len())));
        }
        if kind == FieldKind::Real {
            for v in values.iter_mut() {
                v.im = 0.0;
            }
        }
        Ok(Self { grid, values, kind })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        let n = grid.len();
        Self { grid, values: vec![Complex64::new(0.0, 0.0); n], kind: FieldKind::Real }
    }

    pub fn from_fn<F>(grid: GridSpec, kind: FieldKind, mut f: F) -> Self
    where
        F: FnMut(&[f64]) -> Complex64,
    {
        let mut x = vec![0.0; grid.dim()];
        let values = (0..grid.len())
            .map(|flat| {
                grid.point_into(flat, &mut x);
                let v = f(&x);
                if kind == FieldKind::Real {
                    Complex64::new(v.re, 0.0)
                } else {
                    v
                }
            })
            .collect();
        Self { grid, values, kind }
    }

    pub fn from_real(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        Self::new(grid, values.into_iter().map(|v| Complex64::new(v, 0.0)).collect(), FieldKind::Real)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn kind(&self) -> FieldKind {
        self.kind
    }

    pub fn is_real(&self) -> bool {
        self.kind == FieldKind::Real
    }

    /// Same grid, new values; the kind is recomputed from `kind`.
    pub fn with_values(&self, values: Vec<Complex64>, kind: FieldKind) -> Result<Self> {
        Self::new(self.grid.clone(), values, kind)
    }

    pub fn map<F: Fn(Complex64) -> Complex64>(&self, kind: FieldKind, f: F) -> Self {
        let values = self.values.iter().map(|v| f(*v)).collect();
        Self::new(self.grid.clone(), values, kind).expect("shape preserved")
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let kind = if s.im == 0.0 { self.kind } else { FieldKind::Complex };
        self.map(kind, |v| v * s)
    }

    fn check_same_grid(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::ShapeMismatch("fields live on different grids".into()));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        Self::new(self.grid.clone(), values, join_kind(self.kind, other.kind))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        Self::new(self.grid.clone(), values, join_kind(self.kind, other.kind))
    }

    /// Periodic trapezoid rule: sum of values times the cell volume.
    pub fn integrate(&self) -> Complex64 {
        self.values.iter().sum::<Complex64>() * self.grid.cell_volume()
    }

    pub fn l2_norm(&self) -> f64 {
        (self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.cell_volume()).sqrt()
    }

    /// The L2 norm evaluated on the Fourier side via Parseval.
    pub fn l2_norm_spectral(&self) -> f64 {
        let mut buf = self.values.clone();
        fft::forward(&mut buf, &self.grid);
        let n = self.grid.len() as f64;
        (buf.iter().map(|v| v.norm_sqr()).sum::<f64>() / n * self.grid.cell_volume()).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Spectral derivative along axis 0.
    pub fn spectral_derivative(&self, order: u32) -> Result<Self> {
        self.spectral_derivative_axis(0, order)
    }

    /// Multiplies the Fourier coefficients by `(i k)^order` along `axis`.
    ///
    /// For odd orders the Nyquist mode, which has no consistent sign, is zeroed.
    pub fn spectral_derivative_axis(&self, axis: usize, order: u32) -> Result<Self> {
        if order > MAX_DERIVATIVE_ORDER {
            return Err(Error::DerivativeOrder(order));
        }
        if axis >= self.grid.dim() {
            return Err(Error::ShapeMismatch(format!("axis {axis} on a {}-d grid", self.grid.dim())));
        }
        if order == 0 {
            return Ok(self.clone());
        }
        let n = self.grid.points()[axis];
        let k_nyq = self.grid.nyquist_index(axis).map(|j| self.grid.wavenumbers(axis)[j]);
        let i_pow = Complex64::i().powu(order);
        let values = fft::apply_multiplier(&self.values, &self.grid, |xi| {
            let k = xi[axis];
            if order % 2 == 1 && k_nyq == Some(k) && n.is_multiple_of(2) {
                Complex64::new(0.0, 0.0)
            } else {
                i_pow * k.powi(order as i32)
            }
        });
        Self::new(self.grid.clone(), values, self.kind)
    }

    /// Pointwise product with the coordinate on `axis`.
    pub fn times_coordinate(&self, axis: usize) -> Self {
        let mut x = vec![0.0; self.grid.dim()];
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(flat, v)| {
                self.grid.point_into(flat, &mut x);
                v * x[axis]
            })
            .collect();
        Self::new(self.grid.clone(), values, self.kind).expect("shape preserved")
    }

    /// Periodic shift by whole cells: `out[i] = self[i + shift]` per axis.
    pub fn roll(&self, shift: &[i64]) -> Self {
        let g = &self.grid;
        let mut out = vec![Complex64::new(0.0, 0.0); g.len()];
        for (flat, slot) in out.iter_mut().enumerate() {
            let idx = g.multi_index(flat);
            let mut src = 0usize;
            for axis in 0..g.dim() {
                let n = g.points()[axis] as i64;
                let j = (idx[axis] as i64 + shift[axis]).rem_euclid(n) as usize;
                src = src * n as usize + j;
            }
            *slot = self.values[src];
        }
        Self::new(g.clone(), out, self.kind).expect("shape preserved")
    }
}

fn join_kind(a: FieldKind, b: FieldKind) -> FieldKind {
    if a == FieldKind::Real && b == FieldKind::Real {
        FieldKind::Real
    } else {
        FieldKind::Complex
    }
}

/// Evaluates `datum` at every node of `grid`.
pub fn sample(datum: &AnalyticField, grid: &GridSpec, coverage: Coverage) -> Result<SampledField> {
    if datum.dim() != grid.dim() {
        return Err(Error::ShapeMismatch(format!("datum of dimension {} on a {}-d grid", datum.dim(), grid.dim())));
    }
    let kind = if datum.is_real() { FieldKind::Real } else { FieldKind::Complex };
    let field = SampledField::from_fn(grid.clone(), kind, |x| datum.value(x));
    if coverage == Coverage::Enforce {
        let outside = match datum.outside_fraction(grid) {
            Some(f) => f,
            None => boundary_fraction(&field),
        };
        if outside > COVERAGE_TOLERANCE {
            return Err(Error::SupportOverflow { outside, context: "sampling".into() });
        }
    }
    Ok(field)
}

/// Largest boundary-node magnitude relative to the field maximum.
fn boundary_fraction(field: &SampledField) -> f64 {
    let g = field.grid();
    let peak = field.max_abs();
    if peak == 0.0 {
        return 0.0;
    }
    let mut edge: f64 = 0.0;
    for (flat, v) in field.values().iter().enumerate() {
        let idx = g.multi_index(flat);
        if idx.iter().zip(g.points()).any(|(i, n)| *i == 0 || *i == n - 1) {
            edge = edge.max(v.norm());
        }
    }
    edge / peak
}
