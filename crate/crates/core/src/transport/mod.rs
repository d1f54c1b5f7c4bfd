//! Phase-space transport `d_t nu + w(p) . grad_q nu = 0`.
//!
//! The solution is `nu(t, q, p) = nu0(q - t w(p), p)`, evaluated directly on
//! the analytic datum; nothing is time-stepped or interpolated.

mod counterexample;
mod map;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use counterexample::{
    bump_w11_norms, counterexample_lower_bound, counterexample_profile, BumpW11, CounterexampleRecord,
};
pub use map::{AxisMap, DispersionMap};

use crate::error::{Error, Result};
use crate::fields::{AnalyticField, GridSpec, COVERAGE_TOLERANCE};
use crate::harness::fit::{fit_decay, DecayFit};
use crate::harness::report::InequalitySample;

/// A closed interval `(lo, hi)`.
type Interval = (f64, f64);

/// Datum amplitude below which characteristic quadrature windows are cut.
pub const WINDOW_AMPLITUDE: f64 = 1e-16;
/// Datum amplitude defining the boxes that automatically built grids cover.
pub const COVER_AMPLITUDE: f64 = 1e-12;

/// How the velocity integral `int nu(t, q, p) dp` is discretised.
#[derive(Debug, Clone, PartialEq)]
pub enum VelocityQuadrature {
    /// Rectangle rule on the nodes of a grid over `p`, which must contain the
    /// velocity support of the datum.
    Grid(GridSpec),
    /// Trapezoid rule with `nodes` points on each interval of `p` whose
    /// characteristic lands in the support of the datum. Needs a map acting
    /// axis by axis; resolves the `1/t` velocity scales at large times.
    Characteristic { nodes: usize },
}

impl VelocityQuadrature {
    pub const DEFAULT_NODES: usize = 2049;

    pub fn characteristic() -> Self {
        VelocityQuadrature::Characteristic { nodes: Self::DEFAULT_NODES }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupOptions {
    /// Cap on q-search nodes per axis.
    pub max_points: usize,
    /// Trapezoid nodes per characteristic window.
    pub nodes: usize,
}

impl Default for SupOptions {
    fn default() -> Self {
        Self { max_points: 4096, nodes: VelocityQuadrature::DEFAULT_NODES }
    }
}

/// `sup_q nu_bar(t, q)` together with the q-resolution it was found at.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupEstimate {
    pub t: f64,
    pub value: f64,
    pub q_spacing: Vec<f64>,
    /// Whether the sup was taken as a product over `(q_j, p_j)` planes.
    pub factored: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransportDecay {
    pub samples: Vec<SupEstimate>,
    pub fit: DecayFit,
}

/// A phase-space datum on `R^d x R^d` carried by a velocity map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransportSolution {
    datum: AnalyticField,
    map: DispersionMap,
}

impl TransportSolution {
    pub fn new(datum: AnalyticField, map: DispersionMap) -> Result<Self> {
        map.validate()?;
        if datum.dim() != 2 * map.dim() {
            return Err(Error::ShapeMismatch(format!(
                "a {}-d velocity map needs a datum on {} phase-space coordinates, got {}",
                map.dim(),
                2 * map.dim(),
                datum.dim()
            )));
        }
        if !datum.is_real() {
            return Err(Error::Unsupported("transport data must be real densities".into()));
        }
        Ok(Self { datum, map })
    }

    pub fn datum(&self) -> &AnalyticField {
        &self.datum
    }

    pub fn map(&self) -> DispersionMap {
        self.map
    }

    pub fn d(&self) -> usize {
        self.map.dim()
    }

    /// Writes `(q - t w(p), p)` into `x`.
    fn foot(&self, t: f64, q: &[f64], p: &[f64], x: &mut [f64]) {
        let d = self.d();
        let mut w = [0.0; 2];
        self.map.w_into(p, &mut w[..d]);
        for j in 0..d {
            x[j] = q[j] - t * w[j];
            x[d + j] = p[j];
        }
    }

    /// `nu(t, q, p)`.
    pub fn evaluate_density(&self, t: f64, q: &[f64], p: &[f64]) -> f64 {
        let mut x = [0.0; 4];
        let n = 2 * self.d();
        self.foot(t, q, p, &mut x[..n]);
        self.datum.real_value(&x[..n])
    }

    /// Position and momentum boxes of the datum support.
    fn support(&self, tol: f64) -> Option<(Vec<Interval>, Vec<Interval>)> {
        let b = self.datum.support_box(tol)?;
        let d = self.d();
        Some((b[..d].to_vec(), b[d..].to_vec()))
    }

    /// Box containing the q-support of `nu(t)` at datum amplitude `tol`;
    /// `None` for the zero datum.
    pub fn q_region(&self, t: f64, tol: f64) -> Option<Vec<(f64, f64)>> {
        let (qb, pb) = self.support(tol)?;
        let img = self.map.image_box(&pb);
        Some(
            qb.iter()
                .zip(&img)
                .map(|(&(a, b), &(lo, hi))| if t >= 0.0 { (a + t * lo, b + t * hi) } else { (a + t * hi, b + t * lo) })
                .collect(),
        )
    }

    /// `nu_bar(t, q) = int nu(t, q, p) dp`.
    pub fn velocity_average(&self, t: f64, q: &[f64], quad: &VelocityQuadrature) -> Result<f64> {
        if self.datum.is_zero() {
            return Ok(0.0);
        }
        match quad {
            VelocityQuadrature::Grid(pgrid) => {
                self.check_velocity_grid(pgrid)?;
                Ok(self.grid_average(t, q, pgrid))
            }
            VelocityQuadrature::Characteristic { nodes } => {
                let maps = self.axis_maps()?;
                Ok(self.characteristic_average(t, q, *nodes, &maps))
            }
        }
    }

    fn axis_maps(&self) -> Result<Vec<AxisMap>> {
        self.map.axis_maps().ok_or_else(|| {
            Error::Unsupported(format!(
                "characteristic quadrature needs an axis-by-axis map, {} in d = {} is not",
                self.map.name(),
                self.d()
            ))
        })
    }

    fn check_velocity_grid(&self, pgrid: &GridSpec) -> Result<()> {
        let d = self.d();
        if pgrid.dim() != d {
            return Err(Error::ShapeMismatch(format!("{}-d velocity grid for d = {d}", pgrid.dim())));
        }
        let axes: Vec<usize> = (d..2 * d).collect();
        let bounds: Vec<(f64, f64)> = (0..d).map(|a| pgrid.bounds(a)).collect();
        let outside = self.datum.outside_fraction_box(&axes, &bounds).unwrap_or(1.0);
        if outside > COVERAGE_TOLERANCE {
            return Err(Error::SupportOverflow { outside, context: "velocity grid".into() });
        }
        Ok(())
    }

    fn grid_average(&self, t: f64, q: &[f64], pgrid: &GridSpec) -> f64 {
        let mut p = [0.0; 2];
        let d = self.d();
        let mut acc = 0.0;
        for flat in 0..pgrid.len() {
            pgrid.point_into(flat, &mut p[..d]);
            acc += self.evaluate_density(t, q, &p[..d]);
        }
        acc * pgrid.cell_volume()
    }

    /// Per-axis trapezoid nodes `(p, weight)` covering the velocities whose
    /// characteristic through `(t, q)` starts in the datum's support box.
    fn characteristic_nodes(&self, t: f64, q: &[f64], nodes: usize, maps: &[AxisMap]) -> Vec<Vec<(f64, f64)>> {
        let Some((qb, pb)) = self.support(WINDOW_AMPLITUDE) else {
            return vec![Vec::new(); self.d()];
        };
        let nodes = nodes.max(3);
        (0..self.d())
            .map(|j| {
                let (a, b) = qb[j];
                let (plo, phi) = pb[j];
                let intervals = if t == 0.0 {
                    if q[j] >= a && q[j] <= b {
                        vec![(plo, phi)]
                    } else {
                        Vec::new()
                    }
                } else {
                    let (u, v) = ((q[j] - b) / t, (q[j] - a) / t);
                    maps[j].preimage(u.min(v), u.max(v))
                };
                let mut out = Vec::new();
                for (lo, hi) in intervals {
                    let (lo, hi) = (lo.max(plo), hi.min(phi));
                    if !(hi > lo) {
                        continue;
                    }
                    let h = (hi - lo) / (nodes - 1) as f64;
                    for k in 0..nodes {
                        let w = if k == 0 || k == nodes - 1 { 0.5 * h } else { h };
                        out.push((lo + k as f64 * h, w));
                    }
                }
                out
            })
            .collect()
    }

    fn characteristic_average(&self, t: f64, q: &[f64], nodes: usize, maps: &[AxisMap]) -> f64 {
        let axes = self.characteristic_nodes(t, q, nodes, maps);
        match self.d() {
            1 => axes[0].iter().map(|&(p, w)| w * self.evaluate_density(t, q, &[p])).sum(),
            _ => {
                let mut acc = 0.0;
                for &(p1, w1) in &axes[0] {
                    let mut row = 0.0;
                    for &(p2, w2) in &axes[1] {
                        row += w2 * self.evaluate_density(t, q, &[p1, p2]);
                    }
                    acc += w1 * row;
                }
                acc
            }
        }
    }

    /// Largest `nu_bar(t, q)` over the nodes of `qgrid`.
    pub fn sup_velocity_average(&self, t: f64, qgrid: &GridSpec, quad: &VelocityQuadrature) -> Result<f64> {
        let d = self.d();
        if qgrid.dim() != d {
            return Err(Error::ShapeMismatch(format!("{}-d q-grid for d = {d}", qgrid.dim())));
        }
        let Some(region) = self.q_region(t, COVERAGE_TOLERANCE) else {
            return Ok(0.0);
        };
        let grid_box: Vec<(f64, f64)> = (0..d).map(|a| qgrid.bounds(a)).collect();
        let outside = uncovered_fraction(&region, &grid_box);
        if outside > 0.0 {
            return Err(Error::SupportOverflow {
                outside,
                context: format!("q-grid misses part of the velocity-average support at t = {t}"),
            });
        }
        if let VelocityQuadrature::Grid(pgrid) = quad {
            self.check_velocity_grid(pgrid)?;
        }
        let maps = match quad {
            VelocityQuadrature::Characteristic { .. } => Some(self.axis_maps()?),
            VelocityQuadrature::Grid(_) => None,
        };
        let sup = (0..qgrid.len())
            .into_par_iter()
            .map(|flat| {
                let mut q = [0.0; 2];
                qgrid.point_into(flat, &mut q[..d]);
                match quad {
                    VelocityQuadrature::Grid(pgrid) => self.grid_average(t, &q[..d], pgrid),
                    VelocityQuadrature::Characteristic { nodes } => {
                        self.characteristic_average(t, &q[..d], *nodes, maps.as_deref().expect("maps"))
                    }
                }
            })
            .reduce(|| 0.0, f64::max);
        Ok(sup)
    }

    /// Symmetric q-grid (so that `q = 0` is a node) containing the support of
    /// `nu_bar(t)`, with at most `max_points` nodes per axis.
    pub fn q_search_grid(&self, t: f64, max_points: usize) -> Result<GridSpec> {
        let d = self.d();
        let region = self.q_region(t, COVER_AMPLITUDE).unwrap_or_else(|| vec![(-1.0, 1.0); d]);
        let scales = self.datum.length_scales();
        let mut half = Vec::with_capacity(d);
        let mut points = Vec::with_capacity(d);
        for j in 0..d {
            let r = region[j].0.abs().max(region[j].1.abs()) * (1.0 + 1e-9) + 1e-300;
            let want = (2.0 * r / (scales[j] / 8.0)).ceil() as usize;
            half.push(r);
            points.push(want.next_power_of_two().clamp(64, max_points.max(64)));
        }
        GridSpec::symmetric_nd(&half, &points)
    }

    /// `sup_q nu_bar(t, q)` with automatically chosen grids.
    ///
    /// Product data under an axis-by-axis map in `d = 2` factor into `(q_j, p_j)`
    /// planes; the sup is then the product of the planar sups.
    pub fn sup_velocity_average_auto(&self, t: f64, opts: &SupOptions) -> Result<SupEstimate> {
        if self.datum.is_zero() {
            return Ok(SupEstimate { t, value: 0.0, q_spacing: vec![0.0; self.d()], factored: false });
        }
        if self.d() == 2 {
            if let Some(planes) = self.planes() {
                let mut value = 1.0;
                let mut q_spacing = Vec::new();
                for plane in planes {
                    let e = plane.sup_velocity_average_auto(t, opts)?;
                    value *= e.value;
                    q_spacing.extend(e.q_spacing);
                }
                return Ok(SupEstimate { t, value, q_spacing, factored: true });
            }
        }
        let (quad, max_points) = if self.map.axis_maps().is_some() {
            (VelocityQuadrature::Characteristic { nodes: opts.nodes }, opts.max_points)
        } else {
            (VelocityQuadrature::Grid(self.velocity_grid(16.0, 128)?), opts.max_points.min(128))
        };
        let qgrid = self.q_search_grid(t, max_points)?;
        let value = self.sup_velocity_average(t, &qgrid, &quad)?;
        let q_spacing = (0..self.d()).map(|a| qgrid.spacing(a)).collect();
        Ok(SupEstimate { t, value, q_spacing, factored: false })
    }

    /// The one-dimensional problems of a product datum under an axis-by-axis map.
    pub fn planes(&self) -> Option<Vec<TransportSolution>> {
        let maps = self.map.axis_maps()?;
        let factors = self.datum.phase_factors(self.d())?;
        if self.d() == 1 {
            return None;
        }
        Some(
            factors
                .into_iter()
                .zip(maps)
                .map(|(f, m)| {
                    let map = match m {
                        AxisMap::Linear => DispersionMap::Identity { d: 1 },
                        AxisMap::Relativistic => DispersionMap::Relativistic { d: 1 },
                        AxisMap::Square => DispersionMap::SquareD1,
                    };
                    TransportSolution { datum: f, map }
                })
                .collect(),
        )
    }

    /// Grid over the velocity box of the datum with `cells_per_scale` cells per
    /// datum length scale, at most `max_points` per axis.
    pub fn velocity_grid(&self, cells_per_scale: f64, max_points: usize) -> Result<GridSpec> {
        let d = self.d();
        let (_, pb) = self
            .support(COVER_AMPLITUDE)
            .ok_or_else(|| Error::Unsupported("the zero datum has no velocity support".into()))?;
        let scales = self.datum.length_scales();
        let points: Vec<usize> = (0..d)
            .map(|j| even_points((pb[j].1 - pb[j].0) / (scales[d + j] / cells_per_scale)).min(max_points))
            .collect();
        GridSpec::from_box(&pb, &points)
    }

    /// Phase-space grid containing the support of `nu(t)` with
    /// `cells_per_scale` cells per datum length scale.
    pub fn covering_phase_grid(&self, t: f64, cells_per_scale: f64, max_points: usize) -> Result<GridSpec> {
        let d = self.d();
        let region = self
            .q_region(t, COVER_AMPLITUDE)
            .ok_or_else(|| Error::Unsupported("the zero datum has no support".into()))?;
        let (_, pb) = self.support(COVER_AMPLITUDE).expect("non-zero datum");
        let scales = self.datum.length_scales();
        let mut bounds = region;
        bounds.extend(pb);
        let mut points = Vec::with_capacity(2 * d);
        for (axis, (lo, hi)) in bounds.iter_mut().enumerate() {
            let h = scales[axis] / cells_per_scale;
            *lo -= h;
            *hi += h;
            let n = even_points((*hi - *lo) / h);
            if n > max_points {
                return Err(Error::Unsupported(format!(
                    "phase grid at t = {t} would need {n} points on axis {axis} (cap {max_points})"
                )));
            }
            points.push(n);
        }
        GridSpec::from_box(&bounds, &points)
    }

    /// `int int F(p, nu(t, q, p)) dq dp` by the rectangle rule on `grid`.
    ///
    /// `F(p, 0) = 0` is assumed: nodes where the density is negligible are
    /// not visited.
    pub fn conserved_functional<F>(&self, f: F, t: f64, grid: &GridSpec) -> Result<f64>
    where
        F: Fn(&[f64], f64) -> f64 + Sync,
    {
        let d = self.d();
        if grid.dim() != 2 * d {
            return Err(Error::ShapeMismatch(format!("{}-d phase grid for d = {d}", grid.dim())));
        }
        if let Some(region) = self.q_region(t, COVERAGE_TOLERANCE) {
            let (_, pb) = self.support(COVERAGE_TOLERANCE).expect("non-zero datum");
            let mut need = region;
            need.extend(pb);
            let have: Vec<(f64, f64)> = (0..2 * d).map(|a| grid.bounds(a)).collect();
            let outside = uncovered_fraction(&need, &have);
            if outside > 0.0 {
                return Err(Error::SupportOverflow {
                    outside,
                    context: format!("phase grid misses part of the support of the density at t = {t}"),
                });
            }
        }
        Ok(self.phase_integral(t, grid, |q, p| f(p, self.evaluate_density(t, q, p))))
    }

    /// Rectangle rule of `g(q, p)` over the nodes of `grid` at which `nu(t)`
    /// can be non-zero, reduced in a fixed order.
    ///
    /// For every velocity node only the q-nodes whose characteristic starts in
    /// the datum's support box (amplitude [`WINDOW_AMPLITUDE`]) are visited, so
    /// `g` must vanish where the density does.
    fn phase_integral<G>(&self, t: f64, grid: &GridSpec, g: G) -> f64
    where
        G: Fn(&[f64], &[f64]) -> f64 + Sync,
    {
        let d = self.d();
        let Some((qb, _)) = self.support(WINDOW_AMPLITUDE) else {
            return 0.0;
        };
        let outer = grid.points()[d];
        let inner = if d == 2 { grid.points()[d + 1] } else { 1 };
        let partial: Vec<f64> = (0..outer)
            .into_par_iter()
            .map(|i0| {
                let mut p = [0.0; 2];
                let mut w = [0.0; 2];
                let mut q = [0.0; 2];
                let mut ranges = [(0usize, 0usize); 2];
                let mut acc = 0.0;
                for i1 in 0..inner {
                    p[0] = grid.coord(d, i0);
                    if d == 2 {
                        p[1] = grid.coord(d + 1, i1);
                    }
                    self.map.w_into(&p[..d], &mut w[..d]);
                    let mut empty = false;
                    for j in 0..d {
                        match index_range(grid, j, qb[j].0 + t * w[j], qb[j].1 + t * w[j]) {
                            Some(r) => ranges[j] = r,
                            None => empty = true,
                        }
                    }
                    if empty {
                        continue;
                    }
                    for k0 in ranges[0].0..=ranges[0].1 {
                        q[0] = grid.coord(0, k0);
                        if d == 1 {
                            acc += g(&q[..1], &p[..1]);
                            continue;
                        }
                        for k1 in ranges[1].0..=ranges[1].1 {
                            q[1] = grid.coord(1, k1);
                            acc += g(&q[..2], &p[..2]);
                        }
                    }
                }
                acc
            })
            .collect();
        partial.iter().sum::<f64>() * grid.cell_volume()
    }

    /// `(W_i nu)(t, q, p)` with `W_i = d_{p_i} + t sum_j (d_{p_i} w^j) d_{q_j}`,
    /// both parts obtained from the datum's gradient by the chain rule.
    pub fn apply_transport_boost(&self, t: f64, axis: usize, q: &[f64], p: &[f64]) -> f64 {
        let d = self.d();
        let mut x = [0.0; 4];
        self.foot(t, q, p, &mut x[..2 * d]);
        let grad = self.datum.gradient(&x[..2 * d]);
        let jac = self.map.jacobian(p);
        // d_{q_j} nu = (d_{q_j} nu0) o foot
        // d_{p_i} nu = (d_{p_i} nu0) o foot - t sum_j J[j][i] (d_{q_j} nu0) o foot
        let dq: Vec<f64> = (0..d).map(|j| grad[j].re).collect();
        let transport: f64 = (0..d).map(|j| jac[j][axis] * dq[j]).sum();
        let dp = grad[d + axis].re - t * transport;
        dp + t * transport
    }

    /// `(W_{i_1} .. W_{i_k} nu)(t, q, p)`, which equals the corresponding
    /// velocity derivative of the datum carried along the characteristic.
    /// `None` when the datum has no oracle for that mixed derivative.
    pub fn boosted_density(&self, t: f64, q: &[f64], p: &[f64], axes: &[usize]) -> Option<f64> {
        let d = self.d();
        let mut x = [0.0; 4];
        self.foot(t, q, p, &mut x[..2 * d]);
        let shifted: Vec<usize> = axes.iter().map(|a| d + a).collect();
        self.datum.partial(&x[..2 * d], &shifted).map(|v| v.re)
    }

    /// Both sides of `|t|^d sup_q nu_bar(t) <= int int |W_1 .. W_d nu(t)|` for
    /// free streaming.
    pub fn ks_vlasov_check(&self, t: f64, opts: &KsOptions) -> Result<InequalitySample> {
        if !matches!(self.map, DispersionMap::Identity { .. }) {
            return Err(Error::Unsupported(format!(
                "the boost inequality is checked for free streaming only, not {}",
                self.map.name()
            )));
        }
        if self.datum.is_zero() {
            return Ok(InequalitySample::new(t, 0.0, 0.0));
        }
        let d = self.d();
        let sup = self.sup_velocity_average_auto(t, &opts.sup)?;
        let lhs = t.abs().powi(d as i32) * sup.value;
        let rhs = match self.planes() {
            Some(planes) => {
                let mut r = 1.0;
                for plane in &planes {
                    r *= plane.boosted_l1(t, opts)?;
                }
                r
            }
            None => self.boosted_l1(t, opts)?,
        };
        Ok(InequalitySample::new(t, lhs, rhs))
    }

    /// `int int |W_1 .. W_d nu(t)|` on a covering phase grid at time `t`.
    fn boosted_l1(&self, t: f64, opts: &KsOptions) -> Result<f64> {
        let d = self.d();
        let axes: Vec<usize> = (0..d).collect();
        let mut probe = vec![0.0; 2 * d];
        if let Some(b) = self.datum.support_box(1e-3) {
            for (x, (lo, hi)) in probe.iter_mut().zip(b) {
                *x = 0.5 * (lo + hi);
            }
        }
        if self.datum.partial(&probe, &axes.iter().map(|a| d + a).collect::<Vec<_>>()).is_none() {
            return Err(Error::Unsupported("the datum has no mixed velocity-derivative oracle".into()));
        }
        let grid = self.covering_phase_grid(t, opts.cells_per_scale, opts.max_points)?;
        Ok(self.phase_integral(t, &grid, |q, p| self.boosted_density(t, q, p, &axes).expect("oracle checked").abs()))
    }

    /// Samples `sup_q nu_bar(t)` at `times` and fits its decay over `window`.
    pub fn decay_experiment(&self, times: &[f64], window: (f64, f64), opts: &SupOptions) -> Result<TransportDecay> {
        if times.iter().any(|t| !(*t > 0.0)) {
            return Err(Error::InvalidParameter("decay times must be positive".into()));
        }
        let samples = times.par_iter().map(|t| self.sup_velocity_average_auto(*t, opts)).collect::<Result<Vec<_>>>()?;
        let series: Vec<(f64, f64)> = samples.iter().map(|s| (s.t, s.value)).collect();
        let fit = fit_decay(&series, window)?;
        Ok(TransportDecay { samples, fit })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsOptions {
    pub sup: SupOptions,
    pub cells_per_scale: f64,
    pub max_points: usize,
}

impl Default for KsOptions {
    fn default() -> Self {
        Self { sup: SupOptions::default(), cells_per_scale: 24.0, max_points: 1 << 16 }
    }
}

/// The transport data the experiments run on, by name.
pub fn builtin_solutions() -> Vec<(&'static str, TransportSolution)> {
    let unit = AnalyticField::gaussian(&[0.0, 0.0], std::f64::consts::FRAC_1_SQRT_2);
    let product = AnalyticField::ProductGaussianPhase { d: 2, q_width: 1.0, p_width: 1.0 };
    let cases = [
        ("gaussian-identity-d1", unit.clone(), DispersionMap::Identity { d: 1 }),
        ("gaussian-relativistic-d1", unit, DispersionMap::Relativistic { d: 1 }),
        ("shifted-gaussian-square-d1", AnalyticField::gaussian(&[0.5, -0.3], 0.6), DispersionMap::SquareD1),
        ("bump-square-d1", AnalyticField::BumpLambda { lambda: 4.0 }, DispersionMap::SquareD1),
        ("product-gaussian-identity-d2", product.clone(), DispersionMap::Identity { d: 2 }),
        ("product-gaussian-relativistic-d2", product.clone(), DispersionMap::Relativistic { d: 2 }),
        ("product-gaussian-mixed-d2", product, DispersionMap::MixedD2),
    ];
    cases
        .into_iter()
        .map(|(name, datum, map)| (name, TransportSolution::new(datum, map).expect("built-in case is consistent")))
        .collect()
}

/// Fits the decay of `sup_q nu_bar` for `sol` over `times`.
pub fn transport_decay_experiment(sol: &TransportSolution, times: &[f64], opts: &SupOptions) -> Result<TransportDecay> {
    let window = (times.iter().copied().fold(f64::INFINITY, f64::min), times.iter().copied().fold(0.0, f64::max));
    sol.decay_experiment(times, window, opts)
}

/// Indices of the nodes of `grid` on `axis` inside `[lo, hi]`.
fn index_range(grid: &GridSpec, axis: usize, lo: f64, hi: f64) -> Option<(usize, usize)> {
    let h = grid.spacing(axis);
    let o = grid.origin()[axis];
    let n = grid.points()[axis] as f64;
    let a = ((lo - o) / h).ceil().max(0.0);
    let b = ((hi - o) / h).floor().min(n - 1.0);
    (a <= b).then_some((a as usize, b as usize))
}

fn even_points(cells: f64) -> usize {
    let n = cells.ceil().max(8.0) as usize;
    n + n % 2
}

/// `1 - |need ∩ have| / |need|` for axis-aligned boxes.
fn uncovered_fraction(need: &[(f64, f64)], have: &[(f64, f64)]) -> f64 {
    let mut inside = 1.0;
    for (&(a, b), &(lo, hi)) in need.iter().zip(have) {
        if b <= a {
            if a < lo || a > hi {
                return 1.0;
            }
            continue;
        }
        inside *= ((b.min(hi) - a.max(lo)).max(0.0)) / (b - a);
    }
    1.0 - inside
}
