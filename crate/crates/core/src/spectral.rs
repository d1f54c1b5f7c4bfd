//! Exact-in-time Fourier-multiplier propagators.
//!
//! Every equation is written as `i d_t u + P(i d) u = 0` for a real polynomial
//! `P`, with `P(i d)` acting axis by axis. A plane wave `e^{i xi x}` is an
//! eigenfunction of `i d` with eigenvalue `-xi`, so
//!
//! ```text
//! u_hat(t, xi) = exp(t sigma(xi)) u_hat(0, xi),   sigma(xi) = i sum_j P(-xi_j).
//! ```
//!
//! The three normalizations:
//!
//! * `d_t u + i Lap u = 0`: `P(z) = z^2`, `sigma = i |xi|^2`.
//! * `d_t u - d^3 u = 0`: `P(z) = z^3`, `sigma = -i xi^3`. `P` is odd, so
//!   `sigma(-xi)` is the conjugate of `sigma(xi)` and real data stay real.
//! * `i d_t u + d^{2k} u = 0`: `P(z) = (-1)^k z^{2k}`, `sigma = i (-1)^k xi^{2k}`.
//!
//! The group velocity is `grad_xi` of `-i sigma` up to sign; its length is
//! `|P'(-xi_j)|` per axis.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{fft, FieldKind, GridSpec, SampledField};

/// Width of the boundary layer watched for wrap-around, as a fraction of the box.
pub const GUARD_WIDTH: f64 = 0.05;
/// Largest L2 mass fraction tolerated in the boundary layer.
pub const GUARD_THRESHOLD: f64 = 1e-6;
/// Spectral mass fraction left outside the effective band.
pub const BAND_TAIL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "equation", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Normalization {
    /// `d_t u + i Lap u = 0` in one or two dimensions.
    Schrodinger,
    /// `d_t u - d^3 u = 0`.
    Airy,
    /// `i d_t u + d^{2k} u = 0`.
    EvenOrder { k: u32 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispersionPolynomial {
    normalization: Normalization,
    dim: usize,
    /// Coefficients of `P`, lowest degree first.
    p_coeffs: Vec<f64>,
}

impl DispersionPolynomial {
    pub fn new(normalization: Normalization, dim: usize) -> Result<Self> {
        let p_coeffs = match normalization {
            Normalization::Schrodinger => {
                if dim == 0 || dim > 2 {
                    return Err(Error::Unsupported(format!("Schrodinger propagation in d = {dim}")));
                }
                vec![0.0, 0.0, 1.0]
            }
            Normalization::Airy | Normalization::EvenOrder { .. } if dim != 1 => {
                return Err(Error::Unsupported(format!("{normalization:?} propagation in d = {dim}")));
            }
            Normalization::Airy => vec![0.0, 0.0, 0.0, 1.0],
            Normalization::EvenOrder { k } => {
                if k == 0 || 2 * k > 6 {
                    return Err(Error::Unsupported(format!("order 2k = {} (1 <= k <= 3)", 2 * k)));
                }
                let mut c = vec![0.0; 2 * k as usize + 1];
                c[2 * k as usize] = if k % 2 == 0 { 1.0 } else { -1.0 };
                c
            }
        };
        Ok(Self { normalization, dim, p_coeffs })
    }

    pub fn schrodinger(dim: usize) -> Result<Self> {
        Self::new(Normalization::Schrodinger, dim)
    }

    pub fn airy() -> Self {
        Self::new(Normalization::Airy, 1).expect("valid")
    }

    pub fn even_order(k: u32) -> Result<Self> {
        Self::new(Normalization::EvenOrder { k }, 1)
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> u32 {
        (self.p_coeffs.len() - 1) as u32
    }

    pub fn p_coeffs(&self) -> &[f64] {
        &self.p_coeffs
    }

    /// `P(z)`.
    pub fn p(&self, z: f64) -> f64 {
        self.p_coeffs.iter().rev().fold(0.0, |acc, c| acc * z + c)
    }

    /// `P'(z)`.
    pub fn p_prime(&self, z: f64) -> f64 {
        self.p_coeffs.iter().enumerate().skip(1).rev().fold(0.0, |acc, (n, c)| acc * z + n as f64 * c)
    }

    /// Coefficients of `xi -> P'(-xi)`, lowest degree first.
    pub fn p_prime_reflected_coeffs(&self) -> Vec<f64> {
        self.p_coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(n, c)| {
                let sign = if (n - 1) % 2 == 0 { 1.0 } else { -1.0 };
                sign * n as f64 * c
            })
            .collect()
    }

    /// The evolution symbol `sigma(xi) = i sum_j P(-xi_j)`.
    pub fn sigma(&self, xi: &[f64]) -> Complex64 {
        Complex64::new(0.0, xi.iter().map(|x| self.p(-x)).sum())
    }

    /// Length of the group velocity, `|(P'(-xi_j))_j|`.
    pub fn group_speed(&self, xi: &[f64]) -> f64 {
        xi.iter().map(|x| self.p_prime(-x).powi(2)).sum::<f64>().sqrt()
    }

    /// Whether real data stay real (`P` odd).
    pub fn preserves_reality(&self) -> bool {
        self.p_coeffs.iter().step_by(2).all(|c| *c == 0.0)
    }
}

/// Fourier coefficients of a datum, ready to be evolved to any time.
#[derive(Debug, Clone)]
pub struct Evolution {
    grid: GridSpec,
    spectrum: Vec<Complex64>,
    disp: DispersionPolynomial,
    initial: SampledField,
}

impl Evolution {
    pub fn new(u0: &SampledField, disp: &DispersionPolynomial) -> Result<Self> {
        if u0.grid().dim() != disp.dim() {
            return Err(Error::ShapeMismatch(format!("{}-d field for a {}-d equation", u0.grid().dim(), disp.dim())));
        }
        let mut spectrum = u0.values().to_vec();
        fft::forward(&mut spectrum, u0.grid());
        Ok(Self { grid: u0.grid().clone(), spectrum, disp: disp.clone(), initial: u0.clone() })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn at(&self, t: f64) -> SampledField {
        if t == 0.0 {
            return self.initial.clone();
        }
        let mut buf = self.spectrum.clone();
        for_each_mode(&self.grid, |flat, xi| {
            buf[flat] *= (t * self.disp.sigma(xi)).exp();
        });
        fft::inverse(&mut buf, &self.grid);
        let kind =
            if self.initial.is_real() && self.disp.preserves_reality() { FieldKind::Real } else { FieldKind::Complex };
        SampledField::new(self.grid.clone(), buf, kind).expect("shape preserved")
    }

    /// Smallest `K` such that the modes with `max_j |xi_j| <= K` hold all but
    /// `BAND_TAIL` of the spectral mass.
    pub fn effective_band(&self) -> f64 {
        let mut modes: Vec<(f64, f64)> = Vec::with_capacity(self.spectrum.len());
        for_each_mode(&self.grid, |flat, xi| {
            let r = xi.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            modes.push((r, self.spectrum[flat].norm_sqr()));
        });
        let total: f64 = modes.iter().map(|m| m.1).sum();
        if total == 0.0 {
            return 0.0;
        }
        modes.sort_by(|a, b| b.0.total_cmp(&a.0));
        // peel modes from the top of the band while the tail stays small
        let mut tail = 0.0;
        let mut i = 0;
        while i < modes.len() {
            let r = modes[i].0;
            let mut shell = 0.0;
            let mut j = i;
            while j < modes.len() && modes[j].0 == r {
                shell += modes[j].1;
                j += 1;
            }
            if tail + shell > BAND_TAIL * total {
                return r;
            }
            tail += shell;
            i = j;
        }
        0.0
    }

    /// Largest group speed over the grid modes inside the effective band.
    pub fn max_group_speed(&self) -> f64 {
        let band = self.effective_band();
        let mut speed: f64 = 0.0;
        for_each_mode(&self.grid, |_, xi| {
            if xi.iter().all(|x| x.abs() <= band) {
                speed = speed.max(self.disp.group_speed(xi));
            }
        });
        speed
    }
}

fn for_each_mode<F: FnMut(usize, &[f64])>(grid: &GridSpec, mut f: F) {
    let ks: Vec<Vec<f64>> = (0..grid.dim()).map(|a| grid.wavenumbers(a)).collect();
    let mut xi = vec![0.0; grid.dim()];
    for flat in 0..grid.len() {
        let mut rest = flat;
        for axis in (0..grid.dim()).rev() {
            let n = grid.points()[axis];
            xi[axis] = ks[axis][rest % n];
            rest /= n;
        }
        f(flat, &xi);
    }
}

/// `u(t)` from `u(0) = u0`.
pub fn propagate(u0: &SampledField, disp: &DispersionPolynomial, t: f64) -> Result<SampledField> {
    Ok(Evolution::new(u0, disp)?.at(t))
}

/// `||U(s + t) u0 - U(t) U(s) u0|| / ||u0||`.
pub fn group_property_check(u0: &SampledField, disp: &DispersionPolynomial, s: f64, t: f64) -> Result<f64> {
    let norm = u0.l2_norm();
    if norm == 0.0 {
        return Ok(0.0);
    }
    let direct = propagate(u0, disp, s + t)?;
    let composed = propagate(&propagate(u0, disp, s)?, disp, t)?;
    Ok(direct.sub(&composed)?.l2_norm() / norm)
}

/// Fraction of the L2 mass within `GUARD_WIDTH` of the box boundary on any axis.
pub fn guard_fraction(u: &SampledField) -> f64 {
    let g = u.grid();
    let mut edge = 0.0;
    let mut total = 0.0;
    let margins: Vec<usize> =
        (0..g.dim()).map(|a| ((GUARD_WIDTH * g.points()[a] as f64).ceil() as usize).max(1)).collect();
    for (flat, v) in u.values().iter().enumerate() {
        let m = v.norm_sqr();
        total += m;
        let idx = g.multi_index(flat);
        let near = idx.iter().zip(g.points()).zip(&margins).any(|((i, n), w)| *i < *w || *i >= n - w);
        if near {
            edge += m;
        }
    }
    if total == 0.0 {
        0.0
    } else {
        edge / total
    }
}

pub fn is_contaminated(u: &SampledField) -> bool {
    guard_fraction(u) >= GUARD_THRESHOLD
}

/// Box sizing: half-width needed to keep a datum of radius `support_radius`
/// inside the box up to time `t_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sizing {
    pub band: f64,
    pub max_group_speed: f64,
    pub support_radius: f64,
    pub t_max: f64,
    pub required_half_width: f64,
    pub half_width: f64,
    pub satisfied: bool,
}

/// Radius about the origin containing all but `BAND_TAIL` of the L2 mass.
pub fn support_radius(u: &SampledField) -> f64 {
    let g = u.grid();
    let mut radial: Vec<(f64, f64)> = u
        .values()
        .iter()
        .enumerate()
        .map(|(flat, v)| {
            let x = g.point(flat);
            (x.iter().map(|c| c * c).sum::<f64>().sqrt(), v.norm_sqr())
        })
        .collect();
    let total: f64 = radial.iter().map(|r| r.1).sum();
    if total == 0.0 {
        return 0.0;
    }
    radial.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut tail = 0.0;
    for (r, m) in radial {
        if tail + m > BAND_TAIL * total {
            return r;
        }
        tail += m;
    }
    0.0
}

/// The sizing rule `half-width >= support + t_max * max group speed`.
pub fn sizing(u0: &SampledField, disp: &DispersionPolynomial, t_max: f64) -> Result<Sizing> {
    let ev = Evolution::new(u0, disp)?;
    let band = ev.effective_band();
    let max_group_speed = ev.max_group_speed();
    let support = support_radius(u0);
    let required = support + t_max.abs() * max_group_speed;
    let half = u0.grid().half_extent();
    Ok(Sizing {
        band,
        max_group_speed,
        support_radius: support,
        t_max,
        required_half_width: required,
        half_width: half,
        satisfied: half >= required,
    })
}

/// [`sizing`] as a precondition.
pub fn check_domain(u0: &SampledField, disp: &DispersionPolynomial, t_max: f64) -> Result<Sizing> {
    let s = sizing(u0, disp, t_max)?;
    if !s.satisfied {
        return Err(Error::DomainTooSmall { have: s.half_width, need: s.required_half_width });
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{sample, AnalyticField, Coverage};

    fn gaussian(half: f64, n: usize) -> SampledField {
        let g = GridSpec::symmetric(half, n).unwrap();
        sample(&AnalyticField::gaussian(&[0.0], 1.0), &g, Coverage::Enforce).unwrap()
    }

    #[test]
    fn symbols_follow_the_normalizations() {
        let s = DispersionPolynomial::schrodinger(1).unwrap();
        assert_eq!(s.sigma(&[2.0]), Complex64::new(0.0, 4.0));
        let a = DispersionPolynomial::airy();
        assert_eq!(a.sigma(&[2.0]), Complex64::new(0.0, -8.0));
        assert!(a.preserves_reality());
        assert!(!s.preserves_reality());
        let e = DispersionPolynomial::even_order(2).unwrap();
        assert_eq!(e.sigma(&[2.0]), Complex64::new(0.0, 16.0));
        let e1 = DispersionPolynomial::even_order(1).unwrap();
        assert_eq!(e1.sigma(&[2.0]), Complex64::new(0.0, -4.0));
        assert_eq!(DispersionPolynomial::schrodinger(2).unwrap().sigma(&[1.0, 2.0]), Complex64::new(0.0, 5.0));
        assert!(DispersionPolynomial::new(Normalization::Airy, 2).is_err());
        assert!(DispersionPolynomial::even_order(0).is_err());
    }

    #[test]
    fn polynomial_derivative_and_reflection() {
        let a = DispersionPolynomial::airy();
        assert_eq!(a.p_prime(2.0), 12.0);
        assert_eq!(a.p_prime_reflected_coeffs(), vec![0.0, 0.0, 3.0]);
        let e = DispersionPolynomial::even_order(2).unwrap();
        assert_eq!(e.p_prime_reflected_coeffs(), vec![0.0, 0.0, 0.0, -4.0]);
        assert_eq!(a.group_speed(&[-2.0]), 12.0);
    }

    #[test]
    fn time_zero_is_the_identity() {
        let u0 = gaussian(20.0, 256);
        let u = propagate(&u0, &DispersionPolynomial::schrodinger(1).unwrap(), 0.0).unwrap();
        for (a, b) in u.values().iter().zip(u0.values()) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn schrodinger_gaussian_modulus() {
        let u0 = gaussian(60.0, 4096);
        let u = propagate(&u0, &DispersionPolynomial::schrodinger(1).unwrap(), 1.0).unwrap();
        let mid = 2048;
        assert_eq!(u.grid().coord(0, mid), 0.0);
        assert!((u.values()[mid].norm() - 5f64.powf(-0.25)).abs() < 1e-8);
        for i in (0..4096).step_by(97) {
            let x = u.grid().coord(0, i);
            let oracle = 5f64.powf(-0.25) * (-x * x / 10.0).exp();
            assert!((u.values()[i].norm() - oracle).abs() < 1e-10);
        }
    }

    #[test]
    fn group_property_and_reversibility() {
        let u0 = gaussian(40.0, 1024);
        let s = DispersionPolynomial::schrodinger(1).unwrap();
        assert_eq!(group_property_check(&u0, &s, 0.0, 0.0).unwrap(), 0.0);
        assert!(group_property_check(&u0, &s, 0.3, 0.7).unwrap() <= 1e-12);
        let back = propagate(&propagate(&u0, &s, 1.0).unwrap(), &s, -1.0).unwrap();
        assert!(back.sub(&u0).unwrap().l2_norm() <= 1e-12 * u0.l2_norm());
    }

    #[test]
    fn airy_keeps_real_data_real() {
        let g = GridSpec::symmetric(200.0, 4096).unwrap();
        let real = sample(&AnalyticField::gaussian(&[0.5], 1.0), &g, Coverage::Enforce).unwrap();
        let complex = real.map(FieldKind::Complex, |v| v);
        let u = propagate(&complex, &DispersionPolynomial::airy(), 3.0).unwrap();
        let imag = u.values().iter().map(|v| v.im.abs()).fold(0.0, f64::max);
        assert!(imag < 1e-12, "{imag}");
        assert!(propagate(&real, &DispersionPolynomial::airy(), 3.0).unwrap().is_real());
    }

    #[test]
    fn guard_and_sizing() {
        let u0 = gaussian(20.0, 512);
        assert!(guard_fraction(&u0) < 1e-60);
        let s = DispersionPolynomial::schrodinger(1).unwrap();
        let sz = sizing(&u0, &s, 5.0).unwrap();
        // |u_hat|^2 ~ exp(-xi^2): 1e-12 tail beyond |xi| ~ 5.0
        assert!(sz.band > 4.5 && sz.band < 5.5, "{sz:?}");
        assert!((sz.max_group_speed - 2.0 * sz.band).abs() < 1e-12);
        assert!(!sz.satisfied);
        assert!(matches!(check_domain(&u0, &s, 5.0), Err(Error::DomainTooSmall { .. })));
        let far = propagate(&u0, &s, 20.0).unwrap();
        assert!(is_contaminated(&far));
    }
}
