use std::f64::consts::PI;
use std::sync::OnceLock;

use libm::erfc;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::grid::GridSpec;

/// Closed-form initial data with pointwise, gradient and moment oracles.
///
/// Phase-space data on `R^d x R^d` use the coordinate order
/// `(q_1, .., q_d, p_1, .., p_d)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum AnalyticField {
    /// The identically vanishing datum.
    Zero { dim: usize },
    /// `exp(-sum (x_j - c_j)^2 / (2 w_j^2)) * exp(i k . x)`.
    Gaussian { center: Vec<f64>, widths: Vec<f64>, modulation: Vec<f64> },
    /// `lambda * phi(lambda q, lambda p)` on phase space with `d = 1`, where
    /// `phi` is the fixed radial bump of [`bump`].
    BumpLambda { lambda: f64 },
    /// Indicator of the half-open cube of side `side` centred at `center`.
    CubeIndicator { center: Vec<f64>, side: f64 },
    /// `exp(-|q|^2 / (2 s_q^2) - |p|^2 / (2 s_p^2))` on `R^d x R^d`.
    ProductGaussianPhase { d: usize, q_width: f64, p_width: f64 },
}

impl AnalyticField {
    /// Isotropic, unmodulated Gaussian `exp(-|x - c|^2 / (2 w^2))`.
    pub fn gaussian(center: &[f64], width: f64) -> Self {
        AnalyticField::Gaussian {
            center: center.to_vec(),
            widths: vec![width; center.len()],
            modulation: vec![0.0; center.len()],
        }
    }

    pub fn gaussian_modulated(center: &[f64], width: f64, modulation: &[f64]) -> Self {
        AnalyticField::Gaussian {
            center: center.to_vec(),
            widths: vec![width; center.len()],
            modulation: modulation.to_vec(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            AnalyticField::Zero { dim } => *dim,
            AnalyticField::Gaussian { center, .. } => center.len(),
            AnalyticField::BumpLambda { .. } => 2,
            AnalyticField::CubeIndicator { center, .. } => center.len(),
            AnalyticField::ProductGaussianPhase { d, .. } => 2 * d,
        }
    }

    pub fn is_real(&self) -> bool {
        match self {
            AnalyticField::Gaussian { modulation, .. } => modulation.iter().all(|k| *k == 0.0),
            _ => true,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, AnalyticField::Zero { .. })
    }

    fn as_gaussian(&self) -> Option<(Vec<f64>, Vec<f64>, Vec<f64>)> {
        match self {
            AnalyticField::Gaussian { center, widths, modulation } => {
                Some((center.clone(), widths.clone(), modulation.clone()))
            }
            AnalyticField::ProductGaussianPhase { d, q_width, p_width } => {
                let mut widths = vec![*q_width; *d];
                widths.extend(std::iter::repeat_n(*p_width, *d));
                Some((vec![0.0; 2 * d], widths, vec![0.0; 2 * d]))
            }
            _ => None,
        }
    }

    pub fn value(&self, x: &[f64]) -> Complex64 {
        match self {
            AnalyticField::Zero { .. } => Complex64::new(0.0, 0.0),
            AnalyticField::Gaussian { center, widths, modulation } => gaussian_value(x, center, widths, modulation),
            AnalyticField::ProductGaussianPhase { d, q_width, p_width } => {
                let mut e = 0.0;
                for (j, xj) in x.iter().enumerate() {
                    let w = if j < *d { q_width } else { p_width };
                    e += xj * xj / (2.0 * w * w);
                }
                Complex64::new((-e).exp(), 0.0)
            }
            AnalyticField::BumpLambda { lambda } => {
                let r = x[0].hypot(x[1]);
                Complex64::new(lambda * bump::profile(lambda * r), 0.0)
            }
            AnalyticField::CubeIndicator { center, side } => {
                let inside = x.iter().zip(center).all(|(xi, ci)| *xi >= ci - side / 2.0 && *xi < ci + side / 2.0);
                Complex64::new(if inside { 1.0 } else { 0.0 }, 0.0)
            }
        }
    }

    pub fn real_value(&self, x: &[f64]) -> f64 {
        self.value(x).re
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<Complex64> {
        match self {
            AnalyticField::BumpLambda { lambda } => {
                let r = x[0].hypot(x[1]);
                if r == 0.0 {
                    return vec![Complex64::new(0.0, 0.0); 2];
                }
                let (_, dphi) = bump::profile_with_derivative(lambda * r);
                let s = lambda * lambda * dphi / r;
                vec![Complex64::new(s * x[0], 0.0), Complex64::new(s * x[1], 0.0)]
            }
            AnalyticField::Zero { dim } => vec![Complex64::new(0.0, 0.0); *dim],
            AnalyticField::CubeIndicator { center, .. } => vec![Complex64::new(0.0, 0.0); center.len()],
            _ => (0..self.dim()).map(|a| self.partial(x, &[a]).expect("gaussian families are separable")).collect(),
        }
    }

    /// Per-axis length over which the datum varies appreciably.
    pub fn length_scales(&self) -> Vec<f64> {
        if let Some((_, widths, modulation)) = self.as_gaussian() {
            return widths
                .iter()
                .zip(&modulation)
                .map(|(w, k)| if *k == 0.0 { *w } else { w.min(1.0 / k.abs()) })
                .collect();
        }
        match self {
            AnalyticField::Zero { dim } => vec![1.0; *dim],
            // the transition annulus 1 < lambda r < 2 needs resolution well below 1/lambda
            AnalyticField::BumpLambda { lambda } => vec![0.1 / lambda; 2],
            AnalyticField::CubeIndicator { center, side } => vec![*side; center.len()],
            _ => unreachable!(),
        }
    }

    /// Mixed partial derivative, each listed axis differentiated once.
    ///
    /// Available for the separable families for any set of distinct axes and
    /// for every family when at most one axis is listed.
    pub fn partial(&self, x: &[f64], axes: &[usize]) -> Option<Complex64> {
        if axes.is_empty() {
            return Some(self.value(x));
        }
        if let Some((center, widths, modulation)) = self.as_gaussian() {
            let mut factor = Complex64::new(1.0, 0.0);
            for &a in axes {
                factor *= Complex64::new(-(x[a] - center[a]) / (widths[a] * widths[a]), modulation[a]);
            }
            return Some(gaussian_value(x, &center, &widths, &modulation) * factor);
        }
        match self {
            AnalyticField::Zero { .. } | AnalyticField::CubeIndicator { .. } => Some(Complex64::new(0.0, 0.0)),
            AnalyticField::BumpLambda { .. } if axes.len() == 1 => Some(self.gradient(x)[axes[0]]),
            _ => None,
        }
    }

    /// Box outside of which `|f| <= amplitude_tol * max|f|`; `None` for the zero datum.
    pub fn support_box(&self, amplitude_tol: f64) -> Option<Vec<(f64, f64)>> {
        if let Some((center, widths, _)) = self.as_gaussian() {
            let z = (2.0 * (1.0 / amplitude_tol).ln()).sqrt();
            return Some(center.iter().zip(&widths).map(|(c, w)| (c - z * w, c + z * w)).collect());
        }
        match self {
            AnalyticField::Zero { .. } => None,
            AnalyticField::BumpLambda { lambda } => {
                let r = bump::OUTER_RADIUS / lambda;
                Some(vec![(-r, r), (-r, r)])
            }
            AnalyticField::CubeIndicator { center, side } => {
                Some(center.iter().map(|c| (c - side / 2.0, c + side / 2.0)).collect())
            }
            _ => unreachable!(),
        }
    }

    /// Fraction of `int |f|` lying outside the periodic box of `grid`.
    ///
    /// `None` when no closed form exists (bump data not contained in the box).
    pub fn outside_fraction(&self, grid: &GridSpec) -> Option<f64> {
        let axes: Vec<usize> = (0..grid.dim()).collect();
        let bounds: Vec<(f64, f64)> = axes.iter().map(|a| grid.bounds(*a)).collect();
        self.outside_fraction_box(&axes, &bounds)
    }

    /// Fraction of `int |f|` with some listed coordinate outside its interval;
    /// the unlisted coordinates are unconstrained.
    pub fn outside_fraction_box(&self, axes: &[usize], bounds: &[(f64, f64)]) -> Option<f64> {
        if let Some((center, widths, _)) = self.as_gaussian() {
            let mut log_inside = 0.0;
            for (&axis, &(lo, hi)) in axes.iter().zip(bounds) {
                let s = std::f64::consts::SQRT_2 * widths[axis];
                let tail = 0.5 * erfc((hi - center[axis]) / s) + 0.5 * erfc((center[axis] - lo) / s);
                log_inside += (-tail.min(1.0)).ln_1p();
            }
            return Some(-log_inside.exp_m1());
        }
        match self {
            AnalyticField::Zero { .. } => Some(0.0),
            AnalyticField::CubeIndicator { center, side } => {
                let mut inside = 1.0;
                for (&axis, &(lo, hi)) in axes.iter().zip(bounds) {
                    let c = center[axis];
                    let overlap = ((c + side / 2.0).min(hi) - (c - side / 2.0).max(lo)).max(0.0);
                    inside *= overlap / side;
                }
                Some(1.0 - inside)
            }
            AnalyticField::BumpLambda { .. } => {
                let b = self.support_box(0.0).expect("bump has a support box");
                let covered = axes.iter().zip(bounds).all(|(&a, &(lo, hi))| lo <= b[a].0 && hi >= b[a].1);
                covered.then_some(0.0)
            }
            _ => unreachable!(),
        }
    }

    /// `int |f|`.
    pub fn l1_norm(&self) -> Option<f64> {
        if let Some((_, widths, _)) = self.as_gaussian() {
            return Some(widths.iter().map(|w| (2.0 * PI).sqrt() * w).product());
        }
        match self {
            AnalyticField::Zero { .. } => Some(0.0),
            AnalyticField::BumpLambda { lambda } => Some(bump::moments().l1 / lambda),
            AnalyticField::CubeIndicator { center, side } => Some(side.powi(center.len() as i32)),
            _ => unreachable!(),
        }
    }

    /// `int |f|^2`.
    pub fn l2_norm_sq(&self) -> Option<f64> {
        if let Some((_, widths, _)) = self.as_gaussian() {
            return Some(widths.iter().map(|w| PI.sqrt() * w).product());
        }
        match self {
            AnalyticField::Zero { .. } => Some(0.0),
            AnalyticField::BumpLambda { .. } => Some(bump::moments().l2_sq),
            AnalyticField::CubeIndicator { center, side } => Some(side.powi(center.len() as i32)),
            _ => unreachable!(),
        }
    }

    /// `int |x|^2 |f|^2`.
    pub fn weighted_l2_sq(&self) -> Option<f64> {
        if let Some((center, widths, _)) = self.as_gaussian() {
            let mass: f64 = widths.iter().map(|w| PI.sqrt() * w).product();
            let second: f64 = center.iter().zip(&widths).map(|(c, w)| c * c + w * w / 2.0).sum();
            return Some(mass * second);
        }
        match self {
            AnalyticField::Zero { .. } => Some(0.0),
            AnalyticField::BumpLambda { lambda } => Some(bump::moments().r2_l2_sq / (lambda * lambda)),
            AnalyticField::CubeIndicator { center, side } => {
                let d = center.len() as i32;
                let per_axis: f64 = center.iter().map(|c| side * c * c + side.powi(3) / 12.0).sum();
                Some(side.powi(d - 1) * per_axis)
            }
            _ => unreachable!(),
        }
    }

    /// `int f`.
    pub fn integral(&self) -> Option<Complex64> {
        if let Some((center, widths, modulation)) = self.as_gaussian() {
            let mut acc = Complex64::new(1.0, 0.0);
            for j in 0..center.len() {
                let (w, k) = (widths[j], modulation[j]);
                acc *= (2.0 * PI).sqrt() * w * (-k * k * w * w / 2.0).exp() * Complex64::from_polar(1.0, k * center[j]);
            }
            return Some(acc);
        }
        self.l1_norm().map(|v| Complex64::new(v, 0.0))
    }

    /// Splits a phase-space datum on `R^d x R^d` into `d` factors on the
    /// `(q_j, p_j)` planes, when the datum is such a product.
    pub fn phase_factors(&self, d: usize) -> Option<Vec<AnalyticField>> {
        if self.dim() != 2 * d {
            return None;
        }
        if d == 1 {
            return Some(vec![self.clone()]);
        }
        let (center, widths, modulation) = self.as_gaussian()?;
        Some(
            (0..d)
                .map(|j| AnalyticField::Gaussian {
                    center: vec![center[j], center[d + j]],
                    widths: vec![widths[j], widths[d + j]],
                    modulation: vec![modulation[j], modulation[d + j]],
                })
                .collect(),
        )
    }
}

fn gaussian_value(x: &[f64], center: &[f64], widths: &[f64], modulation: &[f64]) -> Complex64 {
    let mut e = 0.0;
    let mut phase = 0.0;
    for j in 0..x.len() {
        let y = x[j] - center[j];
        e += y * y / (2.0 * widths[j] * widths[j]);
        phase += modulation[j] * x[j];
    }
    if phase == 0.0 {
        Complex64::new((-e).exp(), 0.0)
    } else {
        Complex64::from_polar((-e).exp(), phase)
    }
}

/// The fixed radial bump: `1` on the unit disc, `0` outside radius 2, with the
/// transition `1 / (1 + exp(1/(2-r) - 1/(r-1)))` in between (C-infinity).
pub mod bump {
    use super::*;

    pub const PROFILE_ID: &str = "radial-exp-transition-r1-r2";
    pub const INNER_RADIUS: f64 = 1.0;
    pub const OUTER_RADIUS: f64 = 2.0;

    pub fn profile(r: f64) -> f64 {
        profile_with_derivative(r).0
    }

    /// `(phi(r), phi'(r))`.
    pub fn profile_with_derivative(r: f64) -> (f64, f64) {
        if r <= INNER_RADIUS {
            return (1.0, 0.0);
        }
        if r >= OUTER_RADIUS {
            return (0.0, 0.0);
        }
        let a = OUTER_RADIUS - r;
        let b = r - INNER_RADIUS;
        let e = 1.0 / a - 1.0 / b;
        if e > 700.0 {
            return (0.0, 0.0);
        }
        if e < -700.0 {
            return (1.0, 0.0);
        }
        let s = 1.0 / (1.0 + e.exp());
        let de = 1.0 / (a * a) + 1.0 / (b * b);
        (s, -de * s * (1.0 - s))
    }

    #[derive(Debug, Clone, Copy)]
    pub struct Moments {
        /// `int_{R^2} phi`
        pub l1: f64,
        /// `int_{R^2} phi^2`
        pub l2_sq: f64,
        /// `int_{R^2} |x|^2 phi^2`
        pub r2_l2_sq: f64,
        /// `int_{R^2} |grad phi|`
        pub grad_l1: f64,
    }

    /// Radial moments by composite Simpson quadrature on `[1, 2]`.
    pub fn moments() -> Moments {
        static CACHE: OnceLock<Moments> = OnceLock::new();
        *CACHE.get_or_init(|| {
            let n = 20_000;
            let h = (OUTER_RADIUS - INNER_RADIUS) / n as f64;
            let mut acc = [0.0f64; 4];
            for i in 0..=n {
                let r = INNER_RADIUS + i as f64 * h;
                let w = if i == 0 || i == n {
                    1.0
                } else if i % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                let (phi, dphi) = profile_with_derivative(r);
                acc[0] += w * r * phi;
                acc[1] += w * r * phi * phi;
                acc[2] += w * r.powi(3) * phi * phi;
                acc[3] += w * r * dphi.abs();
            }
            let tp = 2.0 * PI * h / 3.0;
            Moments {
                l1: PI + tp * acc[0],
                l2_sq: PI + tp * acc[1],
                r2_l2_sq: PI / 2.0 + tp * acc[2],
                grad_l1: tp * acc[3],
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_profile_is_monotone_and_pinned() {
        assert_eq!(bump::profile(0.0), 1.0);
        assert_eq!(bump::profile(1.0), 1.0);
        assert_eq!(bump::profile(2.0), 0.0);
        assert!((bump::profile(1.5) - 0.5).abs() < 1e-15);
        let mut prev = 1.0;
        for i in 0..=1000 {
            let r = 1.0 + i as f64 / 1000.0;
            let v = bump::profile(r);
            assert!(v <= prev + 1e-15);
            prev = v;
        }
    }

    #[test]
    fn bump_derivative_matches_finite_differences() {
        for r in [1.05, 1.3, 1.5, 1.77, 1.95] {
            let h = 1e-6;
            let fd = (bump::profile(r + h) - bump::profile(r - h)) / (2.0 * h);
            let (_, d) = bump::profile_with_derivative(r);
            assert!((fd - d).abs() < 1e-7 * (1.0 + d.abs()), "r = {r}: {fd} vs {d}");
        }
    }

    #[test]
    fn bump_radial_gradient_integral_is_three_pi() {
        // int |phi'| r dr = 1 + int_1^2 phi dr = 3/2 by the symmetry phi(r) + phi(3 - r) = 1
        let m = bump::moments();
        assert!((m.grad_l1 - 3.0 * PI).abs() < 1e-9, "{}", m.grad_l1);
    }

    #[test]
    fn bump_lambda_peaks_at_lambda() {
        let f = AnalyticField::BumpLambda { lambda: 4.0 };
        assert_eq!(f.real_value(&[0.0, 0.0]), 4.0);
        assert_eq!(f.real_value(&[0.2, 0.1]), 4.0);
        assert_eq!(f.real_value(&[0.5, 0.0]), 0.0);
    }

    #[test]
    fn gaussian_moments_closed_forms() {
        let g = AnalyticField::gaussian(&[0.0], 1.0);
        assert!((g.l1_norm().unwrap() - (2.0 * PI).sqrt()).abs() < 1e-15);
        assert!((g.l2_norm_sq().unwrap() - PI.sqrt()).abs() < 1e-15);
        assert!((g.weighted_l2_sq().unwrap() - PI.sqrt() / 2.0).abs() < 1e-15);
    }

    #[test]
    fn gaussian_outside_fraction_uses_erfc_tails() {
        let g = AnalyticField::gaussian(&[0.0], 1.0);
        let wide = GridSpec::symmetric(20.0, 64).unwrap();
        assert!(g.outside_fraction(&wide).unwrap() < 1e-80);
        let narrow = GridSpec::symmetric(1.0, 64).unwrap();
        let f = g.outside_fraction(&narrow).unwrap();
        assert!((f - erfc(1.0 / std::f64::consts::SQRT_2)).abs() < 1e-14);
    }

    #[test]
    fn cube_outside_fraction_is_overlap_complement() {
        let c = AnalyticField::CubeIndicator { center: vec![0.0], side: 1.0 };
        let g = GridSpec::new(vec![0.0], vec![4.0], vec![64]).unwrap();
        assert!((c.outside_fraction(&g).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn phase_factors_split_product_gaussian() {
        let f = AnalyticField::ProductGaussianPhase { d: 2, q_width: 0.5, p_width: 2.0 };
        let parts = f.phase_factors(2).unwrap();
        assert_eq!(parts.len(), 2);
        let x = [0.3, -0.2, 1.1, 0.4];
        let prod = parts[0].value(&[x[0], x[2]]) * parts[1].value(&[x[1], x[3]]);
        assert!((prod - f.value(&x)).norm() < 1e-15);
    }
}
