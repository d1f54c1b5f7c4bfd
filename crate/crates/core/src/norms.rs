//! Lebesgue, Sobolev, weighted and dyadic norms of sampled fields.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{fft, GridSpec, SampledField};

/// Identifier of the dyadic bump profile, carried by every report.
pub const PARTITION_PROFILE_ID: &str = "quintic-smoothstep-log2";

/// Relative L2 mass outside the dyadic shell above which a norm is flagged as truncated.
pub const TRUNCATION_TOL: f64 = 1e-10;

/// `6s^5 - 15s^4 + 10s^3` on `[0, 1]`, clamped outside.
pub fn smoothstep(s: f64) -> f64 {
    let s = s.clamp(0.0, 1.0);
    s * s * s * (10.0 + s * (-15.0 + 6.0 * s))
}

/// `phi_k(r)` as a function of `rho = log2 r`.
pub fn dyadic_bump(k: i32, r: f64) -> f64 {
    if r <= 0.0 {
        return 0.0;
    }
    let s = r.log2() - k as f64;
    if s <= -1.0 || s >= 1.0 {
        0.0
    } else if s < 0.0 {
        smoothstep(s + 1.0)
    } else {
        1.0 - smoothstep(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DyadicPartition {
    grid: GridSpec,
    k_min: i32,
    k_max: i32,
    bumps: Vec<Vec<f64>>,
    radii: Vec<f64>,
}

impl DyadicPartition {
    /// Samples `phi_k`, `k_min <= k <= k_max`, on `grid`.
    pub fn build(grid: &GridSpec, k_min: i32, k_max: i32) -> Result<Self> {
        if k_min > k_max {
            return Err(Error::Range(format!("k_min = {k_min} > k_max = {k_max}")));
        }
        let h = grid.max_spacing();
        if 2f64.powi(k_min) < 4.0 * h {
            return Err(Error::Range(format!("2^{k_min} is below four grid spacings ({:.3e})", 4.0 * h)));
        }
        let half = grid.half_extent();
        if 2f64.powi(k_max + 1) > half {
            return Err(Error::Range(format!("2^{} exceeds the half-extent {half}", k_max + 1)));
        }
        let radii: Vec<f64> =
            (0..grid.len()).map(|flat| grid.point(flat).iter().map(|x| x * x).sum::<f64>().sqrt()).collect();
        let bumps =
            (k_min..=k_max).into_par_iter().map(|k| radii.iter().map(|&r| dyadic_bump(k, r)).collect()).collect();
        Ok(Self { grid: grid.clone(), k_min, k_max, bumps, radii })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn k_min(&self) -> i32 {
        self.k_min
    }

    pub fn k_max(&self) -> i32 {
        self.k_max
    }

    pub fn len(&self) -> usize {
        self.bumps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bumps.is_empty()
    }

    pub fn ks(&self) -> impl Iterator<Item = i32> {
        self.k_min..=self.k_max
    }

    /// Sampled `phi_k`.
    pub fn bump(&self, k: i32) -> Option<&[f64]> {
        if k < self.k_min || k > self.k_max {
            return None;
        }
        Some(&self.bumps[(k - self.k_min) as usize])
    }

    /// `(2^{k_min}, 2^{k_max})`.
    pub fn shell(&self) -> (f64, f64) {
        (2f64.powi(self.k_min), 2f64.powi(self.k_max))
    }

    pub fn in_shell(&self, flat: usize) -> bool {
        let (lo, hi) = self.shell();
        let r = self.radii[flat];
        r >= lo && r <= hi
    }

    /// Largest `|sum_k phi_k - 1|` over grid nodes in the shell.
    pub fn unity_residual(&self) -> f64 {
        (0..self.grid.len())
            .filter(|&i| self.in_shell(i))
            .map(|i| (self.bumps.iter().map(|b| b[i]).sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Largest number of bumps that are non-zero at one node.
    pub fn max_overlap(&self) -> usize {
        (0..self.grid.len()).map(|i| self.bumps.iter().filter(|b| b[i] > 0.0).count()).max().unwrap_or(0)
    }

    /// `||phi_k f||_{L2}` for each `k`.
    pub fn pieces(&self, f: &SampledField) -> Result<Vec<f64>> {
        self.check_grid(f)?;
        let cell = self.grid.cell_volume();
        Ok(self
            .bumps
            .par_iter()
            .map(|b| (b.iter().zip(f.values()).map(|(w, v)| w * w * v.norm_sqr()).sum::<f64>() * cell).sqrt())
            .collect())
    }

    /// Relative L2 mass of `f` inside `2^{k_min}` and beyond `2^{k_max}`.
    pub fn outside_fractions(&self, f: &SampledField) -> Result<(f64, f64)> {
        self.check_grid(f)?;
        let (lo, hi) = self.shell();
        let (mut inner, mut outer, mut total) = (0.0, 0.0, 0.0);
        for (v, &r) in f.values().iter().zip(&self.radii) {
            let m = v.norm_sqr();
            total += m;
            if r < lo {
                inner += m;
            } else if r > hi {
                outer += m;
            }
        }
        if total == 0.0 {
            return Ok((0.0, 0.0));
        }
        Ok(((inner / total).sqrt(), (outer / total).sqrt()))
    }

    fn check_grid(&self, f: &SampledField) -> Result<()> {
        if f.grid() != &self.grid {
            return Err(Error::ShapeMismatch("field and partition live on different grids".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Weight {
    /// `|x|^a`
    Power { a: f64 },
    /// `(1 + |x|^2)^{a/2}`
    Japanese { a: f64 },
}

impl Weight {
    pub fn id(&self) -> String {
        match self {
            Self::Power { a } => format!("|x|^{a}"),
            Self::Japanese { a } => format!("<x>^{a}"),
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let r2: f64 = x.iter().map(|c| c * c).sum();
        match *self {
            Self::Power { a } => {
                if a == 0.0 {
                    1.0
                } else {
                    r2.powf(a / 2.0)
                }
            }
            Self::Japanese { a } => (1.0 + r2).powf(a / 2.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "norm", rename_all = "kebab-case")]
pub enum NormKind {
    Lp { p: f64 },
    Hs { s: f64 },
    Xnorm { theta: f64, q: f64 },
    WeightedL2 { weight: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Truncation {
    pub k_min: i32,
    pub k_max: i32,
    /// `||f 1_{|x| < 2^k_min}|| / ||f||`.
    pub inner_fraction: f64,
    /// `||f 1_{|x| > 2^k_max}|| / ||f||`.
    pub outer_fraction: f64,
    /// Upper bound for the `l^q` norm of the missing terms `k < k_min`, from
    /// `||phi_k f|| <= sup_{|x| < 2^k_min} |f| ||phi_k||`. Infinite when the
    /// weights do not decay (`theta + d/2 <= 0`).
    pub inner_tail_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormValue {
    pub kind: NormKind,
    pub value: f64,
    /// Set when the dyadic window clipped a non-negligible part of the field.
    pub truncation: Option<Truncation>,
}

impl NormValue {
    fn plain(kind: NormKind, value: f64) -> Self {
        Self { kind, value, truncation: None }
    }

    /// `value` combined with the bound on the clipped inner terms; an upper
    /// bound for the norm over all `k <= k_max`.
    pub fn upper(&self) -> f64 {
        match (&self.kind, &self.truncation) {
            (NormKind::Xnorm { q, .. }, Some(t)) if t.inner_tail_bound > 0.0 => {
                sequence_norm(&[self.value, t.inner_tail_bound], *q)
            }
            _ => self.value,
        }
    }
}

/// `int phi_0(|x|)^2 dx` over `R^d`, `d` in 1..=3.
pub fn unit_bump_l2_sq(d: usize) -> f64 {
    // phi_0 lives on 1/2 < r < 2; Simpson in r
    let n = 20_000;
    let (a, b) = (0.5, 2.0);
    let h = (b - a) / n as f64;
    let shell = |r: f64| match d {
        1 => 2.0,
        2 => 2.0 * std::f64::consts::PI * r,
        _ => 4.0 * std::f64::consts::PI * r * r,
    };
    let f = |r: f64| shell(r) * dyadic_bump(0, r).powi(2);
    let mut sum = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(a + i as f64 * h);
    }
    sum * h / 3.0
}

/// `l^q` norm of a finite sequence, `q = inf` giving the maximum.
pub fn sequence_norm(terms: &[f64], q: f64) -> f64 {
    if q.is_infinite() {
        terms.iter().fold(0.0, |m, t| m.max(t.abs()))
    } else if q == 1.0 {
        terms.iter().map(|t| t.abs()).sum()
    } else {
        terms.iter().map(|t| t.abs().powf(q)).sum::<f64>().powf(1.0 / q)
    }
}

/// `||(2^{theta k} ||phi_k f||_{L2})_k||_{l^q}`.
pub fn x_norm(f: &SampledField, theta: f64, q: f64, partition: &DyadicPartition) -> Result<NormValue> {
    check_q(q)?;
    let pieces = partition.pieces(f)?;
    let terms: Vec<f64> = partition.ks().zip(&pieces).map(|(k, p)| 2f64.powf(theta * k as f64) * p).collect();
    let (inner, outer) = partition.outside_fractions(f)?;
    let truncation = (inner.max(outer) > TRUNCATION_TOL).then(|| Truncation {
        k_min: partition.k_min(),
        k_max: partition.k_max(),
        inner_fraction: inner,
        outer_fraction: outer,
        inner_tail_bound: if inner > 0.0 { inner_tail_bound(f, theta, q, partition) } else { 0.0 },
    });
    Ok(NormValue { kind: NormKind::Xnorm { theta, q }, value: sequence_norm(&terms, q), truncation })
}

fn inner_tail_bound(f: &SampledField, theta: f64, q: f64, partition: &DyadicPartition) -> f64 {
    let d = f.grid().dim();
    let decay = theta + d as f64 / 2.0;
    if decay <= 0.0 {
        return f64::INFINITY;
    }
    let (lo, _) = partition.shell();
    let sup =
        f.values().iter().zip(&partition.radii).filter(|(_, &r)| r < lo).map(|(v, _)| v.norm()).fold(0.0, f64::max);
    // terms sup * sqrt(c_d) * 2^{k (theta + d/2)}, k < k_min
    let lead = sup * unit_bump_l2_sq(d).sqrt();
    let k0 = partition.k_min() as f64;
    if q.is_infinite() {
        lead * 2f64.powf((k0 - 1.0) * decay)
    } else {
        let a = q * decay;
        lead * (2f64.powf(k0 * a) / (2f64.powf(a) - 1.0)).powf(1.0 / q)
    }
}

fn check_q(q: f64) -> Result<()> {
    if !(q >= 1.0) {
        return Err(Error::InvalidParameter(format!("sequence exponent q = {q} must be at least 1")));
    }
    Ok(())
}

/// `||f||_{L^p}` by the rectangle rule, or the maximum over nodes for `p = inf`.
pub fn lp_norm(f: &SampledField, p: f64) -> Result<NormValue> {
    if !(p >= 1.0) {
        return Err(Error::InvalidParameter(format!("Lebesgue exponent p = {p} must be at least 1")));
    }
    let value = if p.is_infinite() {
        f.max_abs()
    } else if p == 2.0 {
        f.l2_norm()
    } else {
        let cell = f.grid().cell_volume();
        (f.values().iter().map(|v| v.norm().powf(p)).sum::<f64>() * cell).powf(1.0 / p)
    };
    Ok(NormValue::plain(NormKind::Lp { p }, value))
}

/// `||(1 + |xi|^2)^{s/2} f_hat||` with the unitary Fourier normalization.
pub fn hs_norm(f: &SampledField, s: f64) -> NormValue {
    let g = f.grid();
    let mut buf = f.values().to_vec();
    fft::forward(&mut buf, g);
    let ks: Vec<Vec<f64>> = (0..g.dim()).map(|a| g.wavenumbers(a)).collect();
    let mut sum = 0.0;
    for (flat, v) in buf.iter().enumerate() {
        let idx = g.multi_index(flat);
        let xi2: f64 = idx.iter().enumerate().map(|(a, &i)| ks[a][i] * ks[a][i]).sum();
        let w = if s == 0.0 { 1.0 } else { (1.0 + xi2).powf(s) };
        sum += w * v.norm_sqr();
    }
    let value = (sum / g.len() as f64 * g.cell_volume()).sqrt();
    NormValue::plain(NormKind::Hs { s }, value)
}

/// `||w(x) f||_{L2}`.
pub fn weighted_l2(f: &SampledField, weight: Weight) -> NormValue {
    let g = f.grid();
    let mut x = vec![0.0; g.dim()];
    let mut sum = 0.0;
    for (flat, v) in f.values().iter().enumerate() {
        g.point_into(flat, &mut x);
        sum += (weight.eval(&x) * v.norm()).powi(2);
    }
    NormValue::plain(NormKind::WeightedL2 { weight: weight.id() }, (sum * g.cell_volume()).sqrt())
}

/// Grid of trial shifts: `(2 radius / coarse_step + 1)^d` points, then `levels`
/// refinements by `refine` around the best point so far.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShiftSearch {
    pub radius: f64,
    pub coarse_step: f64,
    pub levels: u32,
    pub refine: u32,
}

impl Default for ShiftSearch {
    fn default() -> Self {
        Self { radius: 16.0, coarse_step: 1.0, levels: 3, refine: 4 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranslatedNorm {
    pub norm: NormValue,
    /// Minimizing `y`, with `tau_y f(x) = f(x + y)`; the objective is
    /// [`NormValue::upper`].
    pub shift: Vec<f64>,
    /// [`NormValue::upper`] without translation.
    pub at_zero: f64,
    pub evaluations: usize,
}

/// Upper bound for `inf_y ||tau_y f||_{X^{theta,q}}` over whole-cell shifts.
///
/// Shifts that move more than `TRUNCATION_TOL` of the mass beyond the outer
/// shell radius are skipped, since the clipped norm would undercount them.
/// Mass inside the inner radius is allowed; its terms carry the weights
/// `2^{theta k}`, `k < k_min`, and the result records the clipped fraction.
pub fn translated_xnorm_inf(
    f: &SampledField,
    theta: f64,
    q: f64,
    partition: &DyadicPartition,
    search: &ShiftSearch,
) -> Result<TranslatedNorm> {
    check_q(q)?;
    if !(search.radius >= 0.0 && search.coarse_step > 0.0 && search.refine >= 2) {
        return Err(Error::InvalidParameter(format!("shift search {search:?}")));
    }
    let g = f.grid();
    let d = g.dim();
    let at_zero = x_norm(f, theta, q, partition)?;
    let cells = |len: f64, axis: usize| (len / g.spacing(axis)).round() as i64;

    let mut evaluations = 1;
    let mut best: (Vec<i64>, NormValue) = (vec![0; d], at_zero.clone());
    let mut centre = vec![0i64; d];
    let mut step: Vec<i64> = (0..d).map(|a| cells(search.coarse_step, a).max(1)).collect();
    let mut reach: Vec<i64> = (0..d).map(|a| cells(search.radius, a)).collect();

    for level in 0..=search.levels {
        let axes: Vec<Vec<i64>> = (0..d)
            .map(|a| {
                let n = reach[a] / step[a];
                (-n..=n).map(|j| centre[a] + j * step[a]).collect()
            })
            .collect();
        let candidates = cartesian(&axes);
        let values: Vec<Result<NormValue>> =
            candidates.par_iter().map(|s| x_norm(&f.roll(s), theta, q, partition)).collect();
        evaluations += candidates.len();
        for (s, v) in candidates.into_iter().zip(values) {
            let v = v?;
            let leaks = v.truncation.is_some_and(|t| t.outer_fraction > TRUNCATION_TOL);
            if !leaks && v.upper() < best.1.upper() {
                best = (s, v);
            }
        }
        if level == search.levels || step.iter().all(|s| *s == 1) {
            break;
        }
        centre = best.0.clone();
        reach = step.clone();
        step = step.iter().map(|s| (s / search.refine as i64).max(1)).collect();
    }
    let shift = best.0.iter().enumerate().map(|(a, s)| *s as f64 * g.spacing(a)).collect();
    Ok(TranslatedNorm { norm: best.1, shift, at_zero: at_zero.upper(), evaluations })
}

fn cartesian(axes: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::new()];
    for axis in axes {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                axis.iter().map(move |v| {
                    let mut p = prefix.clone();
                    p.push(*v);
                    p
                })
            })
            .collect();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{sample, AnalyticField, Coverage, FieldKind};

    fn grid() -> GridSpec {
        GridSpec::symmetric(64.0, 4096).unwrap()
    }

    #[test]
    fn smoothstep_endpoints() {
        assert_eq!(smoothstep(0.0), 0.0);
        assert_eq!(smoothstep(1.0), 1.0);
        assert_eq!(smoothstep(0.5), 0.5);
        assert_eq!(dyadic_bump(0, 1.0), 1.0);
        assert_eq!(dyadic_bump(0, 2.0), 0.0);
        assert_eq!(dyadic_bump(0, 0.5), 0.0);
        assert_eq!(dyadic_bump(0, 0.0), 0.0);
    }

    #[test]
    fn partition_of_unity() {
        let p = DyadicPartition::build(&grid(), -2, 4).unwrap();
        assert_eq!(p.len(), 7);
        assert!(p.unity_residual() <= 1e-12);
        assert!(p.max_overlap() <= 2);
        let single = DyadicPartition::build(&grid(), 0, 0).unwrap();
        assert_eq!(single.len(), 1);
        assert_eq!(single.max_overlap(), 1);
    }

    #[test]
    fn empty_window_is_a_range_error() {
        assert!(matches!(DyadicPartition::build(&grid(), -4, 4), Err(Error::Range(_))));
        assert!(matches!(DyadicPartition::build(&grid(), 0, 6), Err(Error::Range(_))));
        assert!(matches!(DyadicPartition::build(&grid(), 2, 1), Err(Error::Range(_))));
    }

    #[test]
    fn gaussian_l2_and_limits() {
        let f = sample(&AnalyticField::gaussian(&[0.0], 1.0), &grid(), Coverage::Enforce).unwrap();
        assert!((lp_norm(&f, 2.0).unwrap().value - std::f64::consts::PI.powf(0.25)).abs() < 1e-10);
        assert!((hs_norm(&f, 0.0).value - f.l2_norm()).abs() < 1e-12 * f.l2_norm());
        let c = SampledField::from_fn(grid(), FieldKind::Real, |_| 0.7.into());
        assert_eq!(lp_norm(&c, f64::INFINITY).unwrap().value, 0.7);
        assert!(lp_norm(&c, 0.5).is_err());
    }

    #[test]
    fn sandwich_and_truncation_flag() {
        let p = DyadicPartition::build(&grid(), -2, 4).unwrap();
        let inside = sample(&AnalyticField::gaussian(&[4.0], 0.5), &grid(), Coverage::Enforce).unwrap();
        let x = x_norm(&inside, 0.0, 2.0, &p).unwrap();
        assert!(x.truncation.is_none());
        let l2 = inside.l2_norm();
        assert!(x.value <= l2 * (1.0 + 1e-12) && x.value >= l2 / 2f64.sqrt());
        let centred = sample(&AnalyticField::gaussian(&[0.0], 1.0), &grid(), Coverage::Enforce).unwrap();
        let t = x_norm(&centred, 0.0, 2.0, &p).unwrap().truncation.unwrap();
        assert!(t.inner_fraction > 0.1 && t.outer_fraction < 1e-12);
        let zero = SampledField::zeros(grid());
        assert_eq!(x_norm(&zero, 0.5, 1.0, &p).unwrap().value, 0.0);
    }

    #[test]
    fn bump_l2_constant_and_inner_tail() {
        let c1 = unit_bump_l2_sq(1);
        let direct: f64 = {
            let n = 200_000;
            let h = 3.0 / n as f64;
            (0..n).map(|i| dyadic_bump(0, (i as f64 + 0.5) * h).powi(2)).sum::<f64>() * h * 2.0
        };
        assert!((c1 - direct).abs() < 1e-8, "{c1} {direct}");
        let g = grid();
        let p = DyadicPartition::build(&g, -2, 4).unwrap();
        let one =
            SampledField::from_fn(
                g.clone(),
                FieldKind::Real,
                |x| if x[0].abs() < 8.0 { 1.0.into() } else { 0.0.into() },
            );
        let x = x_norm(&one, 0.5, 2.0, &p).unwrap();
        let t = x.truncation.unwrap();
        // sum_{k <= -3} (2^{k/2} 2^{k/2})^2 c_1 = c_1 / 48
        assert!((t.inner_tail_bound - (c1 / 48.0).sqrt()).abs() < 1e-12);
        assert!(x.upper() > x.value);
    }

    #[test]
    fn translation_recentres_a_cube() {
        let g = GridSpec::symmetric(64.0, 8192).unwrap();
        let p = DyadicPartition::build(&g, -4, 4).unwrap();
        let cube = AnalyticField::CubeIndicator { center: vec![10.0], side: 1.0 };
        let f = sample(&cube, &g, Coverage::Enforce).unwrap();
        let t = translated_xnorm_inf(&f, 0.5, 1.0, &p, &ShiftSearch::default()).unwrap();
        assert!(t.norm.upper() <= t.at_zero);
        assert!((t.shift[0] - 10.0).abs() <= 1.0, "{:?}", t.shift);
        assert!(t.at_zero >= 2.0 * t.norm.upper());
    }
}
