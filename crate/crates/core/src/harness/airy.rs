//! Inequalities for `d_t u - d^3 u = 0` and for `i d_t u + d^{2k} u = 0`.

use serde::{Deserialize, Serialize};

use super::evolve::sample_times;
use super::fit::{fit_decay_excluding, DecayFit, Exclusion, MIN_FIT_SAMPLES};
use super::report::{InequalityReport, InequalitySample, RatioBound};
use super::schrodinger::INEQUALITY_SLACK;
use crate::error::{Error, Result};
use crate::fields::SampledField;
use crate::norms::{weighted_l2, Weight};
use crate::spectral::DispersionPolynomial;

pub const POINTWISE_ANCHOR: &str = "Airy pointwise: 3t (d_x u)^2 + x u^2 <= 2 ||d_x u(0)|| ||x u(0)|| + ||u(0)||^2";
pub const LOCAL_ENERGY_ANCHOR: &str =
    "Airy local energy: |t| ||<x>^{-1/2-eps} d_x u(t)||^2 <= C_eps (||d_x u(0)|| ||<x> u(0)|| + ||u(0)||^2)";
pub const DECAY_ANCHOR: &str = "Airy decay: |t|^{1/3} |u(t,x)| <= C ||u(0)||_{L^1}";
pub const MONOMIAL_ANCHOR: &str =
    "order 2k: t |d^{2k-2} u(t,x)|^2 <= C ||d^{2k-2} u(0)|| ||x u(0)||, W = 2k t d^{2k-1} - i x";

fn require_real(u0: &SampledField) -> Result<()> {
    if !u0.is_real() {
        return Err(Error::InvalidParameter("Airy data must be real".into()));
    }
    Ok(())
}

/// `2 ||d u0|| ||x u0|| + ||u0||^2`, conserved along the flow.
pub fn airy_pointwise_rhs(u0: &SampledField) -> Result<f64> {
    let du = u0.spectral_derivative(1)?.l2_norm();
    let xu = u0.times_coordinate(0).l2_norm();
    let m = u0.l2_norm();
    Ok(2.0 * du * xu + m * m)
}

/// Nearest grid node to each probe.
fn probe_nodes(u0: &SampledField, probes: &[f64]) -> Result<Vec<(usize, f64)>> {
    let g = u0.grid();
    let (lo, hi) = g.bounds(0);
    let h = g.spacing(0);
    probes
        .iter()
        .map(|&x| {
            if !(x >= lo && x < hi) {
                return Err(Error::InvalidParameter(format!("probe {x} outside the box [{lo}, {hi})")));
            }
            let i = (((x - lo) / h).round() as usize).min(g.points()[0] - 1);
            Ok((i, g.coord(0, i)))
        })
        .collect()
}

/// `3t (d_x u)^2 + x u^2` at the grid nodes nearest to `probes`, against the
/// conserved right side. Probes are reported at their snapped positions.
pub fn check_airy_pointwise(u0: &SampledField, times: &[f64], probes: &[f64]) -> Result<InequalityReport> {
    require_real(u0)?;
    if times.iter().any(|t| *t < 0.0) {
        return Err(Error::InvalidParameter("the pointwise estimate holds forward in time".into()));
    }
    let rhs = airy_pointwise_rhs(u0)?;
    let nodes = probe_nodes(u0, probes)?;
    let disp = DispersionPolynomial::airy();
    let (kept, excluded) = sample_times(u0, &disp, times, |t, u| {
        let du = u.spectral_derivative(1)?;
        Ok(nodes
            .iter()
            .map(|&(i, x)| {
                let d = du.values()[i].re;
                let v = u.values()[i].re;
                (x, 3.0 * t * d * d + x * v * v)
            })
            .collect::<Vec<_>>())
    })?;
    let samples = kept
        .into_iter()
        .flat_map(|(t, row)| row.into_iter().map(move |(x, lhs)| InequalitySample::at(t, x, lhs, rhs)))
        .collect();
    Ok(InequalityReport::new(
        "airy-pointwise",
        POINTWISE_ANCHOR,
        samples,
        excluded,
        RatioBound::Explicit { bound: 1.0 },
        INEQUALITY_SLACK,
    ))
}

/// `int <x>^{-1-2 eps} dx`.
pub fn japanese_weight_integral(eps: f64) -> f64 {
    // Beta function form: sqrt(pi) Gamma(eps) / Gamma(1/2 + eps)
    std::f64::consts::PI.sqrt() * libm::tgamma(eps) / libm::tgamma(0.5 + eps)
}

/// The data constant: integrating the pointwise estimate against
/// `<x>^{-1-2 eps}` gives `3 |t| ||<x>^{-1/2-eps} d_x u||^2 <= R I_eps + ||u0||^2`.
pub fn airy_local_energy_rhs(u0: &SampledField, eps: f64) -> Result<f64> {
    let m = u0.l2_norm();
    Ok((airy_pointwise_rhs(u0)? * japanese_weight_integral(eps) + m * m) / 3.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalEnergy {
    pub eps: f64,
    pub report: InequalityReport,
    /// `||<x>^{-1/2-eps} d_x u(t)||^2` against `t`.
    pub series: Vec<(f64, f64)>,
    pub fit: Option<DecayFit>,
}

pub fn check_airy_local_energy(
    u0: &SampledField,
    eps: f64,
    times: &[f64],
    fit_window: Option<(f64, f64)>,
) -> Result<LocalEnergy> {
    require_real(u0)?;
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter(format!("eps = {eps} must be positive")));
    }
    let rhs = airy_local_energy_rhs(u0, eps)?;
    let disp = DispersionPolynomial::airy();
    let weight = Weight::Japanese { a: -0.5 - eps };
    let (series, excluded) =
        sample_times(u0, &disp, times, |_, u| Ok(weighted_l2(&u.spectral_derivative(1)?, weight).value.powi(2)))?;
    let samples = series.iter().map(|&(t, e)| InequalitySample::new(t, t.abs() * e, rhs)).collect();
    let report = InequalityReport::new(
        "airy-local-energy",
        LOCAL_ENERGY_ANCHOR,
        samples,
        excluded.clone(),
        RatioBound::Explicit { bound: 1.0 },
        INEQUALITY_SLACK,
    );
    let fit = match fit_window {
        Some(w) => Some(fit_decay_excluding(&series, w, excluded)?),
        None => None,
    };
    Ok(LocalEnergy { eps, report, series, fit })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AiryDecay {
    /// `(t, ||u(t)||_inf)` on uncontaminated samples.
    pub sup_series: Vec<(f64, f64)>,
    /// `(t, sup_{x >= 0} |d_x u(t,x)|)` on uncontaminated samples.
    pub right_derivative_series: Vec<(f64, f64)>,
    pub sup_fit: DecayFit,
    pub right_derivative_fit: DecayFit,
    /// `|t|^{1/3} ||u(t)||_inf / ||u0||_{L^1}`, largest over the samples.
    pub max_scaled_ratio: f64,
    pub excluded: Vec<Exclusion>,
}

/// Fits the decay of `||u(t)||_inf` and of `sup_{x >= 0} |d_x u|`.
pub fn airy_decay_experiment(u0: &SampledField, times: &[f64], window: (f64, f64)) -> Result<AiryDecay> {
    require_real(u0)?;
    let disp = DispersionPolynomial::airy();
    let (kept, excluded) = sample_times(u0, &disp, times, |_, u| {
        let du = u.spectral_derivative(1)?;
        let g = u.grid();
        let right = du
            .values()
            .iter()
            .enumerate()
            .filter(|(i, _)| g.coord(0, *i) >= 0.0)
            .map(|(_, v)| v.norm())
            .fold(0.0, f64::max);
        Ok((u.max_abs(), right))
    })?;
    let in_window = kept.iter().filter(|(t, _)| *t >= window.0 && *t <= window.1).count();
    if in_window < MIN_FIT_SAMPLES {
        return Err(Error::InsufficientWindow { found: in_window, required: MIN_FIT_SAMPLES });
    }
    let sup_series: Vec<(f64, f64)> = kept.iter().map(|(t, v)| (*t, v.0)).collect();
    let right_derivative_series: Vec<(f64, f64)> = kept.iter().map(|(t, v)| (*t, v.1)).collect();
    let l1 = u0.values().iter().map(|v| v.norm()).sum::<f64>() * u0.grid().cell_volume();
    let max_scaled_ratio =
        sup_series.iter().map(|(t, v)| if l1 > 0.0 { t.abs().cbrt() * v / l1 } else { 0.0 }).fold(0.0, f64::max);
    Ok(AiryDecay {
        sup_fit: fit_decay_excluding(&sup_series, window, excluded.clone())?,
        right_derivative_fit: fit_decay_excluding(&right_derivative_series, window, excluded.clone())?,
        sup_series,
        right_derivative_series,
        max_scaled_ratio,
        excluded,
    })
}

/// `t sup_x |d^{2k-2} u(t,x)|^2` against `||d^{2k-2} u0|| ||x u0||` for
/// `i d_t u + d^{2k} u = 0`. Both factors on the right are conserved: the
/// first is a Fourier multiplier norm and `||W u(t)|| = ||x u0||`.
pub fn check_monomial_estimate(k: u32, u0: &SampledField, times: &[f64], max_spread: f64) -> Result<InequalityReport> {
    if !(1..=2).contains(&k) {
        return Err(Error::Unsupported(format!("order 2k with k = {k}")));
    }
    let disp = DispersionPolynomial::even_order(k)?;
    let n = 2 * k - 2;
    let rhs = u0.spectral_derivative(n)?.l2_norm() * u0.times_coordinate(0).l2_norm();
    let (kept, excluded) =
        sample_times(u0, &disp, times, |t, u| Ok(t.abs() * u.spectral_derivative(n)?.max_abs().powi(2)))?;
    let samples = kept.into_iter().map(|(t, lhs)| InequalitySample::new(t, lhs, rhs)).collect();
    Ok(InequalityReport::new(
        &format!("monomial-2k-k{k}"),
        MONOMIAL_ANCHOR,
        samples,
        excluded,
        RatioBound::Empirical { max_spread },
        0.0,
    ))
}
