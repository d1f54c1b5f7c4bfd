//! Inequalities for `d_t u + i Lap u = 0`.

use serde::{Deserialize, Serialize};

use super::evolve::sample_times;
use super::fit::{fit_decay_excluding, DecayFit, Exclusion};
use super::report::{InequalityReport, InequalitySample, RatioBound};
use crate::error::{Error, Result};
use crate::fields::SampledField;
use crate::norms::{hs_norm, lp_norm, weighted_l2, x_norm, DyadicPartition, NormValue, Weight, TRUNCATION_TOL};
use crate::spectral::DispersionPolynomial;
use crate::symmetry::{operator_word_norm, CommutingOperator};

pub const DISPERSIVE_ANCHOR: &str = "dispersive estimate: |t|^{d/2} ||u(t)||_inf <= C ||u(0)||_{X^{d/2,1}}";
pub const KS_ANCHOR: &str =
    "Klainerman-Sobolev: |t|^d ||u(t)||_inf^2 <= C sum_{|a|+|b|=d} ||W^a u(t)|| ||W^b u(t)||, W_j = t d_j + (i/2) x_j";
pub const LP_ANCHOR: &str = "L^p decay: |t|^{theta d/2} ||u(t)||_{L^{2/(1-theta)}} <= C || |x|^{theta d/2} u(0) ||";
pub const LP_TRUNCATED_ANCHOR: &str =
    "L^p decay, all times: <t>^{theta d/2} ||u(t)||_{L^{2/(1-theta)}} <= C (|| |x|^{theta d/2} u(0) || + ||u(0)||_{H^{theta d/2}})";
pub const LP_XNORM_ANCHOR: &str =
    "L^p decay: |t|^{theta d/2} ||u(t)||_{L^{2/(1-theta)}} <= C ||u(0)||_{X^{theta d/2,2}}";
pub const LOCAL_MASS_ANCHOR: &str = "local mass: |t|^s ||U(t) f||_{X^{-s,2}} <= C ||f||_{X^{s,2}}, 0 <= s < d/2";

/// Absolute slack added to explicit inequality bounds.
pub const INEQUALITY_SLACK: f64 = 1e-6;

fn require_shell_supported(f: &SampledField, partition: &DyadicPartition, what: &str) -> Result<NormValue> {
    let v = x_norm(f, 0.0, 2.0, partition)?;
    if let Some(t) = v.truncation {
        if t.inner_fraction.max(t.outer_fraction) > TRUNCATION_TOL {
            return Err(Error::InvalidParameter(format!(
                "{what} is not supported in the dyadic shell (inner {:.2e}, outer {:.2e})",
                t.inner_fraction, t.outer_fraction
            )));
        }
    }
    Ok(v)
}

/// Samples `(t, |t|^{d/2} ||u(t)||_inf, ||u0||_{X^{d/2,1}})`.
pub fn check_dispersive_schrodinger(
    u0: &SampledField,
    times: &[f64],
    partition: &DyadicPartition,
    max_spread: f64,
) -> Result<InequalityReport> {
    let d = u0.grid().dim();
    let disp = DispersionPolynomial::schrodinger(d)?;
    require_shell_supported(u0, partition, "the datum")?;
    let rhs = x_norm(u0, d as f64 / 2.0, 1.0, partition)?.value;
    let (kept, excluded) = sample_times(u0, &disp, times, |t, u| Ok(t.abs().powf(d as f64 / 2.0) * u.max_abs()))?;
    let samples = kept.into_iter().map(|(t, lhs)| InequalitySample::new(t, lhs, rhs)).collect();
    Ok(InequalityReport::new(
        "dispersive-schrodinger",
        DISPERSIVE_ANCHOR,
        samples,
        excluded,
        RatioBound::Empirical { max_spread },
        0.0,
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordNorm {
    pub alpha: Vec<u32>,
    pub norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KsEntry {
    pub t: f64,
    pub lhs: f64,
    pub rhs: f64,
    /// In two dimensions, the terms with `a + b = (1, 1)`.
    pub mixed_block: Option<f64>,
    pub word_norms: Vec<WordNorm>,
}

/// Multi-indices of length `d` and total order at most `max`.
pub fn multi_indices(d: usize, max: u32) -> Vec<Vec<u32>> {
    let mut out = vec![vec![]];
    for _ in 0..d {
        out = out
            .into_iter()
            .flat_map(|p: Vec<u32>| {
                let used: u32 = p.iter().sum();
                (0..=max - used).map(move |a| {
                    let mut q = p.clone();
                    q.push(a);
                    q
                })
            })
            .collect();
    }
    out.sort_by_key(|a| (a.iter().sum::<u32>(), a.iter().rev().copied().collect::<Vec<_>>()));
    out
}

/// `||W^alpha u||` at time `t` for each multi-index of order at most `d`.
pub fn boost_word_norms(u: &SampledField, t: f64) -> Result<Vec<WordNorm>> {
    let d = u.grid().dim();
    multi_indices(d, d as u32)
        .into_iter()
        .map(|alpha| {
            let word: Vec<CommutingOperator> = alpha
                .iter()
                .enumerate()
                .flat_map(|(axis, &n)| std::iter::repeat_n(CommutingOperator::SchrodingerBoost { axis }, n as usize))
                .collect();
            Ok(WordNorm { norm: operator_word_norm(&word, u, t)?, alpha })
        })
        .collect()
}

fn ks_entry(t: f64, u: &SampledField) -> Result<KsEntry> {
    let d = u.grid().dim();
    if d == 0 || d > 2 {
        return Err(Error::Unsupported(format!("Klainerman-Sobolev check in d = {d}")));
    }
    let word_norms = boost_word_norms(u, t)?;
    let order = |a: &[u32]| a.iter().sum::<u32>();
    let mut rhs = 0.0;
    let mut mixed = 0.0;
    for a in &word_norms {
        for b in &word_norms {
            if order(&a.alpha) + order(&b.alpha) != d as u32 {
                continue;
            }
            let term = a.norm * b.norm;
            rhs += term;
            if d == 2 && a.alpha.iter().zip(&b.alpha).all(|(x, y)| x + y == 1) {
                mixed += term;
            }
        }
    }
    let lhs = t.abs().powi(d as i32) * u.max_abs().powi(2);
    Ok(KsEntry { t, lhs, rhs, mixed_block: (d == 2).then_some(mixed), word_norms })
}

/// One evaluation of both sides of the Klainerman-Sobolev inequality.
pub fn check_ks_schrodinger(u0: &SampledField, t: f64) -> Result<KsEntry> {
    let (entries, excluded) = check_ks_entries(u0, &[t])?;
    if let Some(Exclusion::Contaminated { guard_fraction, .. }) = excluded.first() {
        return Err(Error::SupportOverflow { outside: *guard_fraction, context: format!("boundary layer at t = {t}") });
    }
    Ok(entries.into_iter().next().expect("one time"))
}

fn check_ks_entries(u0: &SampledField, times: &[f64]) -> Result<(Vec<KsEntry>, Vec<Exclusion>)> {
    let disp = DispersionPolynomial::schrodinger(u0.grid().dim())?;
    let (kept, excluded) = sample_times(u0, &disp, times, ks_entry)?;
    Ok((kept.into_iter().map(|(_, e)| e).collect(), excluded))
}

/// The Klainerman-Sobolev inequality over a series of times.
pub fn check_ks_schrodinger_series(
    u0: &SampledField,
    times: &[f64],
    max_spread: f64,
) -> Result<(InequalityReport, Vec<KsEntry>)> {
    let (entries, excluded) = check_ks_entries(u0, times)?;
    let samples = entries.iter().map(|e| InequalitySample::new(e.t, e.lhs, e.rhs)).collect();
    let report = InequalityReport::new(
        "ks-schrodinger",
        KS_ANCHOR,
        samples,
        excluded,
        RatioBound::Empirical { max_spread },
        0.0,
    );
    Ok((report, entries))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpDecay {
    pub theta: f64,
    pub p: f64,
    /// Right side `|| |x|^{theta d/2} u0 ||`.
    pub weighted: InequalityReport,
    /// `<t>` weight and the Sobolev term added on the right.
    pub truncated: InequalityReport,
    /// Right side `||u0||_{X^{theta d/2, 2}}`, when a partition is given.
    pub xnorm: Option<InequalityReport>,
    /// `||u(t)||_{L^p}` against `t`.
    pub series: Vec<(f64, f64)>,
    pub fit: Option<DecayFit>,
}

/// Decay of `||u(t)||_{L^p}`, `p = 2 / (1 - theta)`.
pub fn check_lp_decay(
    u0: &SampledField,
    theta: f64,
    times: &[f64],
    partition: Option<&DyadicPartition>,
    fit_window: Option<(f64, f64)>,
    max_spread: f64,
) -> Result<LpDecay> {
    if !(0.0..1.0).contains(&theta) {
        return Err(Error::InvalidParameter(format!("theta = {theta} must lie in [0, 1)")));
    }
    let d = u0.grid().dim() as f64;
    let s = theta * d / 2.0;
    let p = 2.0 / (1.0 - theta);
    let disp = DispersionPolynomial::schrodinger(u0.grid().dim())?;
    let weighted_rhs = weighted_l2(u0, Weight::Power { a: s }).value;
    let sobolev = hs_norm(u0, s).value;
    let (kept, excluded) = sample_times(u0, &disp, times, |_, u| Ok(lp_norm(u, p)?.value))?;

    let bound = if theta == 0.0 { RatioBound::Explicit { bound: 1.0 } } else { RatioBound::Empirical { max_spread } };
    let weighted = InequalityReport::new(
        "lp-decay",
        LP_ANCHOR,
        kept.iter().map(|&(t, v)| InequalitySample::new(t, t.abs().powf(s) * v, weighted_rhs)).collect(),
        excluded.clone(),
        bound,
        if theta == 0.0 { 1e-12 } else { 0.0 },
    );
    let truncated = InequalityReport::new(
        "lp-decay-truncated",
        LP_TRUNCATED_ANCHOR,
        kept.iter()
            .map(|&(t, v)| InequalitySample::new(t, (1.0 + t * t).powf(s / 2.0) * v, weighted_rhs + sobolev))
            .collect(),
        excluded.clone(),
        RatioBound::Empirical { max_spread },
        0.0,
    );
    let xnorm = match partition {
        Some(part) => {
            require_shell_supported(u0, part, "the datum")?;
            let rhs = x_norm(u0, s, 2.0, part)?.value;
            Some(InequalityReport::new(
                "lp-decay-xnorm",
                LP_XNORM_ANCHOR,
                kept.iter().map(|&(t, v)| InequalitySample::new(t, t.abs().powf(s) * v, rhs)).collect(),
                excluded.clone(),
                RatioBound::Empirical { max_spread },
                0.0,
            ))
        }
        None => None,
    };
    let fit = match fit_window {
        Some(w) => Some(fit_decay_excluding(&kept, w, excluded)?),
        None => None,
    };
    Ok(LpDecay { theta, p, weighted, truncated, xnorm, series: kept, fit })
}

/// Samples `(t, |t|^s ||u(t)||_{X^{-s,2}}, ||u0||_{X^{s,2}})`.
///
/// The evolved field spreads across the inner radius of the partition; the
/// left side uses [`NormValue::upper`], which adds a bound for the clipped
/// small-scale terms.
pub fn check_local_mass(
    u0: &SampledField,
    sigma: f64,
    times: &[f64],
    partition: &DyadicPartition,
    max_spread: f64,
) -> Result<InequalityReport> {
    let d = u0.grid().dim() as f64;
    if !(sigma >= 0.0 && sigma < d / 2.0) {
        return Err(Error::InvalidParameter(format!("sigma = {sigma} must lie in [0, {})", d / 2.0)));
    }
    let disp = DispersionPolynomial::schrodinger(u0.grid().dim())?;
    require_shell_supported(u0, partition, "the datum")?;
    let rhs = x_norm(u0, sigma, 2.0, partition)?.value;
    let (kept, mut excluded) = sample_times(u0, &disp, times, |_, u| x_norm(u, -sigma, 2.0, partition))?;
    let mut samples = Vec::with_capacity(kept.len());
    for (t, v) in kept {
        let outer = v.truncation.map_or(0.0, |tr| tr.outer_fraction);
        if outer > TRUNCATION_TOL {
            excluded.push(Exclusion::SupportOverflow { t, outside: outer });
            continue;
        }
        samples.push(InequalitySample::new(t, t.abs().powf(sigma) * v.upper(), rhs));
    }
    let bound =
        if sigma == 0.0 { RatioBound::Explicit { bound: 2f64.sqrt() } } else { RatioBound::Empirical { max_spread } };
    Ok(InequalityReport::new(
        "local-mass",
        LOCAL_MASS_ANCHOR,
        samples,
        excluded,
        bound,
        if sigma == 0.0 { INEQUALITY_SLACK } else { 0.0 },
    ))
}
