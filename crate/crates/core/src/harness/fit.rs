use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MIN_FIT_SAMPLES: usize = 5;

/// Why a time sample was left out of a fit or an inequality report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "kebab-case")]
pub enum Exclusion {
    /// Too much of the solution reached the edge of the periodic box.
    Contaminated {
        t: f64,
        guard_fraction: f64,
    },
    /// The datum or the evolved density did not fit in the grid.
    SupportOverflow {
        t: f64,
        outside: f64,
    },
    OutsideWindow {
        t: f64,
    },
}

impl Exclusion {
    pub fn t(&self) -> f64 {
        match self {
            Exclusion::Contaminated { t, .. }
            | Exclusion::SupportOverflow { t, .. }
            | Exclusion::OutsideWindow { t } => *t,
        }
    }
}

/// Least-squares power law `value ~ exp(intercept) * t^slope`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub slope: f64,
    pub intercept: f64,
    /// Largest `|log value - fitted|` over the samples used.
    pub max_abs_residual: f64,
    /// First and last time actually used.
    pub window: (f64, f64),
    pub samples_used: usize,
    pub excluded: Vec<Exclusion>,
}

/// Fits `log value` against `log t` over the samples with `t` in `window`.
///
/// Samples outside the window are listed as exclusions. Times must be strictly
/// increasing and every value inside the window positive.
pub fn fit_decay(series: &[(f64, f64)], window: (f64, f64)) -> Result<DecayFit> {
    fit_decay_excluding(series, window, Vec::new())
}

/// [`fit_decay`] carrying exclusions decided upstream (contaminated samples).
pub fn fit_decay_excluding(
    series: &[(f64, f64)],
    window: (f64, f64),
    mut excluded: Vec<Exclusion>,
) -> Result<DecayFit> {
    if series.windows(2).any(|w| !(w[1].0 > w[0].0)) {
        return Err(Error::InvalidSeries("times must be strictly increasing".into()));
    }
    let mut xs = Vec::with_capacity(series.len());
    let mut ys = Vec::with_capacity(series.len());
    let mut used = Vec::with_capacity(series.len());
    for &(t, v) in series {
        if t < window.0 || t > window.1 {
            excluded.push(Exclusion::OutsideWindow { t });
            continue;
        }
        if !(t > 0.0) {
            return Err(Error::NonPositive { t, value: t });
        }
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::NonPositive { t, value: v });
        }
        xs.push(t.ln());
        ys.push(v.ln());
        used.push(t);
    }
    if xs.len() < MIN_FIT_SAMPLES {
        return Err(Error::InsufficientWindow { found: xs.len(), required: MIN_FIT_SAMPLES });
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(&ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let max_abs_residual = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).abs()).fold(0.0, f64::max);
    excluded.sort_by(|a, b| a.t().total_cmp(&b.t()));
    Ok(DecayFit {
        slope,
        intercept,
        max_abs_residual,
        window: (used[0], used[used.len() - 1]),
        samples_used: xs.len(),
        excluded,
    })
}

/// The times `start * ratio^k` that do not exceed `end`.
pub fn geometric_times(start: f64, end: f64, ratio: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let steps = ((end / start).ln() / ratio.ln() + 1e-9).floor() as i32;
    for k in 0..=steps {
        out.push(start * ratio.powi(k));
    }
    out
}

/// `count >= 2` logarithmically spaced times including both endpoints.
pub fn log_spaced(start: f64, end: f64, count: usize) -> Vec<f64> {
    let step = (end / start).ln() / (count - 1) as f64;
    let mut out: Vec<f64> = (0..count).map(|k| start * (k as f64 * step).exp()).collect();
    out[count - 1] = end;
    out
}
