use std::f64::consts::{FRAC_1_SQRT_2, PI};

use dispersive_core::fields::{AnalyticField, SampledField};
use dispersive_core::harness::airy::{
    airy_pointwise_rhs, DECAY_ANCHOR, LOCAL_ENERGY_ANCHOR, MONOMIAL_ANCHOR, POINTWISE_ANCHOR,
};
use dispersive_core::harness::{
    airy_decay_experiment, check_airy_local_energy, check_airy_pointwise, check_monomial_estimate,
};
use serde::{Deserialize, Serialize};

use super::{full_window, plain_gaussian, require_dim, require_real, sampled_datum, tol, unit_gaussian, NoParams};
use crate::catalog::Experiment;
use crate::config::{ExperimentConfig, TimeSection, DEFAULT_RATIO};
use crate::error::{LabError, LabResult};
use crate::report::{Check, Outcome, Series};

/// `exp(-x^2)`.
fn airy_gaussian() -> AnalyticField {
    AnalyticField::gaussian(&[0.0], FRAC_1_SQRT_2)
}

/// A real one-dimensional datum on the configured grid.
fn airy_datum(config: &ExperimentConfig) -> LabResult<SampledField> {
    require_dim(config, &[1])?;
    let (_, u0) = sampled_datum(config)?;
    require_real(&u0)?;
    Ok(u0)
}

fn forward_times(config: &ExperimentConfig) -> LabResult<Vec<f64>> {
    let times = config.times()?;
    if times[0] < 0.0 {
        return Err(LabError::config("time", "the Airy estimates hold forward in time"));
    }
    Ok(times)
}

/// `2 ||d u0|| ||x u0|| + ||u0||^2` for `exp(-(x - c)^2 / (2 w^2))` from its moments.
fn gaussian_pointwise_rhs(c: f64, w: f64) -> f64 {
    let mass = w * PI.sqrt();
    let du = (PI.sqrt() / (2.0 * w)).sqrt();
    let xu = (mass * (w * w / 2.0 + c * c)).sqrt();
    2.0 * du * xu + mass
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PointwiseParams {
    probe_min: f64,
    probe_max: f64,
    probe_count: usize,
}

impl PointwiseParams {
    fn probes(&self) -> Vec<f64> {
        let n = self.probe_count;
        if n == 1 {
            return vec![self.probe_min];
        }
        (0..n).map(|i| self.probe_min + (self.probe_max - self.probe_min) * i as f64 / (n - 1) as f64).collect()
    }
}

pub struct AiryPointwise;

impl Experiment for AiryPointwise {
    fn id(&self) -> &'static str {
        "airy-pointwise"
    }

    fn anchor(&self) -> &'static str {
        POINTWISE_ANCHOR
    }

    fn description(&self) -> &'static str {
        "pointwise Airy inequality on a probe grid, and the t^{-1/2} decay of d_x u on the right half-line"
    }

    fn default_config(&self) -> ExperimentConfig {
        ExperimentConfig::new(self.id())
            .with_grid(4096.0, 1 << 16)
            .with_datum(airy_gaussian())
            .with_time(
                TimeSection::geometric(2.0, 20.0, DEFAULT_RATIO)
                    .with_values(&[0.0, 0.5, 1.0, 5.0, 10.0, 20.0])
                    .with_window(2.0, 20.0),
            )
            .with_params(&PointwiseParams { probe_min: -50.0, probe_max: 50.0, probe_count: 1001 })
    }

    fn validate(&self, config: &ExperimentConfig) -> LabResult<()> {
        let p: PointwiseParams = config.params()?;
        if p.probe_count == 0 || !(p.probe_max >= p.probe_min) {
            return Err(LabError::config("params.probe_count", "need probes in a non-empty interval"));
        }
        let (lo, hi) = config.grid_section()?.grid()?.bounds(0);
        if p.probe_min < lo || p.probe_max >= hi {
            return Err(LabError::config("params.probe_min", "probes must lie in the box"));
        }
        forward_times(config)?;
        config.time_section()?.window()?;
        airy_datum(config).map(|_| ())
    }

    /// Tolerances: `slope` (0.1) for the derivative decay, `relative` (1e-10)
    /// for the right side against its Gaussian closed form.
    fn run(&self, config: &ExperimentConfig) -> LabResult<Outcome> {
        self.validate(config)?;
        let p: PointwiseParams = config.params()?;
        let u0 = airy_datum(config)?;
        let times = forward_times(config)?;
        let window = config.time_section()?.window()?.unwrap_or(full_window(&times));
        let mut o = Outcome::default();
        let rhs = airy_pointwise_rhs(&u0)?;
        if let Some((c, w)) = plain_gaussian(config.datum()?) {
            let exact = gaussian_pointwise_rhs(c[0], w);
            o.check(Check::at_most(
                "rhs-closed-form",
                (rhs / exact - 1.0).abs(),
                tol(config.tolerances.relative, 1e-10),
            ));
        }
        let report = check_airy_pointwise(&u0, &times, &p.probes())?;
        o.check(Check::holds("no-contaminated-samples", report.excluded.is_empty()));
        o.inequality(report);
        let positive: Vec<f64> = times.iter().copied().filter(|t| *t > 0.0).collect();
        let decay = airy_decay_experiment(&u0, &positive, window)?;
        o.check(Check::within(
            "right-derivative-slope",
            decay.right_derivative_fit.slope,
            -0.5,
            tol(config.tolerances.slope, 0.1),
        ));
        o.series(Series::values("right-derivative-sup", &decay.right_derivative_series));
        o.fit("right-derivative-sup", decay.right_derivative_fit);
        Ok(o)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LocalEnergyParams {
    eps: f64,
}

pub struct AiryLocalEnergy;

impl Experiment for AiryLocalEnergy {
    fn id(&self) -> &'static str {
        "airy-local-energy"
    }

    fn anchor(&self) -> &'static str {
        LOCAL_ENERGY_ANCHOR
    }

    fn description(&self) -> &'static str {
        "t-weighted local energy of d_x u against the data constant, with its decay fit"
    }

    fn default_config(&self) -> ExperimentConfig {
        ExperimentConfig::new(self.id())
            .with_grid(8192.0, 1 << 16)
            .with_datum(airy_gaussian())
            .with_time(TimeSection::geometric(1.0, 50.0, DEFAULT_RATIO).with_window(2.0, 50.0))
            .with_params(&LocalEnergyParams { eps: 0.5 })
    }

    fn validate(&self, config: &ExperimentConfig) -> LabResult<()> {
        let p: LocalEnergyParams = config.params()?;
        if !(p.eps > 0.0) {
            return Err(LabError::config("params.eps", "must be positive"));
        }
        forward_times(config)?;
        config.time_section()?.window()?;
        airy_datum(config).map(|_| ())
    }

    /// Tolerance `slope` (0.1): the energy series decays at least like `t^{-1+slope}`.
    fn run(&self, config: &ExperimentConfig) -> LabResult<Outcome> {
        self.validate(config)?;
        let p: LocalEnergyParams = config.params()?;
        let u0 = airy_datum(config)?;
        let times = forward_times(config)?;
        let window = config.time_section()?.window()?.unwrap_or(full_window(&times));
        let e = check_airy_local_energy(&u0, p.eps, &times, Some(window))?;
        let mut o = Outcome::default();
        let fit = e.fit.expect("window given");
        o.check(Check::at_most("energy-slope", fit.slope, -1.0 + tol(config.tolerances.slope, 0.1)));
        o.fit("weighted-energy", fit);
        o.series(Series::values("weighted-energy", &e.series));
        o.inequality(e.report);
        Ok(o)
    }
}

pub struct AiryDecay;

impl Experiment for AiryDecay {
    fn id(&self) -> &'static str {
        "airy-decay"
    }

    fn anchor(&self) -> &'static str {
        DECAY_ANCHOR
    }

    fn description(&self) -> &'static str {
        "t^{-1/3} decay of the Airy sup norm on samples free of wrap-around"
    }

    fn default_config(&self) -> ExperimentConfig {
        ExperimentConfig::new(self.id())
            .with_grid(1500.0, 1 << 15)
            .with_datum(airy_gaussian())
            .with_time(TimeSection::geometric(2.0, 20.0, DEFAULT_RATIO).with_values(&[20.0]).with_window(2.0, 20.0))
    }

    fn validate(&self, config: &ExperimentConfig) -> LabResult<()> {
        config.params::<NoParams>()?;
        if forward_times(config)?[0] <= 0.0 {
            return Err(LabError::config("time", "times must be positive"));
        }
        config.time_section()?.window()?;
        airy_datum(config).map(|_| ())
    }

    /// Tolerance `slope` (0.1).
    fn run(&self, config: &ExperimentConfig) -> LabResult<Outcome> {
        self.validate(config)?;
        let u0 = airy_datum(config)?;
        let times = forward_times(config)?;
        let window = config.time_section()?.window()?.unwrap_or(full_window(&times));
        let decay = airy_decay_experiment(&u0, &times, window)?;
        let mut o = Outcome::default();
        o.check(Check::within("sup-slope", decay.sup_fit.slope, -1.0 / 3.0, tol(config.tolerances.slope, 0.1)));
        o.check(Check::holds("scaled-ratio-finite", decay.max_scaled_ratio.is_finite()));
        o.series(Series::values("sup-norm", &decay.sup_series));
        o.series(Series::values("right-derivative-sup", &decay.right_derivative_series));
        o.fit("sup-norm", decay.sup_fit);
        o.fit("right-derivative-sup", decay.right_derivative_fit);
        Ok(o)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MonomialParams {
    ks: Vec<u32>,
}

pub struct Monomial2k;

impl Experiment for Monomial2k {
    fn id(&self) -> &'static str {
        "monomial-2k"
    }

    fn anchor(&self) -> &'static str {
        MONOMIAL_ANCHOR
    }

    fn description(&self) -> &'static str {
        "pointwise estimate for i d_t u + d^{2k} u = 0 from the commuting operator of order 2k - 1"
    }

    fn default_config(&self) -> ExperimentConfig {
        ExperimentConfig::new(self.id())
            .with_grid(4096.0, 1 << 15)
            .with_datum(unit_gaussian(1))
            .with_time(TimeSection::geometric(1.0, 20.0, DEFAULT_RATIO))
            .with_params(&MonomialParams { ks: vec![1, 2] })
    }

    fn validate(&self, config: &ExperimentConfig) -> LabResult<()> {
        let p: MonomialParams = config.params()?;
        if p.ks.is_empty() || p.ks.iter().any(|k| !(1..=2).contains(k)) {
            return Err(LabError::config("params.ks", "each k must be 1 or 2"));
        }
        require_dim(config, &[1])?;
        sampled_datum(config).map(|_| ())
    }

    /// Tolerance `max_spread` (2).
    fn run(&self, config: &ExperimentConfig) -> LabResult<Outcome> {
        self.validate(config)?;
        let p: MonomialParams = config.params()?;
        let (_, u0) = sampled_datum(config)?;
        let times = config.times()?;
        let mut o = Outcome::default();
        for &k in &p.ks {
            let r = check_monomial_estimate(k, &u0, &times, tol(config.tolerances.max_spread, 2.0))?;
            o.check(Check::holds(format!("no-contaminated-samples-k{k}"), r.excluded.is_empty()));
            o.inequality(r);
        }
        Ok(o)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_rhs_closed_form() {
        let v = gaussian_pointwise_rhs(0.0, FRAC_1_SQRT_2);
        assert!((v - 2.0 * (PI / 2.0).sqrt()).abs() < 1e-14);
    }
}
