use std::f64::consts::FRAC_1_SQRT_2;

use dispersive_core::fields::AnalyticField;
use dispersive_core::transport::{
    builtin_solutions, counterexample_profile, DispersionMap, SupOptions, TransportSolution, VelocityQuadrature,
};
use serde::{Deserialize, Serialize};

use super::{full_window, tol};
use crate::catalog::Experiment;
use crate::config::{ExperimentConfig, TimeSection};
use crate::error::{LabError, LabResult};
use crate::report::{Check, Outcome, Series};

/// Six samples per decade.
fn decade_ratio() -> f64 {
    10f64.powf(1.0 / 6.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DecayParams {
    map: DispersionMap,
    /// Cap on q-search nodes per axis.
    #[serde(default = "default_max_points")]
    max_points: usize,
    /// Trapezoid nodes per characteristic window.
    #[serde(default = "default_nodes")]
    nodes: usize,
}

fn default_max_points() -> usize {
    SupOptions::default().max_points
}

fn default_nodes() -> usize {
    VelocityQuadrature::DEFAULT_NODES
}

struct DecayPlan {
    sol: TransportSolution,
    times: Vec<f64>,
    window: (f64, f64),
    opts: SupOptions,
}

fn decay_plan(config: &ExperimentConfig, p: &DecayParams) -> LabResult<DecayPlan> {
    config.forbid("grid")?;
    let sol =
        TransportSolution::new(config.datum()?.clone(), p.map).map_err(|e| LabError::config("datum", e.to_string()))?;
    let times = config.times()?;
    if times[0] <= 0.0 {
        return Err(LabError::config("time", "decay times must be positive"));
    }
    let window = config.time_section()?.window()?.unwrap_or(full_window(&times));
    if p.max_points < 16 || p.nodes < 3 {
        return Err(LabError::config("params", "max_points >= 16 and nodes >= 3 are required"));
    }
    Ok(DecayPlan { sol, times, window, opts: SupOptions { max_points: p.max_points, nodes: p.nodes } })
}

fn run_decay(plan: &DecayPlan) -> LabResult<(Outcome, f64)> {
    let out = plan.sol.decay_experiment(&plan.times, plan.window, &plan.opts)?;
    let slope = out.fit.slope;
    let mut o = Outcome::default();
    o.series(Series::values("sup-velocity-average", &out.samples.iter().map(|s| (s.t, s.value)).collect::<Vec<_>>()));
    o.fit("sup-velocity-average", out.fit);
    Ok((o, slope))
}

fn full_rank(map: DispersionMap) -> bool {
    matches!(map, DispersionMap::Identity { .. } | DispersionMap::Relativistic { .. })
}

pub struct VlasovDecay;

impl Experiment for VlasovDecay {
    fn id(&self) -> &'static str {
        "vlasov-decay"
    }

    fn anchor(&self) -> &'static str {
        "velocity averages of free transport: sup_q nu_bar(t, q) <~ <t>^{-d} for a map with invertible Jacobian"
    }

    fn description(&self) -> &'static str {
        "fits the decay of sup_q of the velocity average against t^{-d}"
    }

    fn default_config(&self) -> ExperimentConfig {
        ExperimentConfig::new(self.id())
            .with_datum(AnalyticField::gaussian(&[0.0, 0.0], FRAC_1_SQRT_2))
            .with_time(TimeSection::geometric(10.0, 1e4, decade_ratio()))
            .with_params(&DecayParams {
                map: DispersionMap::Identity { d: 1 },
                max_points: default_max_points(),
                nodes: default_nodes(),
            })
    }

    fn validate(&self, config: &ExperimentConfig) -> LabResult<()> {
        let plan = decay_plan(config, &config.params()?)?;
        if !full_rank(plan.sol.map()) {
            return Err(LabError::config("params.map", "a degenerate map belongs to transport-degenerate"));
        }
        Ok(())
    }

    /// Tolerance `slope`: 0.02 in one dimension, 0.05 otherwise.
    fn run(&self, config: &ExperimentConfig) -> LabResult<Outcome> {
        self.validate(config)?;
        let plan = decay_plan(config, &config.params()?)?;
        let d = plan.sol.d();
        let (mut o, slope) = run_decay(&plan)?;
        let band = tol(config.tolerances.slope, if d == 1 { 0.02 } else { 0.05 });
        o.check(Check::within("slope", slope, -(d as f64), band));
        Ok(o)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DegenerateParams {
    map: DispersionMap,
    #[serde(default = "default_max_points")]
    max_points: usize,
    #[serde(default = "default_nodes")]
    nodes: usize,
    /// The fitted slope must not exceed this.
    max_slope: f64,
}

impl DegenerateParams {
    fn decay(&self) -> DecayParams {
        DecayParams { map: self.map, max_points: self.max_points, nodes: self.nodes }
    }
}

pub struct TransportDegenerate;

impl Experiment for TransportDegenerate {
    fn id(&self) -> &'static str {
        "transport-degenerate"
    }

    fn anchor(&self) -> &'static str {
        "decay for maps whose Jacobian loses rank: sup_q nu_bar(t, q) decays although w is not a diffeomorphism"
    }

    fn description(&self) -> &'static str {
        "decay fit of the velocity average for a rank-deficient velocity map"
    }

    fn default_config(&self) -> ExperimentConfig {
        ExperimentConfig::new(self.id())
            .with_datum(AnalyticField::ProductGaussianPhase { d: 2, q_width: 1.0, p_width: 1.0 })
            .with_time(TimeSection::geometric(10.0, 1e3, decade_ratio()))
            .with_params(&DegenerateParams {
                map: DispersionMap::MixedD2,
                max_points: default_max_points(),
                nodes: default_nodes(),
                max_slope: -1.0,
            })
    }

    fn validate(&self, config: &ExperimentConfig) -> LabResult<()> {
        let p: DegenerateParams = config.params()?;
        decay_plan(config, &p.decay()).map(|_| ())
    }

    fn run(&self, config: &ExperimentConfig) -> LabResult<Outcome> {
        let p: DegenerateParams = config.params()?;
        let (mut o, slope) = run_decay(&decay_plan(config, &p.decay())?)?;
        o.check(Check::at_most("slope", slope, p.max_slope));
        Ok(o)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CounterexampleParams {
    lambdas: Vec<f64>,
    /// Required lower bound on `nu_bar(lambda, 0)`.
    floor: f64,
    /// Exponent `a` of the growing ratio `nu_bar(lambda, 0) <lambda>^a`.
    growth_exponent: f64,
    /// Allowed `(max - min) / min` of the `W^{1,1}` norms.
    max_w11_variation: f64,
}

pub struct Counterexample;

impl Counterexample {
    fn params(config: &ExperimentConfig) -> LabResult<CounterexampleParams> {
        for s in ["grid", "datum", "time"] {
            config.forbid(s)?;
        }
        let p: CounterexampleParams = config.params()?;
        if p.lambdas.len() < 2 || p.lambdas.iter().any(|l| !(*l >= 1.0 && l.is_finite())) {
            return Err(LabError::config("params.lambdas", "need at least two scales, each >= 1"));
        }
        if p.lambdas.windows(2).any(|w| w[1] <= w[0]) {
            return Err(LabError::config("params.lambdas", "scales must increase"));
        }
        Ok(p)
    }
}

impl Experiment for Counterexample {
    fn id(&self) -> &'static str {
        "counterexample"
    }

    fn anchor(&self) -> &'static str {
        "lower bound for w(p) = p^2: nu_bar(lambda, 0) >= c > 0 for the bumps lambda phi(lambda q, lambda p), whose W^{1,1} norm stays bounded"
    }

    fn description(&self) -> &'static str {
        "velocity average at the critical point for concentrated bumps under w(p) = p^2, at t = lambda"
    }

    fn default_config(&self) -> ExperimentConfig {
        ExperimentConfig::new(self.id()).with_params(&CounterexampleParams {
            lambdas: vec![4.0, 16.0, 64.0],
            floor: 0.78,
            growth_exponent: 0.1,
            max_w11_variation: 0.1,
        })
    }

    fn validate(&self, config: &ExperimentConfig) -> LabResult<()> {
        Self::params(config).map(|_| ())
    }

    fn run(&self, config: &ExperimentConfig) -> LabResult<Outcome> {
        let p = Self::params(config)?;
        let mut o = Outcome::default();
        let mut records = Vec::new();
        for &lambda in &p.lambdas {
            let r = counterexample_profile(lambda, lambda)?;
            o.check(Check::at_least(format!("nu-bar-floor-lambda-{lambda}"), r.nu_bar_at_origin, p.floor));
            o.check(Check::at_least(
                format!("nu-bar-over-closed-form-lambda-{lambda}"),
                r.nu_bar_at_origin / r.lower_bound,
                1.0,
            ));
            records.push(r);
        }
        let ratio: Vec<(f64, f64)> = records
            .iter()
            .map(|r| (r.lambda, r.nu_bar_at_origin * (1.0 + r.lambda * r.lambda).sqrt().powf(p.growth_exponent)))
            .collect();
        o.check(Check::holds("growth-ratio-increasing", ratio.windows(2).all(|w| w[1].1 > w[0].1)));
        let norms: Vec<f64> = records.iter().map(|r| r.w11.norm).collect();
        let lo = norms.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = norms.iter().copied().fold(0.0, f64::max);
        o.check(Check::at_most("w11-variation", (hi - lo) / lo, p.max_w11_variation));
        // rows are keyed by lambda, which is also the sample time
        o.series(Series::values("nu-bar", &records.iter().map(|r| (r.t, r.nu_bar_at_origin)).collect::<Vec<_>>()));
        o.series(Series::values(
            "closed-form-bound",
            &records.iter().map(|r| (r.t, r.lower_bound)).collect::<Vec<_>>(),
        ));
        o.series(Series::values("growth-ratio", &ratio));
        o.series(Series::values("w11-norm", &records.iter().map(|r| (r.t, r.w11.norm)).collect::<Vec<_>>()));
        Ok(o)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConservationParams {
    /// Grid cells per datum length scale.
    cells_per_scale: f64,
    max_points: usize,
    /// Names of built-in cases; all when empty.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    cases: Vec<String>,
}

type Functional = fn(&[f64], f64) -> f64;

const FUNCTIONALS: [(&str, Functional); 3] =
    [("mass", |_, v| v), ("l2", |_, v| v * v), ("kinetic", |p, v| p.iter().map(|x| x * x).sum::<f64>() * v)];

pub struct Conservation;

/// Parameters, the selected named cases, and the sample times.
type ConservationPlan = (ConservationParams, Vec<(&'static str, TransportSolution)>, Vec<f64>);

impl Conservation {
    fn plan(config: &ExperimentConfig) -> LabResult<ConservationPlan> {
        config.forbid("grid")?;
        config.forbid("datum")?;
        let p: ConservationParams = config.params()?;
        let all = builtin_solutions();
        for c in &p.cases {
            if !all.iter().any(|(n, _)| n == c) {
                let names: Vec<&str> = all.iter().map(|(n, _)| *n).collect();
                return Err(LabError::config(
                    "params.cases",
                    format!("unknown case `{c}`; known: {}", names.join(", ")),
                ));
            }
        }
        let cases = all.into_iter().filter(|(n, _)| p.cases.is_empty() || p.cases.iter().any(|c| c == n)).collect();
        let times = config.times()?;
        if times[0] < 0.0 {
            return Err(LabError::config("time", "times must be non-negative"));
        }
        if !(p.cells_per_scale > 0.0) || p.max_points < 16 {
            return Err(LabError::config("params", "cells_per_scale > 0 and max_points >= 16 are required"));
        }
        Ok((p, cases, times))
    }
}

impl Experiment for Conservation {
    fn id(&self) -> &'static str {
        "conservation"
    }

    fn anchor(&self) -> &'static str {
        "conserved functionals: int F(p, nu(t, q, p)) dq dp is constant in time when it is well defined"
    }

    fn description(&self) -> &'static str {
        "mass, L^2 and kinetic energy of every built-in transport datum across time"
    }

    fn default_config(&self) -> ExperimentConfig {
        ExperimentConfig::new(self.id())
            .with_time(TimeSection::explicit(&[0.0, 1.0, 2.0, 5.0, 10.0]))
            .with_params(&ConservationParams { cells_per_scale: 3.0, max_points: 1 << 16, cases: Vec::new() })
    }

    fn validate(&self, config: &ExperimentConfig) -> LabResult<()> {
        Self::plan(config).map(|_| ())
    }

    /// Tolerance `relative`: 1e-8 on the relative spread of each functional.
    fn run(&self, config: &ExperimentConfig) -> LabResult<Outcome> {
        let (p, cases, times) = Self::plan(config)?;
        let limit = tol(config.tolerances.relative, 1e-8);
        let t_max = times[times.len() - 1];
        let mut o = Outcome::default();
        for (name, sol) in cases {
            let grid = sol.covering_phase_grid(t_max, p.cells_per_scale, p.max_points)?;
            for (fname, f) in FUNCTIONALS {
                let values = times
                    .iter()
                    .map(|t| Ok((*t, sol.conserved_functional(f, *t, &grid)?)))
                    .collect::<LabResult<Vec<(f64, f64)>>>()?;
                let v0 = values[0].1;
                let spread = values.iter().map(|(_, v)| (v - v0).abs()).fold(0.0, f64::max) / v0.abs();
                o.check(Check::at_most(format!("{name}/{fname}"), spread, limit));
                o.series(Series::values(format!("{name}/{fname}"), &values));
            }
        }
        Ok(o)
    }
}
