use dispersive_core::fields::{sample, AnalyticField, Coverage};
use dispersive_core::harness::schrodinger::multi_indices;
use dispersive_core::harness::{
    check_dispersive_schrodinger, check_ks_schrodinger_series, check_local_mass, check_lp_decay, fit_decay_excluding,
    Exclusion, InequalityReport, InequalitySample, RatioBound,
};
use dispersive_core::norms::{hs_norm, translated_xnorm_inf, ShiftSearch};
use dispersive_core::spectral::{guard_fraction, DispersionPolynomial, Evolution, GUARD_THRESHOLD};
use dispersive_core::symmetry::{conserved_operator_norm, CommutingOperator};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{plain_gaussian, require_dim, required_partition, sampled_datum, tol, unit_gaussian, NoParams};
use crate::catalog::Experiment;
use crate::config::{ExperimentConfig, TimeSection, DEFAULT_RATIO};
use crate::error::{LabError, LabResult};
use crate::report::{Check, Outcome, Row, Series};

/// Largest relative deviation of the values from the first one.
fn relative_spread(values: &[(f64, f64)]) -> f64 {
    let v0 = values[0].1;
    values.iter().map(|(_, v)| (v - v0).abs()).fold(0.0, f64::max) / v0.abs()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DecayParams {
    /// Sobolev orders whose norms must be conserved.
    sobolev: Vec<f64>,
    /// Relative tolerance of the closed-form Gaussian modulus.
    oracle_tolerance: f64,
}

pub struct SchrodingerDecay;

impl Experiment for SchrodingerDecay {
    fn id(&self) -> &'static str {
        "schrodinger-decay"
    }

    fn anchor(&self) -> &'static str {
        "free Schrodinger flow: unitary, conserves H^s, and |t|^{d/2} ||u(t)||_inf stays bounded"
    }

    fn description(&self) -> &'static str {
        "propagator against the closed-form Gaussian, conservation laws and the t^{-d/2} sup-norm decay"
    }

    fn default_config(&self) -> ExperimentConfig {
        ExperimentConfig::new(self.id())
            .with_grid(2048.0, 1 << 16)
            .with_datum(unit_gaussian(1))
            .with_time(
                TimeSection::geometric(5.0, 50.0, DEFAULT_RATIO).with_values(&[1.0, 25.0]).with_window(5.0, 50.0),
            )
            .with_params(&DecayParams { sobolev: vec![0.25, 0.5, 1.0], oracle_tolerance: 1e-8 })
    }

    fn validate(&self, config: &ExperimentConfig) -> LabResult<()> {
        require_dim(config, &[1, 2])?;
        let p: DecayParams = config.params()?;
        if p.sobolev.iter().any(|s| !(*s >= 0.0)) {
            return Err(LabError::config("params.sobolev", "orders must be non-negative"));
        }
        config.time_section()?.window()?;
        if config.times()?[0] <= 0.0 {
            return Err(LabError::config("time", "times must be positive"));
        }
        sampled_datum(config).map(|_| ())
    }

    /// Tolerances: `relative` (1e-12) for unitarity and `H^s`, `slope` (0.03).
    fn run(&self, config: &ExperimentConfig) -> LabResult<Outcome> {
        self.validate(config)?;
        let p: DecayParams = config.params()?;
        let (grid, u0) = sampled_datum(config)?;
        let d = grid.dim();
        let times = config.times()?;
        let window = config.time_section()?.window()?.unwrap_or(super::full_window(&times));
        let identity_tol = tol(config.tolerances.relative, 1e-12);
        let ev = Evolution::new(&u0, &DispersionPolynomial::schrodinger(d)?)?;
        let m0 = u0.l2_norm();
        let hs0: Vec<f64> = p.sobolev.iter().map(|s| hs_norm(&u0, *s).value).collect();
        let oracle = plain_gaussian(config.datum()?).filter(|_| d == 1);
        // node nearest to the center, where the modulus peaks
        let centre_index = oracle.as_ref().map(|(c, _)| {
            let (lo, _) = grid.bounds(0);
            (((c[0] - lo) / grid.spacing(0)).round() as usize).min(grid.points()[0] - 1)
        });

        struct Sample {
            t: f64,
            guard: f64,
            sup: f64,
            mass: f64,
            hs: Vec<f64>,
            centre: Option<f64>,
        }
        let samples: Vec<Sample> = times
            .par_iter()
            .map(|&t| {
                let u = ev.at(t);
                Sample {
                    t,
                    guard: guard_fraction(&u),
                    sup: u.max_abs(),
                    mass: u.l2_norm(),
                    hs: p.sobolev.iter().map(|s| hs_norm(&u, *s).value).collect(),
                    centre: centre_index.map(|i| u.values()[i].norm()),
                }
            })
            .collect();

        let mut o = Outcome::default();
        let mut excluded = Vec::new();
        let mut sup = Vec::new();
        let mut unitarity: f64 = 0.0;
        let mut hs_dev = vec![0.0f64; p.sobolev.len()];
        let mut oracle_dev: f64 = 0.0;
        for s in &samples {
            if s.guard >= GUARD_THRESHOLD {
                excluded.push(Exclusion::Contaminated { t: s.t, guard_fraction: s.guard });
                continue;
            }
            sup.push((s.t, s.sup));
            unitarity = unitarity.max((s.mass / m0 - 1.0).abs());
            for (dev, (a, b)) in hs_dev.iter_mut().zip(hs0.iter().zip(&s.hs)) {
                *dev = dev.max((b / a - 1.0).abs());
            }
            if let (Some((c, w)), Some(i), Some(v)) = (&oracle, centre_index, s.centre) {
                let a = 1.0 + 4.0 * s.t * s.t / w.powi(4);
                let x = grid.coord(0, i) - c[0];
                let exact = a.powf(-0.25) * (-x * x / (2.0 * w * w * a)).exp();
                oracle_dev = oracle_dev.max((v / exact - 1.0).abs());
            }
        }
        o.check(Check::at_most("unitarity", unitarity, identity_tol));
        for (s, dev) in p.sobolev.iter().zip(&hs_dev) {
            o.check(Check::at_most(format!("hs-conservation-s-{s}"), *dev, identity_tol));
        }
        if oracle.is_some() {
            o.check(Check::at_most("gaussian-modulus-oracle", oracle_dev, p.oracle_tolerance));
        }
        let fit = fit_decay_excluding(&sup, window, excluded)?;
        o.check(Check::within("sup-slope", fit.slope, -(d as f64) / 2.0, tol(config.tolerances.slope, 0.03)));
        o.fit("sup-norm", fit);
        o.series(Series::values("sup-norm", &sup));
        if oracle.is_some() {
            let centre: Vec<(f64, f64)> = samples.iter().filter_map(|s| s.centre.map(|v| (s.t, v))).collect();
            o.series(Series::values("modulus-at-center", &centre));
        }
        Ok(o)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct KsParams {
    /// Largest total order of the boost words checked for conservation.
    word_order: u32,
}

pub struct SchrodingerKs;

impl Experiment for SchrodingerKs {
    fn id(&self) -> &'static str {
        "schrodinger-ks"
    }

    fn anchor(&self) -> &'static str {
        dispersive_core::harness::schrodinger::KS_ANCHOR
    }

    fn description(&self) -> &'static str {
        "Klainerman-Sobolev inequality with boost norms, and conservation of ||W^a u(t)||"
    }

    fn default_config(&self) -> ExperimentConfig {
        ExperimentConfig::new(self.id())
            .with_grid(2048.0, 1 << 14)
            .with_datum(unit_gaussian(1))
            .with_time(TimeSection::geometric(1.0, 100.0, DEFAULT_RATIO))
            .with_params(&KsParams { word_order: 2 })
    }

    fn validate(&self, config: &ExperimentConfig) -> LabResult<()> {
        require_dim(config, &[1, 2])?;
        let p: KsParams = config.params()?;
        if !(1..=4).contains(&p.word_order) {
            return Err(LabError::config("params.word_order", "must lie in 1..=4"));
        }
        sampled_datum(config).map(|_| ())
    }

    /// Tolerances: `max_spread` (2) of the empirical constant, `relative`
    /// (1e-9) for conserved word norms.
    fn run(&self, config: &ExperimentConfig) -> LabResult<Outcome> {
        self.validate(config)?;
        let p: KsParams = config.params()?;
        let (grid, u0) = sampled_datum(config)?;
        let times = config.times()?;
        let (report, _) = check_ks_schrodinger_series(&u0, &times, tol(config.tolerances.max_spread, 2.0))?;
        let mut o = Outcome::default();
        let kept: Vec<f64> = report.samples.iter().map(|s| s.t).collect();
        o.inequality(report);

        let disp = DispersionPolynomial::schrodinger(grid.dim())?;
        let mut word_times = vec![0.0];
        word_times.extend_from_slice(&kept);
        let limit = tol(config.tolerances.relative, 1e-9);
        let words: Vec<Vec<u32>> =
            multi_indices(grid.dim(), p.word_order).into_iter().filter(|a| a.iter().sum::<u32>() > 0).collect();
        let norms = words
            .par_iter()
            .map(|alpha| {
                let word: Vec<CommutingOperator> = alpha
                    .iter()
                    .enumerate()
                    .flat_map(|(axis, &n)| {
                        std::iter::repeat_n(CommutingOperator::SchrodingerBoost { axis }, n as usize)
                    })
                    .collect();
                conserved_operator_norm(&u0, &word, &disp, &word_times)
            })
            .collect::<Result<Vec<_>, _>>()?;
        for (alpha, series) in words.iter().zip(norms) {
            let label = alpha.iter().map(|a| a.to_string()).collect::<Vec<_>>().join("-");
            o.check(Check::at_most(format!("word-norm-conserved-{label}"), relative_spread(&series), limit));
            o.series(Series::values(format!("word-norm-{label}"), &series));
        }
        Ok(o)
    }
}

pub struct SchrodingerXnorm;

impl Experiment for SchrodingerXnorm {
    fn id(&self) -> &'static str {
        "schrodinger-xnorm"
    }

    fn anchor(&self) -> &'static str {
        dispersive_core::harness::schrodinger::DISPERSIVE_ANCHOR
    }

    fn description(&self) -> &'static str {
        "dispersive estimate with the dyadic X^{d/2,1} norm of shell-supported data on the right"
    }

    fn default_config(&self) -> ExperimentConfig {
        ExperimentConfig::new(self.id())
            .with_grid(4096.0, 1 << 17)
            .with_partition(-2, 4)
            .with_datum(AnalyticField::gaussian(&[2.0], 0.25))
            .with_time(TimeSection::geometric(1.0, 100.0, DEFAULT_RATIO))
    }

    fn validate(&self, config: &ExperimentConfig) -> LabResult<()> {
        require_dim(config, &[1, 2])?;
        config.params::<NoParams>()?;
        let (grid, _) = sampled_datum(config)?;
        required_partition(config, &grid).map(|_| ())
    }

    /// Tolerance `max_spread` (2).
    fn run(&self, config: &ExperimentConfig) -> LabResult<Outcome> {
        self.validate(config)?;
        let (grid, u0) = sampled_datum(config)?;
        let part = required_partition(config, &grid)?;
        let report = check_dispersive_schrodinger(&u0, &config.times()?, &part, tol(config.tolerances.max_spread, 2.0))
            .map_err(|e| match e {
                dispersive_core::Error::InvalidParameter(m) => LabError::config("datum", m),
                other => other.into(),
            })?;
        let mut o = Outcome::default();
        o.inequality(report);
        Ok(o)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LpParams {
    thetas: Vec<f64>,
}

pub struct LpDecay;

impl Experiment for LpDecay {
    fn id(&self) -> &'static str {
        "lp-decay"
    }

    fn anchor(&self) -> &'static str {
        dispersive_core::harness::schrodinger::LP_ANCHOR
    }

    fn description(&self) -> &'static str {
        "L^p decay at rate t^{-theta d/2}, p = 2/(1-theta), against weighted and Sobolev norms of the data"
    }

    fn default_config(&self) -> ExperimentConfig {
        ExperimentConfig::new(self.id())
            .with_grid(2048.0, 1 << 14)
            .with_datum(unit_gaussian(1))
            .with_time(TimeSection::geometric(5.0, 50.0, DEFAULT_RATIO).with_window(5.0, 50.0))
            .with_params(&LpParams { thetas: vec![0.0, 0.5] })
    }

    fn validate(&self, config: &ExperimentConfig) -> LabResult<()> {
        require_dim(config, &[1])?;
        let p: LpParams = config.params()?;
        if p.thetas.is_empty() || p.thetas.iter().any(|t| !(0.0..1.0).contains(t)) {
            return Err(LabError::config("params.thetas", "each theta must lie in [0, 1)"));
        }
        config.time_section()?.window()?;
        let (grid, _) = sampled_datum(config)?;
        config.grid_section()?.partition(&grid).map(|_| ())
    }

    /// Tolerances: `slope` (0.05), `max_spread` (2), `relative` (1e-12) for
    /// the ratio at theta = 0.
    fn run(&self, config: &ExperimentConfig) -> LabResult<Outcome> {
        self.validate(config)?;
        let p: LpParams = config.params()?;
        let (grid, u0) = sampled_datum(config)?;
        let part = config.grid_section()?.partition(&grid)?;
        let times = config.times()?;
        let window = config.time_section()?.window()?.unwrap_or(super::full_window(&times));
        let spread = tol(config.tolerances.max_spread, 2.0);
        let mut o = Outcome::default();
        for &theta in &p.thetas {
            let r = check_lp_decay(&u0, theta, &times, part.as_ref(), Some(window), spread)?;
            if theta == 0.0 {
                let dev = r.weighted.samples.iter().map(|s| (s.ratio() - 1.0).abs()).fold(0.0, f64::max);
                o.check(Check::at_most("theta-0-ratio-is-one", dev, tol(config.tolerances.relative, 1e-12)));
            } else {
                let fit = r.fit.clone().expect("window given");
                let target = -theta * grid.dim() as f64 / 2.0;
                o.check(Check::within(
                    format!("slope-theta-{theta}"),
                    fit.slope,
                    target,
                    tol(config.tolerances.slope, 0.05),
                ));
                o.fit(format!("lp-norm-theta-{theta}"), fit);
            }
            o.series(Series::values(format!("lp-norm-theta-{theta}"), &r.series));
            let mut reports = vec![r.weighted, r.truncated];
            reports.extend(r.xnorm);
            for mut rep in reports {
                rep.name = format!("{}-theta-{theta}", rep.name);
                o.inequality(rep);
            }
        }
        Ok(o)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LocalMassParams {
    sigmas: Vec<f64>,
}

pub struct LocalMass;

impl Experiment for LocalMass {
    fn id(&self) -> &'static str {
        "local-mass"
    }

    fn anchor(&self) -> &'static str {
        dispersive_core::harness::schrodinger::LOCAL_MASS_ANCHOR
    }

    fn description(&self) -> &'static str {
        "local mass decay in the dyadic X^{-s,2} norm for shell-supported data"
    }

    fn default_config(&self) -> ExperimentConfig {
        ExperimentConfig::new(self.id())
            .with_grid(4096.0, 1 << 15)
            .with_partition(0, 11)
            .with_datum(AnalyticField::gaussian(&[8.0], 1.0))
            .with_time(TimeSection::geometric(1.0, 100.0, DEFAULT_RATIO))
            .with_params(&LocalMassParams { sigmas: vec![0.0, 0.25] })
    }

    fn validate(&self, config: &ExperimentConfig) -> LabResult<()> {
        require_dim(config, &[1])?;
        let p: LocalMassParams = config.params()?;
        if p.sigmas.is_empty() || p.sigmas.iter().any(|s| !(0.0..0.5).contains(s)) {
            return Err(LabError::config("params.sigmas", "each sigma must lie in [0, d/2)"));
        }
        let (grid, _) = sampled_datum(config)?;
        required_partition(config, &grid).map(|_| ())
    }

    /// Tolerance `max_spread` (2). At `s = 0` the ratio is also held to the
    /// overlap sandwich `[2^{-1/2}, 2^{1/2}]`.
    fn run(&self, config: &ExperimentConfig) -> LabResult<Outcome> {
        self.validate(config)?;
        let p: LocalMassParams = config.params()?;
        let (grid, u0) = sampled_datum(config)?;
        let part = required_partition(config, &grid)?;
        let times = config.times()?;
        let mut o = Outcome::default();
        for &sigma in &p.sigmas {
            let mut r = check_local_mass(&u0, sigma, &times, &part, tol(config.tolerances.max_spread, 2.0)).map_err(
                |e| match e {
                    dispersive_core::Error::InvalidParameter(m) => LabError::config("datum", m),
                    other => other.into(),
                },
            )?;
            if sigma == 0.0 {
                let lo = r.samples.iter().map(InequalitySample::ratio).fold(f64::INFINITY, f64::min);
                o.check(Check::at_least("sandwich-lower-sigma-0", lo, 0.5f64.sqrt() - 1e-9));
                o.check(Check::at_most("sandwich-upper-sigma-0", r.max_ratio, 2f64.sqrt() + 1e-9));
            }
            o.check(Check::holds(format!("samples-kept-sigma-{sigma}"), !r.samples.is_empty()));
            r.name = format!("local-mass-sigma-{sigma}");
            o.inequality(r);
        }
        Ok(o)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CubeParams {
    centers: Vec<f64>,
    side: f64,
    theta: f64,
    q: f64,
    search_radius: f64,
    coarse_step: f64,
    levels: u32,
    refine: u32,
    /// Required `untranslated / translated` at the farthest center.
    min_gain: f64,
}

pub struct CubeTranslation;

impl CubeTranslation {
    fn search(p: &CubeParams) -> ShiftSearch {
        ShiftSearch { radius: p.search_radius, coarse_step: p.coarse_step, levels: p.levels, refine: p.refine }
    }
}

impl Experiment for CubeTranslation {
    fn id(&self) -> &'static str {
        "cube-translation"
    }

    fn anchor(&self) -> &'static str {
        "translation-invariant X norm: inf_y ||tau_y 1_Q||_{X^{d/2,1}} <= C ||1_Q||_{L^1} for every unit cube Q"
    }

    fn description(&self) -> &'static str {
        "translated X-norm of unit cube indicators at several centers against their L^1 norm"
    }

    fn default_config(&self) -> ExperimentConfig {
        ExperimentConfig::new(self.id()).with_grid(64.0, 8192).with_partition(-4, 4).with_params(&CubeParams {
            centers: vec![0.0, 3.0, 10.0],
            side: 1.0,
            theta: 0.5,
            q: 1.0,
            search_radius: 16.0,
            coarse_step: 1.0,
            levels: 3,
            refine: 4,
            min_gain: 2.0,
        })
    }

    fn validate(&self, config: &ExperimentConfig) -> LabResult<()> {
        config.forbid("datum")?;
        config.forbid("time")?;
        let p: CubeParams = config.params()?;
        if p.centers.is_empty() || !(p.side > 0.0) {
            return Err(LabError::config("params.centers", "need at least one cube of positive side"));
        }
        if !(p.search_radius >= 0.0 && p.coarse_step > 0.0 && p.refine >= 2) {
            return Err(LabError::config("params.search_radius", "invalid shift search"));
        }
        let g = config.grid_section()?;
        if g.dim != 1 {
            return Err(LabError::config("grid.dim", "cubes are one-dimensional here"));
        }
        required_partition(config, &g.grid()?).map(|_| ())
    }

    /// Tolerance `max_spread` (2) of the ratios across centers.
    fn run(&self, config: &ExperimentConfig) -> LabResult<Outcome> {
        self.validate(config)?;
        let p: CubeParams = config.params()?;
        let grid = config.grid_section()?.grid()?;
        let part = required_partition(config, &grid)?;
        let mut samples = Vec::new();
        let mut untranslated = Vec::new();
        for &c in &p.centers {
            let cube = AnalyticField::CubeIndicator { center: vec![c], side: p.side };
            let f = sample(&cube, &grid, Coverage::Enforce)
                .map_err(|e| LabError::config("params.centers", e.to_string()))?;
            let l1 = cube.l1_norm().expect("cubes have a closed-form L1 norm");
            let t = translated_xnorm_inf(&f, p.theta, p.q, &part, &Self::search(&p))?;
            samples.push(InequalitySample::at(0.0, c, t.norm.upper(), l1));
            untranslated.push(Row::sides(0.0, Some(c), t.at_zero, l1));
        }
        let far = samples
            .iter()
            .zip(&untranslated)
            .max_by(|a, b| a.0.x.unwrap().abs().total_cmp(&b.0.x.unwrap().abs()))
            .expect("centers are non-empty");
        let gain = far.1.lhs.unwrap() / far.0.lhs;
        let mut o = Outcome::default();
        o.check(Check::at_least("untranslated-gain-at-farthest-center", gain, p.min_gain));
        o.inequality(InequalityReport::new(
            "cube-translation",
            self.anchor(),
            samples,
            Vec::new(),
            RatioBound::Empirical { max_spread: tol(config.tolerances.max_spread, 2.0) },
            0.0,
        ));
        o.series(Series { name: "cube-untranslated".into(), rows: untranslated });
        Ok(o)
    }
}
