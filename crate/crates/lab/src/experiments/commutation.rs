use dispersive_core::fields::{sample, AnalyticField, Coverage};
use dispersive_core::spectral::DispersionPolynomial;
use dispersive_core::symmetry::{commutation_residual, derive_commuting_operator};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tol;
use crate::catalog::Experiment;
use crate::config::{ExperimentConfig, TimeSection};
use crate::error::{LabError, LabResult};
use crate::report::{Check, Outcome, Row, Series};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SuiteParams {
    /// Degrees `m` of the dispersion polynomials.
    orders: Vec<u32>,
    /// Number of random wave packets.
    count: usize,
    center: [f64; 2],
    width: [f64; 2],
    modulation: [f64; 2],
    /// Factor applied to the time coefficient of the perturbed operator.
    perturbation: f64,
}

/// The equation of degree `m`: Schrodinger, Airy, or `i d_t u + d^m u = 0` for even `m >= 4`.
fn equation(m: u32) -> LabResult<DispersionPolynomial> {
    let d = match m {
        2 => DispersionPolynomial::schrodinger(1),
        3 => Ok(DispersionPolynomial::airy()),
        m if m % 2 == 0 && m <= 6 => DispersionPolynomial::even_order(m / 2),
        _ => return Err(LabError::config("params.orders", format!("no built-in equation of degree {m}"))),
    };
    d.map_err(|e| LabError::config("params.orders", e.to_string()))
}

fn check_range(name: &str, r: [f64; 2], positive: bool) -> LabResult<()> {
    if !(r[0] <= r[1] && r[0].is_finite() && r[1].is_finite()) || (positive && !(r[0] > 0.0)) {
        return Err(LabError::config(format!("params.{name}"), format!("invalid range {r:?}")));
    }
    Ok(())
}

pub struct CommutationSuite;

impl CommutationSuite {
    fn params(config: &ExperimentConfig) -> LabResult<SuiteParams> {
        config.forbid("datum")?;
        let p: SuiteParams = config.params()?;
        if p.orders.is_empty() || p.count == 0 {
            return Err(LabError::config("params.count", "need at least one order and one packet"));
        }
        for &m in &p.orders {
            equation(m)?;
        }
        check_range("center", p.center, false)?;
        check_range("width", p.width, true)?;
        check_range("modulation", p.modulation, false)?;
        if !(p.perturbation > 0.0 && p.perturbation != 1.0) {
            return Err(LabError::config("params.perturbation", "must be positive and differ from 1"));
        }
        if config.grid_section()?.dim != 1 {
            return Err(LabError::config("grid.dim", "the suite is one-dimensional"));
        }
        config.grid_section()?.grid()?;
        config.times()?;
        Ok(p)
    }
}

impl Experiment for CommutationSuite {
    fn id(&self) -> &'static str {
        "commutation-suite"
    }

    fn anchor(&self) -> &'static str {
        "commuting vector fields: tangent fields of the characteristic surface tau + P(xi) = 0 give W = a t d^{m-1} + b x with [i d_t + P(i d), W] = 0"
    }

    fn description(&self) -> &'static str {
        "derived commuting operators against the flow on random wave packets, and their perturbations"
    }

    fn default_config(&self) -> ExperimentConfig {
        let mut c = ExperimentConfig::new(self.id())
            .with_grid(8000.0, 1 << 16)
            .with_time(TimeSection::explicit(&[0.1, 1.0, 10.0]))
            .with_params(&SuiteParams {
                orders: vec![2, 3, 4],
                count: 20,
                center: [-5.0, 5.0],
                width: [1.5, 3.0],
                modulation: [-1.0, 1.0],
                perturbation: 1.1,
            });
        c.experiment.seed = 7;
        c
    }

    fn validate(&self, config: &ExperimentConfig) -> LabResult<()> {
        Self::params(config).map(|_| ())
    }

    /// Tolerances: `residual` (1e-9) and `perturbed` (1e-3).
    fn run(&self, config: &ExperimentConfig) -> LabResult<Outcome> {
        let p = Self::params(config)?;
        let grid = config.grid_section()?.grid()?;
        let times = config.times()?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.experiment.seed);
        let packets: Vec<AnalyticField> = (0..p.count)
            .map(|_| {
                let c = rng.gen_range(p.center[0]..=p.center[1]);
                let w = rng.gen_range(p.width[0]..=p.width[1]);
                let k = rng.gen_range(p.modulation[0]..=p.modulation[1]);
                AnalyticField::gaussian_modulated(&[c], w, &[k])
            })
            .collect();
        let data = packets
            .iter()
            .map(|d| sample(d, &grid, Coverage::Enforce).map_err(|e| LabError::config("grid", e.to_string())))
            .collect::<LabResult<Vec<_>>>()?;
        let ceiling = tol(config.tolerances.residual, 1e-9);
        let floor = tol(config.tolerances.perturbed, 1e-3);
        let mut o = Outcome::default();
        for &m in &p.orders {
            let disp = equation(m)?;
            let op = derive_commuting_operator(&disp)?;
            let bad = op.perturbed(p.perturbation);
            let jobs: Vec<(usize, f64)> = (0..data.len()).flat_map(|i| times.iter().map(move |t| (i, *t))).collect();
            let residuals = jobs
                .par_iter()
                .map(|&(i, t)| {
                    let r = commutation_residual(&op, &disp, &data[i], t)?;
                    let q = commutation_residual(&bad, &disp, &data[i], t)?;
                    Ok((t, r.value, q.value))
                })
                .collect::<LabResult<Vec<_>>>()?;
            let worst = residuals.iter().map(|r| r.1).fold(0.0, f64::max);
            let weakest = residuals.iter().map(|r| r.2).fold(f64::INFINITY, f64::min);
            o.check(Check::at_most(format!("residual-m{m}"), worst, ceiling));
            o.check(Check::at_least(format!("perturbed-residual-m{m}"), weakest, floor));
            let (n, _, _) = op.coefficients();
            o.check(Check::within(format!("operator-order-m{m}"), n as f64, f64::from(m - 1), 0.0));
            o.series(Series {
                name: format!("residual-m{m}"),
                rows: residuals.iter().map(|&(t, r, _)| Row::value(t, r)).collect(),
            });
            o.series(Series {
                name: format!("perturbed-residual-m{m}"),
                rows: residuals.iter().map(|&(t, _, q)| Row::value(t, q)).collect(),
            });
        }
        Ok(o)
    }
}
