//! The built-in catalog.

mod airy;
mod commutation;
mod schrodinger;
mod transport;

use dispersive_core::fields::{sample, AnalyticField, Coverage, GridSpec, SampledField};
use dispersive_core::norms::DyadicPartition;
use serde::{Deserialize, Serialize};

use crate::catalog::Experiment;
use crate::config::ExperimentConfig;
use crate::error::{LabError, LabResult};

pub fn builtin() -> Vec<Box<dyn Experiment>> {
    vec![
        Box::new(transport::VlasovDecay),
        Box::new(transport::TransportDegenerate),
        Box::new(transport::Counterexample),
        Box::new(transport::Conservation),
        Box::new(schrodinger::SchrodingerDecay),
        Box::new(schrodinger::SchrodingerKs),
        Box::new(schrodinger::SchrodingerXnorm),
        Box::new(schrodinger::LpDecay),
        Box::new(schrodinger::LocalMass),
        Box::new(schrodinger::CubeTranslation),
        Box::new(airy::AiryPointwise),
        Box::new(airy::AiryLocalEnergy),
        Box::new(airy::AiryDecay),
        Box::new(airy::Monomial2k),
        Box::new(commutation::CommutationSuite),
    ]
}

/// For experiments without parameters.
#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NoParams {}

/// The datum sampled on the configured grid.
fn sampled_datum(config: &ExperimentConfig) -> LabResult<(GridSpec, SampledField)> {
    let grid = config.grid_section()?.grid()?;
    let u0 = sample(config.datum()?, &grid, Coverage::Enforce).map_err(|e| LabError::config("datum", e.to_string()))?;
    Ok((grid, u0))
}

fn required_partition(config: &ExperimentConfig, grid: &GridSpec) -> LabResult<DyadicPartition> {
    config
        .grid_section()?
        .partition(grid)?
        .ok_or_else(|| LabError::config("grid.k_min", "this experiment needs a dyadic partition"))
}

fn require_real(u0: &SampledField) -> LabResult<()> {
    if !u0.is_real() {
        return Err(LabError::config("datum", "the datum must be real"));
    }
    Ok(())
}

fn require_dim(config: &ExperimentConfig, dims: &[usize]) -> LabResult<()> {
    let d = config.grid_section()?.dim;
    if !dims.contains(&d) {
        return Err(LabError::config("grid.dim", format!("{d} is not supported here")));
    }
    let datum = config.datum()?;
    if datum.dim() != d {
        return Err(LabError::config("datum", format!("a {}-d datum on a {d}-d grid", datum.dim())));
    }
    Ok(())
}

/// `exp(-|x|^2 / 2)` in `d` dimensions.
fn unit_gaussian(d: usize) -> AnalyticField {
    AnalyticField::gaussian(&vec![0.0; d], 1.0)
}

/// Center and width of an unmodulated isotropic Gaussian.
fn plain_gaussian(datum: &AnalyticField) -> Option<(Vec<f64>, f64)> {
    match datum {
        AnalyticField::Gaussian { center, widths, modulation }
            if modulation.iter().all(|k| *k == 0.0) && widths.iter().all(|w| *w == widths[0]) =>
        {
            Some((center.clone(), widths[0]))
        }
        _ => None,
    }
}

/// `[lo, hi]` covering `times`, the default decay-fit window.
fn full_window(times: &[f64]) -> (f64, f64) {
    (times[0], times[times.len() - 1])
}

fn tol(v: Option<f64>, default: f64) -> f64 {
    v.unwrap_or(default)
}
