//! Experiment catalog, configuration, execution and report emission for the
//! dispersive-decay laboratory.
//!
//! An experiment is selected by the `experiment.id` key of a TOML
//! configuration, validated against the [`catalog::Registry`], executed by
//! [`runner::execute`] and written out as `report.json` plus `samples.csv`.

pub mod catalog;
pub mod cli;
pub mod config;
pub mod error;
pub mod experiments;
pub mod report;
pub mod runner;

pub use catalog::{Experiment, Registry};
pub use config::ExperimentConfig;
pub use error::{LabError, LabResult};
pub use report::{Outcome, Report};
pub use runner::{execute, run_to_dir, Execution};
