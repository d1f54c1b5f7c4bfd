//! Experiment configuration: a TOML document with one table per concern.
//!
//! ```toml
//! [experiment]
//! id = "airy-decay"
//! seed = 0
//!
//! [grid]
//! half_width = 1500.0
//! points = 32768
//!
//! [datum]
//! family = "gaussian"
//! center = [0.0]
//! widths = [0.7071067811865476]
//! modulation = [0.0]
//!
//! [time]
//! start = 2.0
//! end = 20.0
//! ratio = 1.4142135623730951
//! values = [20.0]
//! window = [2.0, 20.0]
//! ```

use std::path::PathBuf;

use dispersive_core::fields::{AnalyticField, GridSpec};
use dispersive_core::harness::fit::MIN_FIT_SAMPLES;
use dispersive_core::harness::geometric_times;
use dispersive_core::norms::DyadicPartition;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, LabResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub datum: Option<AnalyticField>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time: Option<TimeSection>,
    #[serde(default, skip_serializing_if = "Tolerances::is_empty")]
    pub tolerances: Tolerances,
    /// Experiment-specific keys, checked by the experiment itself.
    #[serde(default, skip_serializing_if = "toml::Table::is_empty")]
    pub params: toml::Table,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub id: String,
    /// Seed for randomly drawn data.
    #[serde(default)]
    pub seed: u64,
    /// Output directory; the command line flag takes precedence.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

/// A periodic box `[-half_width, half_width)^dim` with `points` nodes per axis,
/// optionally with a dyadic partition `k_min..=k_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub half_width: f64,
    pub points: usize,
    #[serde(default = "one", skip_serializing_if = "is_one")]
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_min: Option<i32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_max: Option<i32>,
}

fn one() -> usize {
    1
}

fn is_one(d: &usize) -> bool {
    *d == 1
}

impl GridSection {
    pub fn grid(&self) -> LabResult<GridSpec> {
        if !(1..=2).contains(&self.dim) {
            return Err(LabError::config("grid.dim", format!("{} is not 1 or 2", self.dim)));
        }
        GridSpec::symmetric_nd(&vec![self.half_width; self.dim], &vec![self.points; self.dim])
            .map_err(|e| LabError::config("grid", e.to_string()))
    }

    pub fn partition(&self, grid: &GridSpec) -> LabResult<Option<DyadicPartition>> {
        match (self.k_min, self.k_max) {
            (None, None) => Ok(None),
            (Some(a), Some(b)) => {
                DyadicPartition::build(grid, a, b).map(Some).map_err(|e| LabError::config("grid.k_min", e.to_string()))
            }
            _ => Err(LabError::config("grid.k_max", "k_min and k_max go together")),
        }
    }
}

/// Sample times: the geometric sequence `start * ratio^k <= end` together
/// with the explicit `values`, sorted and deduplicated. `window` restricts
/// decay fits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub end: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratio: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<[f64; 2]>,
}

/// Default ratio of consecutive sample times.
pub const DEFAULT_RATIO: f64 = std::f64::consts::SQRT_2;

impl TimeSection {
    pub fn geometric(start: f64, end: f64, ratio: f64) -> Self {
        Self { start: Some(start), end: Some(end), ratio: Some(ratio), values: Vec::new(), window: None }
    }

    pub fn explicit(values: &[f64]) -> Self {
        Self { start: None, end: None, ratio: None, values: values.to_vec(), window: None }
    }

    pub fn with_values(mut self, values: &[f64]) -> Self {
        self.values = values.to_vec();
        self
    }

    pub fn with_window(mut self, lo: f64, hi: f64) -> Self {
        self.window = Some([lo, hi]);
        self
    }

    pub fn times(&self) -> LabResult<Vec<f64>> {
        let mut out = match (self.start, self.end) {
            (Some(a), Some(b)) => {
                let r = self.ratio.unwrap_or(DEFAULT_RATIO);
                if !(a > 0.0 && b >= a && a.is_finite() && b.is_finite()) {
                    return Err(LabError::config("time.start", format!("need 0 < start <= end, got {a}, {b}")));
                }
                if !(r > 1.0 && r.is_finite()) {
                    return Err(LabError::config("time.ratio", format!("{r} must exceed 1")));
                }
                geometric_times(a, b, r)
            }
            (None, None) => {
                if self.ratio.is_some() {
                    return Err(LabError::config("time.ratio", "a ratio needs start and end"));
                }
                Vec::new()
            }
            _ => return Err(LabError::config("time.end", "start and end go together")),
        };
        if let Some(bad) = self.values.iter().find(|v| !v.is_finite()) {
            return Err(LabError::config("time.values", format!("{bad} is not finite")));
        }
        out.extend_from_slice(&self.values);
        out.sort_by(f64::total_cmp);
        out.dedup();
        if out.is_empty() {
            return Err(LabError::config("time", "no sample times"));
        }
        Ok(out)
    }

    /// The fit window, checked to hold enough sample times.
    pub fn window(&self) -> LabResult<Option<(f64, f64)>> {
        let Some([lo, hi]) = self.window else {
            return Ok(None);
        };
        if !(lo > 0.0 && hi >= lo) {
            return Err(LabError::config("time.window", format!("need 0 < lo <= hi, got [{lo}, {hi}]")));
        }
        let inside = self.times()?.iter().filter(|t| **t >= lo && **t <= hi).count();
        if inside < MIN_FIT_SAMPLES {
            return Err(LabError::config(
                "time.window",
                format!("{inside} sample times in [{lo}, {hi}], a fit needs {MIN_FIT_SAMPLES}"),
            ));
        }
        Ok(Some((lo, hi)))
    }
}

/// Overrides of the pass/fail tolerances. Each experiment documents which it
/// reads; absent keys fall back to the experiment's defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Half-width of the accepted band around a target decay exponent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slope: Option<f64>,
    /// Relative error allowed in identities and oracle comparisons.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relative: Option<f64>,
    /// Allowed max/min spread of empirical constants.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_spread: Option<f64>,
    /// Absolute slack in inequalities with explicit constants.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slack: Option<f64>,
    /// Commutation residual ceiling.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
    /// Residual floor that a perturbed operator must exceed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perturbed: Option<f64>,
}

impl Tolerances {
    pub fn is_empty(&self) -> bool {
        *self == Tolerances::default()
    }
}

impl ExperimentConfig {
    pub fn new(id: &str) -> Self {
        Self {
            experiment: ExperimentSection { id: id.to_string(), seed: 0, out: None },
            grid: None,
            datum: None,
            time: None,
            tolerances: Tolerances::default(),
            params: toml::Table::new(),
        }
    }

    pub fn with_grid(mut self, half_width: f64, points: usize) -> Self {
        self.grid = Some(GridSection { half_width, points, dim: 1, k_min: None, k_max: None });
        self
    }

    pub fn with_partition(mut self, k_min: i32, k_max: i32) -> Self {
        let g = self.grid.as_mut().expect("partition needs a grid");
        g.k_min = Some(k_min);
        g.k_max = Some(k_max);
        self
    }

    pub fn with_datum(mut self, datum: AnalyticField) -> Self {
        self.datum = Some(datum);
        self
    }

    pub fn with_time(mut self, time: TimeSection) -> Self {
        self.time = Some(time);
        self
    }

    pub fn with_params<P: Serialize>(mut self, params: &P) -> Self {
        self.params = toml::Table::try_from(params).expect("parameters serialize to a table");
        self
    }

    pub fn grid_section(&self) -> LabResult<&GridSection> {
        self.grid.as_ref().ok_or_else(|| LabError::config("grid", "missing section"))
    }

    pub fn datum(&self) -> LabResult<&AnalyticField> {
        self.datum.as_ref().ok_or_else(|| LabError::config("datum", "missing section"))
    }

    pub fn time_section(&self) -> LabResult<&TimeSection> {
        self.time.as_ref().ok_or_else(|| LabError::config("time", "missing section"))
    }

    pub fn times(&self) -> LabResult<Vec<f64>> {
        self.time_section()?.times()
    }

    /// Rejects a section the experiment does not read.
    pub fn forbid(&self, section: &str) -> LabResult<()> {
        let present = match section {
            "grid" => self.grid.is_some(),
            "datum" => self.datum.is_some(),
            "time" => self.time.is_some(),
            _ => false,
        };
        if present {
            return Err(LabError::config(section, "this experiment does not read this section"));
        }
        Ok(())
    }

    /// Parses `[params]` into the experiment's own parameter type.
    pub fn params<P: DeserializeOwned>(&self) -> LabResult<P> {
        let value = toml::Value::Table(self.params.clone());
        serde_path_to_error::deserialize(value).map_err(|e| {
            let inner = e.path().to_string();
            let path = if inner == "." { "params".to_string() } else { format!("params.{inner}") };
            LabError::config(path, e.into_inner().to_string())
        })
    }

    pub fn parse(text: &str) -> LabResult<Self> {
        let de = toml::Deserializer::parse(text).map_err(|e| LabError::config("<document>", e.to_string()))?;
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            LabError::config(path, e.into_inner().message().to_string())
        })
    }

    pub fn emit(&self) -> String {
        toml::to_string(self).expect("configurations serialize")
    }

    pub fn load(path: &std::path::Path) -> LabResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LabError::config("<file>", format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }
}
