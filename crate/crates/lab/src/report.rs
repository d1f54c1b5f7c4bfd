//! What an experiment produces and how it is written to disk.

use std::path::{Path, PathBuf};

use dispersive_core::fields::bump;
use dispersive_core::harness::{DecayFit, InequalityReport};
use dispersive_core::norms::PARTITION_PROFILE_ID;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::{LabError, LabResult};

pub const SCHEMA_VERSION: u32 = 1;
pub const REPORT_FILE: &str = "report.json";
pub const SAMPLES_FILE: &str = "samples.csv";

/// How a measured value is judged.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Criterion {
    Within {
        target: f64,
        tolerance: f64,
    },
    AtMost {
        bound: f64,
    },
    AtLeast {
        bound: f64,
    },
    /// A yes/no property; `value` is 1 when it holds.
    Holds,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub criterion: Criterion,
    pub pass: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, value: f64, criterion: Criterion) -> Self {
        let pass = match criterion {
            Criterion::Within { target, tolerance } => (value - target).abs() <= tolerance,
            Criterion::AtMost { bound } => value <= bound,
            Criterion::AtLeast { bound } => value >= bound,
            Criterion::Holds => value == 1.0,
        };
        Self { name: name.into(), value, criterion, pass }
    }

    pub fn within(name: impl Into<String>, value: f64, target: f64, tolerance: f64) -> Self {
        Self::new(name, value, Criterion::Within { target, tolerance })
    }

    pub fn at_most(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self::new(name, value, Criterion::AtMost { bound })
    }

    pub fn at_least(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self::new(name, value, Criterion::AtLeast { bound })
    }

    pub fn holds(name: impl Into<String>, ok: bool) -> Self {
        Self::new(name, if ok { 1.0 } else { 0.0 }, Criterion::Holds)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedFit {
    pub name: String,
    pub fit: DecayFit,
}

/// One row of the samples table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub t: f64,
    pub x: Option<f64>,
    pub value: Option<f64>,
    pub lhs: Option<f64>,
    pub rhs: Option<f64>,
}

impl Row {
    pub fn value(t: f64, value: f64) -> Self {
        Self { t, x: None, value: Some(value), lhs: None, rhs: None }
    }

    pub fn sides(t: f64, x: Option<f64>, lhs: f64, rhs: f64) -> Self {
        Self { t, x, value: None, lhs: Some(lhs), rhs: Some(rhs) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub name: String,
    pub rows: Vec<Row>,
}

impl Series {
    pub fn values(name: impl Into<String>, points: &[(f64, f64)]) -> Self {
        Self { name: name.into(), rows: points.iter().map(|&(t, v)| Row::value(t, v)).collect() }
    }

    pub fn from_report(report: &InequalityReport) -> Self {
        Self {
            name: report.name.clone(),
            rows: report.samples.iter().map(|s| Row::sides(s.t, s.x, s.lhs, s.rhs)).collect(),
        }
    }
}

/// The result of running one experiment.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub checks: Vec<Check>,
    pub fits: Vec<NamedFit>,
    pub inequalities: Vec<InequalityReport>,
    /// Written to the samples table, not to the report.
    #[serde(skip)]
    pub series: Vec<Series>,
}

impl Outcome {
    pub fn check(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn fit(&mut self, name: impl Into<String>, fit: DecayFit) {
        self.fits.push(NamedFit { name: name.into(), fit });
    }

    /// Adds the report and its samples.
    pub fn inequality(&mut self, report: InequalityReport) {
        self.series.push(Series::from_report(&report));
        self.inequalities.push(report);
    }

    pub fn series(&mut self, s: Series) {
        self.series.push(s);
    }

    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass) && self.inequalities.iter().all(|r| r.pass)
    }

    pub fn failures(&self) -> Vec<String> {
        let mut out: Vec<String> = self.checks.iter().filter(|c| !c.pass).map(|c| c.name.clone()).collect();
        out.extend(self.inequalities.iter().filter(|r| !r.pass).map(|r| r.name.clone()));
        out
    }

    pub fn find_check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn find_fit(&self, name: &str) -> Option<&DecayFit> {
        self.fits.iter().find(|f| f.name == name).map(|f| &f.fit)
    }

    pub fn find_inequality(&self, name: &str) -> Option<&InequalityReport> {
        self.inequalities.iter().find(|r| r.name == name)
    }

    /// The samples table as CSV text.
    pub fn samples_csv(&self) -> LabResult<String> {
        #[derive(Serialize)]
        struct Line<'a> {
            series: &'a str,
            t: f64,
            x: Option<f64>,
            value: Option<f64>,
            lhs: Option<f64>,
            rhs: Option<f64>,
            ratio: Option<f64>,
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        for s in &self.series {
            for r in &s.rows {
                let ratio = match (r.lhs, r.rhs) {
                    (Some(l), Some(h)) => Some(dispersive_core::harness::InequalitySample::new(r.t, l, h).ratio()),
                    _ => None,
                };
                w.serialize(Line { series: &s.name, t: r.t, x: r.x, value: r.value, lhs: r.lhs, rhs: r.rhs, ratio })
                    .map_err(|e| LabError::Serialize(e.to_string()))?;
            }
        }
        let bytes = w.into_inner().map_err(|e| LabError::Serialize(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| LabError::Serialize(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileIds {
    pub bump: String,
    pub partition: String,
}

impl Default for ProfileIds {
    fn default() -> Self {
        Self { bump: bump::PROFILE_ID.to_string(), partition: PARTITION_PROFILE_ID.to_string() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    Error,
}

/// The document written to `report.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub tool_version: String,
    pub experiment: String,
    pub anchor: String,
    pub description: String,
    pub config: ExperimentConfig,
    pub profiles: ProfileIds,
    pub threads: usize,
    pub wall_clock_seconds: f64,
    pub status: Status,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub failures: Vec<String>,
    pub checks: Vec<Check>,
    pub fits: Vec<NamedFit>,
    pub inequalities: Vec<InequalityReport>,
    pub samples_file: String,
}

/// Where the files of one run go.
pub fn run_dir(out: &Path, id: &str) -> PathBuf {
    out.join(id)
}

/// Writes `report.json` and `samples.csv` into `dir`.
pub fn write_files(dir: &Path, report: &Report, samples_csv: &str) -> LabResult<()> {
    std::fs::create_dir_all(dir)?;
    let json = serde_json::to_string_pretty(report).map_err(|e| LabError::Serialize(e.to_string()))?;
    std::fs::write(dir.join(REPORT_FILE), json + "\n")?;
    std::fs::write(dir.join(SAMPLES_FILE), samples_csv)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn checks_judge_their_values() {
        assert!(Check::within("a", -0.99, -1.0, 0.02).pass);
        assert!(!Check::within("a", -0.95, -1.0, 0.02).pass);
        assert!(Check::at_most("b", 1.0, 1.0).pass);
        assert!(!Check::at_least("c", 0.5, 0.78).pass);
        assert!(Check::holds("d", true).pass && !Check::holds("d", false).pass);
        assert!(!Check::within("nan", f64::NAN, 0.0, 1.0).pass);
    }

    #[test]
    fn samples_table_layout() {
        let mut o = Outcome::default();
        o.series(Series::values("sup", &[(1.0, 0.5), (2.0, 0.25)]));
        o.series(Series { name: "ineq".into(), rows: vec![Row::sides(1.0, Some(-0.5), 1.0, 2.0)] });
        let csv = o.samples_csv().unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "series,t,x,value,lhs,rhs,ratio");
        assert_eq!(lines[1], "sup,1.0,,0.5,,,");
        assert_eq!(lines[3], "ineq,1.0,-0.5,,1.0,2.0,0.5");
    }
}
