//! The experiment trait and the registry that selects experiments by name.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::{LabError, LabResult};
use crate::report::Outcome;

pub trait Experiment: Send + Sync {
    /// Catalog name, the value of `experiment.id`.
    fn id(&self) -> &'static str;
    /// The statement the experiment checks.
    fn anchor(&self) -> &'static str;
    fn description(&self) -> &'static str;
    fn default_config(&self) -> ExperimentConfig;
    /// Everything that can be checked without running the experiment.
    fn validate(&self, config: &ExperimentConfig) -> LabResult<()>;
    fn run(&self, config: &ExperimentConfig) -> LabResult<Outcome>;
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CatalogEntry {
    pub id: &'static str,
    pub anchor: &'static str,
    pub description: &'static str,
}

pub struct Registry {
    entries: Vec<Box<dyn Experiment>>,
    by_id: BTreeMap<&'static str, usize>,
}

impl Registry {
    pub fn new() -> Self {
        Self { entries: Vec::new(), by_id: BTreeMap::new() }
    }

    /// Every built-in experiment, in catalog order.
    pub fn builtin() -> Self {
        let mut r = Self::new();
        for e in crate::experiments::builtin() {
            r.register(e);
        }
        r
    }

    /// Adds `e`; panics on a duplicate id, which is a programming error.
    pub fn register(&mut self, e: Box<dyn Experiment>) {
        let id = e.id();
        assert!(self.by_id.insert(id, self.entries.len()).is_none(), "duplicate experiment id {id}");
        self.entries.push(e);
    }

    pub fn get(&self, id: &str) -> Option<&dyn Experiment> {
        self.by_id.get(id).map(|&i| self.entries[i].as_ref())
    }

    /// The experiment named by `config`, or a configuration error at `experiment.id`.
    pub fn resolve(&self, config: &ExperimentConfig) -> LabResult<&dyn Experiment> {
        let id = &config.experiment.id;
        self.get(id).ok_or_else(|| {
            let known: Vec<&str> = self.entries.iter().map(|e| e.id()).collect();
            LabError::config("experiment.id", format!("unknown experiment `{id}`; known: {}", known.join(", ")))
        })
    }

    /// `config` completed from the experiment defaults: absent `grid`, `datum`
    /// and `time` sections and absent parameter keys take their default values.
    pub fn complete(&self, config: &ExperimentConfig) -> LabResult<ExperimentConfig> {
        let defaults = self.resolve(config)?.default_config();
        let mut c = config.clone();
        c.grid = c.grid.or(defaults.grid);
        c.datum = c.datum.or(defaults.datum);
        c.time = c.time.or(defaults.time);
        for (k, v) in defaults.params {
            c.params.entry(k).or_insert(v);
        }
        Ok(c)
    }

    /// Completes and validates `config`, returning the experiment with the
    /// configuration it will run.
    pub fn validate(&self, config: &ExperimentConfig) -> LabResult<(&dyn Experiment, ExperimentConfig)> {
        let e = self.resolve(config)?;
        let c = self.complete(config)?;
        e.validate(&c)?;
        Ok((e, c))
    }

    pub fn iter(&self) -> impl Iterator<Item = &dyn Experiment> {
        self.entries.iter().map(|e| e.as_ref())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn list(&self) -> Vec<CatalogEntry> {
        self.iter().map(|e| CatalogEntry { id: e.id(), anchor: e.anchor(), description: e.description() }).collect()
    }
}

impl Default for Registry {
    fn default() -> Self {
        Self::builtin()
    }
}
