//! Command line interface.

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::catalog::Registry;
use crate::config::ExperimentConfig;
use crate::error::{exit, LabError, LabResult};
use crate::runner::{resolve_out, run_to_dir, OUT_ENV};

#[derive(Debug, Parser)]
#[command(name = "dispersive-lab", version, about = "Numerical experiments on dispersive decay estimates")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one experiment and write report.json and samples.csv.
    Run {
        /// TOML configuration file.
        #[arg(long, conflicts_with = "experiment", required_unless_present = "experiment")]
        config: Option<PathBuf>,
        /// Run the built-in defaults of this experiment instead of a file.
        #[arg(long)]
        experiment: Option<String>,
        /// Output directory; overrides `experiment.out` and the environment.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (0 uses all cores).
        #[arg(long, default_value_t = 0)]
        threads: usize,
    },
    /// List the catalog.
    List {
        /// Print JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
    /// Check a configuration without running it.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Print the default configuration of an experiment as TOML.
    Defaults { id: String },
}

/// Runs the parsed command, writing human output to `stdout` and errors to
/// `stderr`. Returns the process exit status.
pub fn dispatch(cli: Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let registry = Registry::builtin();
    match execute(&registry, cli.command, stdout) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

fn execute(registry: &Registry, command: Command, stdout: &mut dyn Write) -> LabResult<i32> {
    match command {
        Command::Run { config, experiment, out, threads } => {
            let config = match (config, experiment) {
                (Some(path), _) => ExperimentConfig::load(&path)?,
                (None, Some(id)) => defaults(registry, &id)?,
                (None, None) => unreachable!("clap requires one of them"),
            };
            let env = std::env::var(OUT_ENV).ok();
            let out = resolve_out(out.as_deref(), &config, env.as_deref());
            let (dir, execution, code) = run_to_dir(registry, &config, &out, threads)?;
            let r = &execution.report;
            writeln!(
                stdout,
                "{}: {:?} ({:.2} s, {} threads)",
                r.experiment, r.status, r.wall_clock_seconds, r.threads
            )?;
            for c in &r.checks {
                writeln!(stdout, "  {} {} = {}", if c.pass { "ok  " } else { "FAIL" }, c.name, c.value)?;
            }
            if let Some(e) = &r.error {
                writeln!(stdout, "  error: {e}")?;
            }
            writeln!(stdout, "wrote {}", dir.display())?;
            Ok(code)
        }
        Command::List { json } => {
            let entries = registry.list();
            if json {
                let text = serde_json::to_string_pretty(&entries).map_err(|e| LabError::Serialize(e.to_string()))?;
                writeln!(stdout, "{text}")?;
            } else {
                let width = entries.iter().map(|e| e.id.len()).max().unwrap_or(0);
                for e in entries {
                    writeln!(stdout, "{:width$}  {}", e.id, e.description)?;
                }
            }
            Ok(exit::PASS)
        }
        Command::Validate { config } => {
            let config = ExperimentConfig::load(&config)?;
            let (e, _) = registry.validate(&config)?;
            writeln!(stdout, "{}: configuration is valid", e.id())?;
            Ok(exit::PASS)
        }
        Command::Defaults { id } => {
            write!(stdout, "{}", defaults(registry, &id)?.emit())?;
            Ok(exit::PASS)
        }
    }
}

fn defaults(registry: &Registry, id: &str) -> LabResult<ExperimentConfig> {
    registry.resolve(&ExperimentConfig::new(id)).map(|e| e.default_config())
}
