//! Command-line front end for the `aptest` engine: TOML scenario files,
//! built-in presets and CSV output.

pub mod config;
pub mod output;
pub mod presets;
pub mod run;

use std::path::PathBuf;

use aptest::calibration::Mode;
use clap::{Parser, ValueEnum};

pub use config::{load_config, parse_config, ResolvedScenario, ScenarioConfig};
pub use run::{run, RunManifest, RunOutcome};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

impl From<aptest::Error> for CliError {
    fn from(e: aptest::Error) -> Self {
        if e.is_configuration() {
            CliError::Config(e.to_string())
        } else {
            CliError::Numerical(e.to_string())
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Nominal,
    Calibrated,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Nominal => Mode::Nominal,
            ModeArg::Calibrated => Mode::Calibrated,
        }
    }
}

/// Simulate response-adaptive trials and evaluate allocation-probability tests.
#[derive(Debug, Clone, Parser)]
#[command(name = "aptest", version)]
pub struct Cli {
    /// TOML file with one or more [[scenario]] tables.
    #[arg(long, conflicts_with = "preset", required_unless_present_any = ["preset", "list_presets"])]
    pub config: Option<PathBuf>,
    /// Built-in scenario, e.g. phase3 or phase3-desk.
    #[arg(long)]
    pub preset: Option<String>,
    /// Print the preset names and exit.
    #[arg(long)]
    pub list_presets: bool,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub replicates_eval: Option<u64>,
    #[arg(long)]
    pub replicates_calib: Option<u64>,
    /// Worker threads; defaults to one per core.
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
    #[arg(long, env = "APTEST_OUT", default_value = "results")]
    pub out: PathBuf,
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    /// Write this many null-model trajectories per design.
    #[arg(long)]
    pub dump_trajectories: Option<u64>,
    /// Print the resolved scenarios as JSON and exit without simulating.
    #[arg(long)]
    pub dry_run: bool,
}

impl Cli {
    fn apply_overrides(&self, s: &mut ScenarioConfig) {
        if let Some(v) = self.seed {
            s.seed = v;
        }
        if let Some(v) = self.alpha {
            s.alpha = v;
        }
        if let Some(v) = self.replicates_eval {
            s.replicates_eval = v;
        }
        if let Some(v) = self.replicates_calib {
            s.replicates_calib = v;
        }
        if let Some(m) = self.mode {
            s.mode = m.into();
        }
        if let Some(v) = self.dump_trajectories {
            s.dump_trajectories = v;
        }
    }

    /// Reads the scenarios, applies flag overrides and validates them.
    pub fn manifest(&self) -> Result<RunManifest, CliError> {
        let mut tables = match (&self.config, &self.preset) {
            (Some(path), _) => config::read_tables(path)?,
            (None, Some(name)) => vec![presets::preset_table(name).ok_or_else(|| {
                CliError::Config(format!(
                    "unknown preset `{name}`; choose one of {} (optionally with -desk)",
                    presets::PRESET_NAMES.join(", ")
                ))
            })?],
            (None, None) => return Err(CliError::Config("give --config or --preset".into())),
        };
        for t in &mut tables {
            self.apply_overrides(t);
        }
        let scenarios = config::resolve_all(&tables).map_err(|e| match (&self.config, e) {
            (Some(p), CliError::Config(msg)) => CliError::Config(format!("{}: {msg}", p.display())),
            (_, e) => e,
        })?;
        Ok(RunManifest {
            config_path: self.config.clone(),
            preset: self.preset.clone(),
            scenarios,
            threads: self.threads,
            out_dir: self.out.clone(),
        })
    }
}
