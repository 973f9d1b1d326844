//! Built-in scenarios for the six simulation studies. Each name also has a
//! `-desk` variant with 10^5 calibration and 10^4 evaluation replicates.

use aptest::calibration::{Mode, DEFAULT_CALIBRATION_REPLICATES};
use aptest::harness::{DEFAULT_EVALUATION_REPLICATES, DEFAULT_LARGE_SAMPLE_GRID};

use crate::config::{DesignName, FamilyName, ResolvedScenario, ScenarioConfig, SweepKind};
use crate::CliError;

pub const PRESET_NAMES: [&str; 6] = [
    "phase2",
    "phase3",
    "type1-curve",
    "large-sample",
    "empirical-exponential",
    "empirical-binary",
];

pub const DESK_CALIBRATION_REPLICATES: u64 = 100_000;
pub const DESK_EVALUATION_REPLICATES: u64 = 10_000;
pub const DEFAULT_SEED: u64 = 20_250_101;

const LAMBDA_GRID: [f64; 5] = [1.2, 1.4, 1.6, 1.8, 2.0];

fn strings(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

fn base(name: &str) -> ScenarioConfig {
    ScenarioConfig {
        name: name.to_string(),
        family: FamilyName::Exponential,
        direction: None,
        total_n: 100,
        burn_in: 10,
        block_size: 1,
        t_min: 1,
        designs: vec![DesignName::StandardBrar, DesignName::TunedBrar],
        alpha: 0.05,
        mode: Mode::Calibrated,
        control: 1.0,
        alternatives: LAMBDA_GRID.to_vec(),
        sd: None,
        prior: None,
        tests: strings(&["original", "timedirect", "lastblock", "lr"]),
        custom_tests: Vec::new(),
        er_comparator: Some("lr".into()),
        permuted_block_size: 8,
        replicates_eval: DEFAULT_EVALUATION_REPLICATES,
        replicates_calib: DEFAULT_CALIBRATION_REPLICATES,
        seed: DEFAULT_SEED,
        sizes: Vec::new(),
        sweep: None,
        null_sweep: Vec::new(),
        figure: None,
        dump_trajectories: 0,
    }
}

fn preset_config(name: &str) -> Option<ScenarioConfig> {
    let mut s = base(name);
    match name {
        "phase2" => {
            s.alpha = 0.10;
            s.mode = Mode::Nominal;
            s.figure = Some("fig1".into());
        }
        "phase3" => {
            s.total_n = 500;
            s.burn_in = 50;
            s.block_size = 10;
            s.figure = Some("fig2".into());
        }
        "type1-curve" => {
            s.mode = Mode::Nominal;
            s.alternatives.clear();
            s.sizes = vec![100, 200, 300, 400, 500];
            s.sweep = Some(SweepKind::Type1);
            s.figure = Some("fig3".into());
        }
        "large-sample" => {
            s.designs = vec![DesignName::StandardBrar];
            s.alternatives = vec![1.5, 2.0];
            s.tests = strings(&["original", "timedirect", "lastblock"]);
            s.er_comparator = None;
            s.sizes = DEFAULT_LARGE_SAMPLE_GRID.to_vec();
            s.sweep = Some(SweepKind::Power);
            s.figure = Some("fig4".into());
        }
        "empirical-exponential" => {
            s.total_n = 121;
            s.burn_in = 12;
            s.control = 0.002;
            s.alternatives = vec![0.0035];
        }
        "empirical-binary" => {
            s.family = FamilyName::Bernoulli;
            s.total_n = 121;
            s.burn_in = 12;
            s.control = 0.7;
            s.alternatives = vec![0.9];
            s.tests = strings(&["original", "timedirect", "lastblock", "fisher"]);
            s.er_comparator = Some("fisher".into());
            s.null_sweep = vec![0.5, 0.7, 0.9];
        }
        _ => return None,
    }
    Some(s)
}

/// The unresolved table behind a preset name, desk variants included.
pub fn preset_table(name: &str) -> Option<ScenarioConfig> {
    match name.strip_suffix("-desk") {
        Some(stem) => {
            let mut s = preset_config(stem)?;
            s.name = name.to_string();
            s.replicates_calib = DESK_CALIBRATION_REPLICATES;
            s.replicates_eval = DESK_EVALUATION_REPLICATES;
            Some(s)
        }
        None => preset_config(name),
    }
}

pub fn preset(name: &str) -> Result<ResolvedScenario, CliError> {
    preset_table(name)
        .ok_or_else(|| {
            CliError::Config(format!(
                "unknown preset `{name}`; choose one of {} (optionally with -desk)",
                PRESET_NAMES.join(", ")
            ))
        })?
        .resolve()
}
