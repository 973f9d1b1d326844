//! Executes a manifest: calibration and evaluation for every scenario,
//! then the report, critical-value, sensitivity, figure and trajectory
//! files.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use aptest::allocation::{simulate_trial, write_trajectory_rows, TRAJECTORY_COLUMNS};
use aptest::calibration::sensitivity_sweep;
use aptest::harness::{
    power_convergence_sweep, run_scenario, type1_curve, PerformanceReport, ScenarioSpec,
};
use aptest::rng::{StreamSeed, EVALUATION};
use serde::Serialize;

use crate::config::{ResolvedScenario, SweepKind};
use crate::output::{self, SensitivityRow};
use crate::CliError;

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub config_path: Option<PathBuf>,
    pub preset: Option<String>,
    pub scenarios: Vec<ResolvedScenario>,
    /// Worker threads; 0 means one per available core.
    pub threads: usize,
    pub out_dir: PathBuf,
}

/// Reports of one scenario table, one entry per design and size.
pub struct ScenarioResult {
    pub name: String,
    pub reports: Vec<PerformanceReport<f64>>,
}

pub struct RunOutcome {
    pub results: Vec<ScenarioResult>,
    pub files: Vec<PathBuf>,
}

fn spec_reports(
    spec: &ScenarioSpec<f64>,
    scenario: &ResolvedScenario,
) -> aptest::Result<Vec<PerformanceReport<f64>>> {
    let sizes = &scenario.config.sizes;
    match scenario.config.sweep {
        None => Ok(vec![run_scenario(spec)?]),
        Some(SweepKind::Type1) => type1_curve(spec, sizes),
        Some(SweepKind::Power) => power_convergence_sweep(spec, sizes),
    }
}

fn dump_trajectories(
    path: &Path,
    header: &str,
    spec: &ScenarioSpec<f64>,
    count: u64,
) -> Result<(), CliError> {
    // Same stream as the evaluation of the null model, so replicate i here is
    // replicate i of the report.
    let stream = StreamSeed::new(spec.seed, &[EVALUATION, spec.design.kind().stream_tag(), 0]);
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
    let mut out = BufWriter::new(File::create(path).map_err(io)?);
    out.write_all(header.as_bytes()).map_err(io)?;
    writeln!(out, "{TRAJECTORY_COLUMNS}").map_err(io)?;
    for i in 0..count {
        let traj = simulate_trial(
            &spec.design,
            &spec.null_model,
            &spec.prior,
            &mut stream.replicate(i),
        )?;
        write_trajectory_rows(&mut out, i, &traj, &spec.null_model).map_err(io)?;
    }
    out.flush().map_err(io)
}

fn run_one(
    scenario: &ResolvedScenario,
    out_dir: &Path,
    files: &mut Vec<PathBuf>,
) -> Result<ScenarioResult, CliError> {
    let name = scenario.name();
    let header = output::header_lines(&[&scenario.config])?;
    let mut reports = Vec::new();
    for spec in &scenario.specs {
        log::info!("running {}", spec.name);
        reports.extend(spec_reports(spec, scenario)?);
    }

    let rows: Vec<_> = reports.iter().flat_map(|r| &r.rows).collect();
    let path = out_dir.join(format!("{name}_report.csv"));
    output::write_report(&path, &header, &rows)?;
    files.push(path);

    let cvs: Vec<_> = reports.iter().flat_map(|r| &r.critical_values).collect();
    if !cvs.is_empty() {
        let path = out_dir.join(format!("{name}_critical_values.csv"));
        output::write_critical_values(&path, &header, &cvs)?;
        files.push(path);
    }

    if !scenario.config.null_sweep.is_empty() {
        let mut sweeps = Vec::new();
        for spec in &scenario.specs {
            let s = sensitivity_sweep(
                &spec.design,
                &spec.null_model,
                &spec.prior,
                &scenario.config.null_sweep,
                &spec.tests,
                spec.alpha,
                spec.replicates_calib,
                spec.seed,
            )?;
            sweeps.push((spec, s));
        }
        let mut rows = Vec::new();
        for (spec, s) in &sweeps {
            for (value, cvs) in s {
                for (t, cv) in spec.tests.iter().zip(cvs) {
                    rows.push(SensitivityRow {
                        design: spec.design.kind().label(),
                        null_value: *value,
                        test: t.label(),
                        critical: cv,
                        replicates: spec.replicates_calib,
                        seed: spec.seed,
                    });
                }
            }
        }
        let path = out_dir.join(format!("{name}_null_sensitivity.csv"));
        output::write_sensitivity(&path, &header, &rows)?;
        files.push(path);
    }

    if scenario.config.dump_trajectories > 0 {
        for spec in &scenario.specs {
            let path = out_dir.join(format!(
                "{name}_{}_trajectories.csv",
                spec.design.kind().label()
            ));
            dump_trajectories(&path, &header, spec, scenario.config.dump_trajectories)?;
            files.push(path);
        }
    }

    Ok(ScenarioResult {
        name: name.to_string(),
        reports,
    })
}

/// Runs every scenario on a pool of `manifest.threads` workers and writes
/// all output files. Results do not depend on the thread count.
pub fn run(manifest: &RunManifest) -> Result<RunOutcome, CliError> {
    std::fs::create_dir_all(&manifest.out_dir)
        .map_err(|e| CliError::Io(format!("{}: {e}", manifest.out_dir.display())))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(manifest.threads)
        .build()
        .map_err(|e| CliError::Io(e.to_string()))?;

    let mut files = Vec::new();
    let results = pool.install(|| {
        manifest
            .scenarios
            .iter()
            .map(|s| run_one(s, &manifest.out_dir, &mut files))
            .collect::<Result<Vec<_>, _>>()
    })?;

    let mut figures: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, s) in manifest.scenarios.iter().enumerate() {
        if let Some(f) = &s.config.figure {
            figures.entry(f.as_str()).or_default().push(i);
        }
    }
    for (fig, members) in figures {
        let configs: Vec<_> = members
            .iter()
            .map(|&i| &manifest.scenarios[i].config)
            .collect();
        let header = output::header_lines(&configs)?;
        let rows: Vec<_> = members
            .iter()
            .flat_map(|&i| results[i].reports.iter().flat_map(|r| &r.rows))
            .collect();
        let path = manifest.out_dir.join(format!("{fig}.csv"));
        output::write_report(&path, &header, &rows)?;
        files.push(path);
    }

    Ok(RunOutcome { results, files })
}

fn pct(x: Option<f64>) -> String {
    x.map_or_else(|| "-".to_string(), |v| format!("{v:.1}"))
}

/// Plain-text summary of every report row.
pub fn summary_table(outcome: &RunOutcome) -> String {
    let mut s = String::new();
    for r in &outcome.results {
        s.push_str(&format!("== {}\n", r.name));
        s.push_str(&format!(
            "{:<14} {:>6} {:>10} {:<11} {:<10} {:>8} {:>7} {:>8} {:>10}\n",
            "design", "N", "param_exp", "test", "mode", "reject", "mc_se", "%better", "mean_out"
        ));
        for row in r.reports.iter().flat_map(|p| &p.rows) {
            s.push_str(&format!(
                "{:<14} {:>6} {:>10} {:<11} {:<10} {:>8.4} {:>7.4} {:>8} {:>10.4}\n",
                row.design,
                row.total_n,
                row.param_exp,
                row.test,
                row.mode.label(),
                row.rejection_rate,
                row.mc_se,
                pct(row.pct_better_mean),
                row.mean_outcome
            ));
        }
    }
    s
}
