//! CSV writers. Every file starts with `#` lines carrying the tool version,
//! seed, replicate counts and the scenario table as JSON, so a file can be
//! regenerated from its header. Nothing time-dependent is written.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use aptest::calibration::{CriticalValue, CRITICAL_VALUE_COLUMNS};
use aptest::harness::{CriticalValueRow, ReportRow};

use crate::config::ScenarioConfig;
use crate::CliError;

pub const REPORT_COLUMNS: [&str; 18] = [
    "design",
    "N",
    "B",
    "Bprime",
    "family",
    "param_ctrl",
    "param_exp",
    "test",
    "mode",
    "alpha",
    "rejection_rate",
    "mc_se",
    "pct_better_mean",
    "pct_better_sd",
    "mean_outcome",
    "seed",
    "threshold",
    "degenerate_trials",
];

pub const SENSITIVITY_COLUMNS: [&str; 9] = [
    "design",
    "null_value",
    "test",
    "alpha",
    "q_alpha",
    "achieved_alpha",
    "degenerate_max",
    "replicates",
    "seed",
];

pub fn header_lines(scenarios: &[&ScenarioConfig]) -> Result<String, CliError> {
    let mut h = format!("# aptest {}\n", env!("CARGO_PKG_VERSION"));
    for s in scenarios {
        h.push_str(&format!(
            "# scenario {} seed {} replicates_eval {} replicates_calib {}\n",
            s.name, s.seed, s.replicates_eval, s.replicates_calib
        ));
        let json = serde_json::to_string(s).map_err(|e| CliError::Io(e.to_string()))?;
        h.push_str(&format!("# config {json}\n"));
    }
    Ok(h)
}

fn open(path: &Path, header: &str) -> Result<csv::Writer<BufWriter<File>>, CliError> {
    let file = File::create(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let mut out = BufWriter::new(file);
    out.write_all(header.as_bytes())
        .map_err(|e| CliError::Io(e.to_string()))?;
    Ok(csv::Writer::from_writer(out))
}

fn finish(w: csv::Writer<BufWriter<File>>) -> Result<(), CliError> {
    w.into_inner()
        .map_err(|e| CliError::Io(e.to_string()))?
        .flush()
        .map_err(|e| CliError::Io(e.to_string()))
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "NA".to_string(), |v| v.to_string())
}

fn report_record(r: &ReportRow<f64>) -> Vec<String> {
    vec![
        r.design.to_string(),
        r.total_n.to_string(),
        r.block_size.to_string(),
        r.burn_in.to_string(),
        r.family.to_string(),
        r.param_ctrl.to_string(),
        r.param_exp.to_string(),
        r.test.clone(),
        r.mode.label().to_string(),
        r.alpha.to_string(),
        r.rejection_rate.to_string(),
        r.mc_se.to_string(),
        opt(r.pct_better_mean),
        opt(r.pct_better_sd),
        r.mean_outcome.to_string(),
        r.seed.to_string(),
        r.threshold.to_string(),
        r.degenerate_trials.to_string(),
    ]
}

pub fn write_report(path: &Path, header: &str, rows: &[&ReportRow<f64>]) -> Result<(), CliError> {
    let mut w = open(path, header)?;
    let io = |e: csv::Error| CliError::Io(e.to_string());
    w.write_record(REPORT_COLUMNS).map_err(io)?;
    for r in rows {
        w.write_record(report_record(r)).map_err(io)?;
    }
    finish(w)
}

pub fn write_critical_values(
    path: &Path,
    header: &str,
    rows: &[&CriticalValueRow<f64>],
) -> Result<(), CliError> {
    let mut w = open(path, header)?;
    let io = |e: csv::Error| CliError::Io(e.to_string());
    let mut cols = vec!["design", "N"];
    cols.extend(CRITICAL_VALUE_COLUMNS);
    w.write_record(&cols).map_err(io)?;
    for r in rows {
        let c = &r.critical;
        w.write_record([
            r.design.to_string(),
            r.total_n.to_string(),
            r.test.clone(),
            c.alpha_nominal.to_string(),
            c.q_alpha.to_string(),
            c.achieved_alpha.to_string(),
            c.degenerate_max.to_string(),
            r.replicates.to_string(),
            r.seed.to_string(),
            r.null_model_description.clone(),
        ])
        .map_err(io)?;
    }
    finish(w)
}

pub struct SensitivityRow<'a> {
    pub design: &'static str,
    pub null_value: f64,
    pub test: &'a str,
    pub critical: &'a CriticalValue<f64>,
    pub replicates: u64,
    pub seed: u64,
}

pub fn write_sensitivity(
    path: &Path,
    header: &str,
    rows: &[SensitivityRow<'_>],
) -> Result<(), CliError> {
    let mut w = open(path, header)?;
    let io = |e: csv::Error| CliError::Io(e.to_string());
    w.write_record(SENSITIVITY_COLUMNS).map_err(io)?;
    for r in rows {
        w.write_record([
            r.design.to_string(),
            r.null_value.to_string(),
            r.test.to_string(),
            r.critical.alpha_nominal.to_string(),
            r.critical.q_alpha.to_string(),
            r.critical.achieved_alpha.to_string(),
            r.critical.degenerate_max.to_string(),
            r.replicates.to_string(),
            r.seed.to_string(),
        ])
        .map_err(io)?;
    }
    finish(w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn missing_values_are_na() {
        assert_eq!(opt(None), "NA");
        assert_eq!(opt(Some(0.5)), "0.5");
    }
}
