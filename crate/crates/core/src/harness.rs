//! Scenario evaluation: calibration under the null, Monte Carlo operating
//! characteristics under each model, and patient-benefit summaries.

use std::time::Instant;

use serde::Serialize;

use crate::allocation::{simulate_trial, DesignConfig, DesignKind, TrialTrajectory};
use crate::calibration::{
    critical_value, simulate_null_distribution, unadjusted_critical_value, CriticalValue, Mode,
    NullDistribution, NullSpec,
};
use crate::error::{Error, Result};
use crate::outcome::{Arm, FamilyKind, OutcomeModel, PriorSpec};
use crate::rng::{map_replicates, StreamSeed, EVALUATION};
use crate::scalar::Real;
use crate::stats::{Comparator, TestSpec};

pub const DEFAULT_EVALUATION_REPLICATES: u64 = 100_000;

/// Frequentist test applied to an equal-randomization trial of the same size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ErComparator {
    pub comparator: Comparator,
    pub permuted_block_size: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioSpec<R> {
    pub name: String,
    pub design: DesignConfig,
    pub prior: PriorSpec<R>,
    pub null_model: OutcomeModel<R>,
    pub alternative_models: Vec<OutcomeModel<R>>,
    pub alpha: R,
    pub tests: Vec<TestSpec<R>>,
    pub er_comparator: Option<ErComparator>,
    pub mode: Mode,
    pub replicates_eval: u64,
    pub replicates_calib: u64,
    pub seed: u64,
}

impl<R: Real> ScenarioSpec<R> {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > R::zero() && self.alpha < R::one()) {
            return Err(Error::InvalidTest(format!(
                "alpha must lie in (0, 1), got {}",
                self.alpha
            )));
        }
        if self.replicates_eval == 0 || self.replicates_calib == 0 {
            return Err(Error::InvalidDesign("replicate counts must be >= 1".into()));
        }
        if !self.null_model.arms_equal() {
            return Err(Error::Calibration(format!(
                "null model must have equal arms, got {}",
                self.null_model.describe()
            )));
        }
        self.prior.validate()?;
        self.prior.check_family(self.null_model.kind())?;
        let kind = self.null_model.kind();
        for m in &self.alternative_models {
            if m.kind() != kind {
                return Err(Error::InvalidModel(format!(
                    "alternative {} is not in the {} family",
                    m.describe(),
                    kind.name()
                )));
            }
            let same_control = m.parameter(Arm::Control) == self.null_model.parameter(Arm::Control)
                && m.known_sd(Arm::Control) == self.null_model.known_sd(Arm::Control);
            if !same_control || m.direction() != self.null_model.direction() {
                return Err(Error::InvalidModel(format!(
                    "alternative {} must share the control arm and direction of the null {}",
                    m.describe(),
                    self.null_model.describe()
                )));
            }
        }
        if self.tests.is_empty() && self.er_comparator.is_none() {
            return Err(Error::InvalidTest("scenario has no tests".into()));
        }
        for t in &self.tests {
            t.check(self.design.num_blocks(), kind)?;
        }
        if let Some(er) = &self.er_comparator {
            if er.comparator.family() != kind {
                return Err(Error::InvalidTest(format!(
                    "{} does not apply to {} outcomes",
                    er.comparator.label(),
                    kind.name()
                )));
            }
            self.er_design(er)?;
        }
        if self.replicates_eval < 10_000 {
            log::warn!(
                "{}: {} evaluation replicates cannot guarantee a Monte Carlo SE <= 0.005",
                self.name,
                self.replicates_eval
            );
        }
        Ok(())
    }

    /// Null first, then the alternatives.
    pub fn models(&self) -> Vec<OutcomeModel<R>> {
        let mut v = vec![self.null_model];
        v.extend(self.alternative_models.iter().copied());
        v
    }

    fn er_design(&self, er: &ErComparator) -> Result<DesignConfig> {
        self.design.with_kind(DesignKind::EqualRandomization {
            permuted_block_size: er.permuted_block_size,
        })
    }

    /// Same scenario at total size `n`, burn-in `burn_in` and the current
    /// block size.
    pub fn with_size(&self, n: u64, burn_in: u64) -> Result<Self> {
        let d = &self.design;
        let blocks = n.saturating_sub(burn_in) / d.block_size();
        let design = DesignConfig::new(
            n,
            burn_in,
            d.block_size(),
            d.t_min().min(blocks + 1),
            d.kind(),
        )?;
        Ok(Self {
            design,
            ..self.clone()
        })
    }
}

/// Patient-benefit summary of a batch of trials.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Benefit<R> {
    /// `None` when the arms are identical and no arm is better.
    pub pct_better_mean: Option<R>,
    pub pct_better_sd: Option<R>,
    /// Mean outcome over all subjects; for binary outcomes the mean number
    /// of successes per trial.
    pub mean_outcome: R,
    /// Percentage on the experimental arm, always reported.
    pub pct_experimental_mean: R,
}

struct TrialSummary<R> {
    frac_exp: R,
    outcome_sum: R,
}

fn summarize<R: Real>(traj: &TrialTrajectory<R>) -> TrialSummary<R> {
    TrialSummary {
        frac_exp: R::from_count(traj.count_on(Arm::Experimental))
            / R::from_count(traj.arms.len() as u64),
        outcome_sum: traj.outcomes.iter().copied().sum(),
    }
}

fn benefit_from<R: Real>(rows: &[TrialSummary<R>], model: &OutcomeModel<R>, n: u64) -> Benefit<R> {
    let reps = R::from_count(rows.len() as u64);
    let hundred = R::lit(100.0);
    let mean_exp = rows.iter().map(|r| r.frac_exp).sum::<R>() / reps;
    let better = model.better_arm();
    let on_better = |r: &TrialSummary<R>| match better {
        Some(Arm::Control) => R::one() - r.frac_exp,
        _ => r.frac_exp,
    };
    let m = rows.iter().map(on_better).sum::<R>() / reps;
    let sd = if rows.len() > 1 {
        (rows.iter().map(|r| (on_better(r) - m).powi(2)).sum::<R>() / (reps - R::one())).sqrt()
    } else {
        R::zero()
    };
    let total = rows.iter().map(|r| r.outcome_sum).sum::<R>();
    let mean_outcome = match model.kind() {
        FamilyKind::Bernoulli => total / reps,
        _ => total / (reps * R::from_count(n)),
    };
    Benefit {
        pct_better_mean: better.map(|_| m * hundred),
        pct_better_sd: better.map(|_| sd * hundred),
        mean_outcome,
        pct_experimental_mean: mean_exp * hundred,
    }
}

/// Patient benefit of a batch of trajectories. With identical arms the
/// "better" percentages are absent; `pct_experimental_mean` still is.
pub fn patient_benefit<R: Real>(
    trajectories: &[TrialTrajectory<R>],
    model: &OutcomeModel<R>,
) -> Result<Benefit<R>> {
    let first = trajectories.first().ok_or_else(|| {
        Error::InvalidTest("patient benefit needs at least one trajectory".into())
    })?;
    let rows: Vec<_> = trajectories.iter().map(summarize).collect();
    Ok(benefit_from(&rows, model, first.design.total_n()))
}

/// One line of a performance report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow<R> {
    pub design: &'static str,
    pub total_n: u64,
    pub block_size: u64,
    pub burn_in: u64,
    pub family: &'static str,
    pub param_ctrl: R,
    pub param_exp: R,
    pub test: String,
    pub mode: Mode,
    pub alpha: R,
    pub rejection_rate: R,
    pub mc_se: R,
    pub pct_better_mean: Option<R>,
    pub pct_better_sd: Option<R>,
    pub mean_outcome: R,
    pub seed: u64,
    /// Threshold applied; the test rejects when the statistic exceeds it.
    pub threshold: R,
    /// Trials where the statistic was undefined (an empty arm).
    pub degenerate_trials: u64,
}

/// One line of a critical-value table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalValueRow<R> {
    pub design: &'static str,
    pub total_n: u64,
    pub test: String,
    pub critical: CriticalValue<R>,
    pub replicates: u64,
    pub seed: u64,
    pub null_model_description: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerformanceReport<R> {
    pub scenario: String,
    pub rows: Vec<ReportRow<R>>,
    pub critical_values: Vec<CriticalValueRow<R>>,
    /// Benefit per (design label, model index), in evaluation order.
    pub benefits: Vec<(&'static str, usize, Benefit<R>)>,
    /// Seconds spent; never written to report files.
    #[serde(skip)]
    pub wall_time: f64,
}

impl<R: Real> PerformanceReport<R> {
    /// Rows for a design, test and model parameters.
    pub fn find(&self, design: &str, test: &str, param_exp: R) -> Option<&ReportRow<R>> {
        self.rows
            .iter()
            .find(|r| r.design == design && r.test == test && r.param_exp == param_exp)
    }
}

struct Threshold<R> {
    value: R,
    mode: Mode,
}

/// Thresholds of the tests on one design.
struct Calibrated<R> {
    thresholds: Vec<Threshold<R>>,
    rows: Vec<CriticalValueRow<R>>,
}

fn thresholds_for<R: Real>(
    design: &DesignConfig,
    spec: &ScenarioSpec<R>,
    tests: &[TestSpec<R>],
) -> Result<Calibrated<R>> {
    let needs_null = spec.mode == Mode::Calibrated || tests.iter().any(|t| t.is_ap());
    let dists: Vec<Option<NullDistribution<R>>> = if needs_null {
        let null = NullSpec::new(
            *design,
            spec.null_model,
            spec.prior,
            spec.replicates_calib,
            spec.seed,
        )?;
        simulate_null_distribution(&null, tests)?
            .into_iter()
            .map(Some)
            .collect()
    } else {
        tests.iter().map(|_| None).collect()
    };
    let description = NullSpec {
        design: *design,
        model: spec.null_model,
        prior: spec.prior,
        replicates: spec.replicates_calib,
        seed: spec.seed,
    }
    .describe();

    let mut thresholds = Vec::with_capacity(tests.len());
    let mut rows = Vec::new();
    for (t, dist) in tests.iter().zip(&dists) {
        if let Some(d) = dist {
            let cv = critical_value(d, spec.alpha)?;
            if cv.degenerate_max {
                log::warn!(
                    "{}: {} on {} can never reject at alpha = {} (degenerate maximum threshold)",
                    spec.name,
                    t.label(),
                    design.kind().label(),
                    spec.alpha
                );
            }
            rows.push(CriticalValueRow {
                design: design.kind().label(),
                total_n: design.total_n(),
                test: t.label().to_string(),
                critical: cv,
                replicates: spec.replicates_calib,
                seed: spec.seed,
                null_model_description: description.clone(),
            });
        }
        let th = match (spec.mode, t, dist) {
            (Mode::Nominal, TestSpec::Comparator(c), _) => Threshold {
                value: c.nominal_critical(spec.alpha),
                mode: Mode::Nominal,
            },
            (Mode::Nominal, TestSpec::Ap { spec: ap, .. }, Some(d)) if ap.is_discrete() => {
                Threshold {
                    value: unadjusted_critical_value(d, spec.alpha)?.q_alpha,
                    mode: Mode::Nominal,
                }
            }
            (_, _, Some(d)) => Threshold {
                value: critical_value(d, spec.alpha)?.q_alpha,
                mode: Mode::Calibrated,
            },
            (_, _, None) => unreachable!("null distribution is simulated whenever a test needs it"),
        };
        thresholds.push(th);
    }
    Ok(Calibrated { thresholds, rows })
}

struct Evaluation<R> {
    rejections: Vec<u64>,
    degenerate: Vec<u64>,
    benefit: Benefit<R>,
}

fn evaluate_design<R: Real>(
    design: &DesignConfig,
    model: &OutcomeModel<R>,
    model_index: usize,
    spec: &ScenarioSpec<R>,
    tests: &[TestSpec<R>],
    thresholds: &[Threshold<R>],
) -> Result<Evaluation<R>> {
    let stream = StreamSeed::new(
        spec.seed,
        &[EVALUATION, design.kind().stream_tag(), model_index as u64],
    );
    let per_trial = map_replicates(&stream, spec.replicates_eval, |_, rng| {
        let traj = simulate_trial(design, model, &spec.prior, rng)?;
        let decisions = tests
            .iter()
            .zip(thresholds)
            .map(|(t, th)| {
                t.observe(&traj, model)
                    .map(|o| (!o.degenerate && o.statistic > th.value, o.degenerate))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok((decisions, summarize(&traj)))
    })?;
    let mut rejections = vec![0u64; tests.len()];
    let mut degenerate = vec![0u64; tests.len()];
    for (decisions, _) in &per_trial {
        for (j, &(rej, deg)) in decisions.iter().enumerate() {
            rejections[j] += u64::from(rej);
            degenerate[j] += u64::from(deg);
        }
    }
    for (t, &d) in tests.iter().zip(&degenerate) {
        if d > 0 {
            log::warn!(
                "{}: {} trials had an empty arm for {}",
                spec.name,
                d,
                t.label()
            );
        }
    }
    let summaries: Vec<_> = per_trial.into_iter().map(|(_, s)| s).collect();
    Ok(Evaluation {
        rejections,
        degenerate,
        benefit: benefit_from(&summaries, model, design.total_n()),
    })
}

/// Monte Carlo standard error of a rejection rate.
pub fn mc_se<R: Real>(rate: R, replicates: u64) -> R {
    (rate * (R::one() - rate) / R::from_count(replicates)).sqrt()
}

/// Calibrates every test under the null model, then evaluates every model
/// (null first) on shared trajectories per design.
pub fn run_scenario<R: Real>(spec: &ScenarioSpec<R>) -> Result<PerformanceReport<R>> {
    spec.validate()?;
    let start = Instant::now();
    let mut units: Vec<(DesignConfig, Vec<TestSpec<R>>)> = Vec::new();
    if !spec.tests.is_empty() {
        units.push((spec.design, spec.tests.clone()));
    }
    if let Some(er) = &spec.er_comparator {
        units.push((
            spec.er_design(er)?,
            vec![TestSpec::Comparator(er.comparator)],
        ));
    }

    let models = spec.models();
    let mut report = PerformanceReport {
        scenario: spec.name.clone(),
        rows: Vec::new(),
        critical_values: Vec::new(),
        benefits: Vec::new(),
        wall_time: 0.0,
    };
    for (design, tests) in &units {
        let cal = thresholds_for(design, spec, tests)?;
        report.critical_values.extend(cal.rows);
        for (mi, model) in models.iter().enumerate() {
            let ev = evaluate_design(design, model, mi, spec, tests, &cal.thresholds)?;
            report
                .benefits
                .push((design.kind().label(), mi, ev.benefit));
            for (j, t) in tests.iter().enumerate() {
                let rate = R::from_count(ev.rejections[j]) / R::from_count(spec.replicates_eval);
                report.rows.push(ReportRow {
                    design: design.kind().label(),
                    total_n: design.total_n(),
                    block_size: design.block_size(),
                    burn_in: design.burn_in(),
                    family: model.kind().name(),
                    param_ctrl: model.parameter(Arm::Control),
                    param_exp: model.parameter(Arm::Experimental),
                    test: t.label().to_string(),
                    mode: cal.thresholds[j].mode,
                    alpha: spec.alpha,
                    rejection_rate: rate,
                    mc_se: mc_se(rate, spec.replicates_eval),
                    pct_better_mean: ev.benefit.pct_better_mean,
                    pct_better_sd: ev.benefit.pct_better_sd,
                    mean_outcome: ev.benefit.mean_outcome,
                    seed: spec.seed,
                    threshold: cal.thresholds[j].value,
                    degenerate_trials: ev.degenerate[j],
                });
            }
        }
    }
    report.wall_time = start.elapsed().as_secs_f64();
    log::info!("{}: finished in {:.1}s", spec.name, report.wall_time);
    Ok(report)
}

/// Runs the scenario at every size in `sizes`, recalibrating for each.
/// `burn_in_for` maps a total size to its burn-in.
pub fn run_size_grid<R: Real>(
    spec: &ScenarioSpec<R>,
    sizes: &[u64],
    burn_in_for: impl Fn(u64) -> u64,
) -> Result<Vec<PerformanceReport<R>>> {
    sizes
        .iter()
        .map(|&n| {
            let mut s = spec.with_size(n, burn_in_for(n))?;
            s.name = format!("{} N={n}", spec.name);
            run_scenario(&s)
        })
        .collect()
}

/// Burn-in of one tenth of the sample, rounded to an even count >= 2.
pub fn tenth_burn_in(n: u64) -> u64 {
    (((n as f64 / 10.0) / 2.0).round() as u64 * 2).max(2)
}

/// Type I error by sample size for a fully sequential design.
pub fn type1_curve<R: Real>(
    spec: &ScenarioSpec<R>,
    sizes: &[u64],
) -> Result<Vec<PerformanceReport<R>>> {
    let null_only = ScenarioSpec {
        alternative_models: Vec::new(),
        ..spec.clone()
    };
    run_size_grid(&null_only, sizes, tenth_burn_in)
}

/// Power by sample size; every size is calibrated separately.
pub fn power_convergence_sweep<R: Real>(
    spec: &ScenarioSpec<R>,
    sizes: &[u64],
) -> Result<Vec<PerformanceReport<R>>> {
    run_size_grid(spec, sizes, tenth_burn_in)
}

pub const DEFAULT_LARGE_SAMPLE_GRID: [u64; 6] = [100, 200, 500, 1000, 2000, 5000];
