//! Null distributions of test statistics and Monte Carlo critical values.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::allocation::{simulate_trial, DesignConfig, TrialTrajectory};
use crate::error::{Error, Result};
use crate::outcome::{ArmPosterior, FamilyKind, OutcomeModel, PriorSpec};
use crate::rng::{map_replicates, StreamSeed, CALIBRATION};
use crate::scalar::Real;
use crate::stats::TestSpec;

pub const DEFAULT_CALIBRATION_REPLICATES: u64 = 1_000_000;

/// How rejection thresholds are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Asymptotic p-values for comparators; the largest non-degenerate
    /// threshold for discrete AP tests; calibrated values otherwise.
    Nominal,
    /// Monte Carlo critical values for every test.
    Calibrated,
}

impl Mode {
    pub fn label(self) -> &'static str {
        match self {
            Mode::Nominal => "nominal",
            Mode::Calibrated => "calibrated",
        }
    }
}

/// Null configuration used to simulate a reference distribution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NullSpec<R> {
    pub design: DesignConfig,
    pub model: OutcomeModel<R>,
    pub prior: PriorSpec<R>,
    pub replicates: u64,
    pub seed: u64,
}

impl<R: Real> NullSpec<R> {
    pub fn new(
        design: DesignConfig,
        model: OutcomeModel<R>,
        prior: PriorSpec<R>,
        replicates: u64,
        seed: u64,
    ) -> Result<Self> {
        let spec = Self {
            design,
            model,
            prior,
            replicates,
            seed,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.model.arms_equal() {
            return Err(Error::Calibration(format!(
                "null model must have equal arms, got {}",
                self.model.describe()
            )));
        }
        if self.replicates == 0 {
            return Err(Error::Calibration("replicates must be >= 1".into()));
        }
        self.prior.check_family(self.model.kind())
    }

    pub fn describe(&self) -> String {
        format!(
            "{} {} N={} Bprime={} B={} prior={}",
            self.design.kind().label(),
            self.model.describe(),
            self.design.total_n(),
            self.design.burn_in(),
            self.design.block_size(),
            self.prior.describe()
        )
    }
}

/// Sorted null samples of one statistic.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NullDistribution<R> {
    pub test_name: String,
    samples: Vec<R>,
}

impl<R: Real> NullDistribution<R> {
    pub fn from_samples(test_name: impl Into<String>, mut samples: Vec<R>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Calibration("empty null distribution".into()));
        }
        if samples.iter().any(|s| s.is_nan()) {
            return Err(Error::Numerical {
                context: "null distribution",
                detail: "NaN statistic".into(),
            });
        }
        samples.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
        Ok(Self {
            test_name: test_name.into(),
            samples,
        })
    }

    pub fn samples(&self) -> &[R] {
        &self.samples
    }

    pub fn replicates(&self) -> u64 {
        self.samples.len() as u64
    }

    /// Empirical P(statistic > q).
    pub fn tail(&self, q: R) -> R {
        let above = self.samples.len() - self.samples.partition_point(|&s| s <= q);
        R::from_count(above as u64) / R::from_count(self.replicates())
    }

    pub fn max(&self) -> R {
        *self.samples.last().unwrap()
    }

    /// Sample median (lower middle element).
    pub fn median(&self) -> R {
        self.samples[(self.samples.len() - 1) / 2]
    }
}

/// Selected rejection threshold: reject when the statistic exceeds
/// `q_alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalValue<R> {
    pub q_alpha: R,
    pub achieved_alpha: R,
    pub alpha_nominal: R,
    /// The threshold is the largest sample, so the test never rejects the
    /// simulated null.
    pub degenerate_max: bool,
}

/// Smallest sample value q with empirical P(statistic > q) <= alpha.
pub fn critical_value<R: Real>(dist: &NullDistribution<R>, alpha: R) -> Result<CriticalValue<R>> {
    if !(alpha > R::zero() && alpha < R::one()) {
        return Err(Error::Calibration(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )));
    }
    let n = dist.samples.len();
    let total = R::from_count(n as u64);
    // Largest number of samples allowed strictly above q.
    let mut allowed = (alpha * total).floor().to_usize().unwrap_or(0).min(n - 1);
    while allowed + 1 < n && R::from_count(allowed as u64 + 1) / total <= alpha {
        allowed += 1;
    }
    while allowed > 0 && R::from_count(allowed as u64) / total > alpha {
        allowed -= 1;
    }
    let q = dist.samples[n - 1 - allowed];
    Ok(CriticalValue {
        q_alpha: q,
        achieved_alpha: dist.tail(q),
        alpha_nominal: alpha,
        degenerate_max: q >= dist.max(),
    })
}

/// Threshold of the uncorrected discrete test: when the calibrated value
/// can never be exceeded, reject at the maximum value instead. The null
/// rejection rate then exceeds alpha.
pub fn unadjusted_critical_value<R: Real>(
    dist: &NullDistribution<R>,
    alpha: R,
) -> Result<CriticalValue<R>> {
    let cv = critical_value(dist, alpha)?;
    if !cv.degenerate_max {
        return Ok(cv);
    }
    let top = dist.max();
    let below = dist.samples.partition_point(|&s| s < top);
    if below == 0 {
        return Ok(cv);
    }
    let q = dist.samples[below - 1];
    Ok(CriticalValue {
        q_alpha: q,
        achieved_alpha: dist.tail(q),
        alpha_nominal: alpha,
        degenerate_max: false,
    })
}

/// Simulates `null.replicates` trials and records every statistic on each.
/// The returned distributions follow the order of `tests`.
pub fn simulate_null_distribution<R: Real>(
    null: &NullSpec<R>,
    tests: &[TestSpec<R>],
) -> Result<Vec<NullDistribution<R>>> {
    null.validate()?;
    for t in tests {
        t.check(null.design.num_blocks(), null.model.kind())?;
    }
    let stream = StreamSeed::new(null.seed, &[CALIBRATION, null.design.kind().stream_tag()]);
    let rows = map_replicates(&stream, null.replicates, |_, rng| {
        let traj = simulate_trial(&null.design, &null.model, &null.prior, rng)?;
        tests
            .iter()
            .map(|t| t.observe(&traj, &null.model).map(|o| o.statistic))
            .collect::<Result<Vec<R>>>()
    })?;
    tests
        .iter()
        .enumerate()
        .map(|(j, t)| {
            NullDistribution::from_samples(t.label(), rows.iter().map(|r| r[j]).collect())
        })
        .collect()
}

/// Calibrates each test at level `alpha`.
pub fn calibrate<R: Real>(
    null: &NullSpec<R>,
    tests: &[TestSpec<R>],
    alpha: R,
) -> Result<Vec<CriticalValue<R>>> {
    simulate_null_distribution(null, tests)?
        .iter()
        .map(|d| critical_value(d, alpha))
        .collect()
}

/// Arm-agnostic estimate of the natural parameter from a completed trial.
/// With `add_half`, a binary estimate is (s + 1/2) / (n + 1).
pub fn pooled_estimate<R: Real>(observed: &TrialTrajectory<R>, add_half: bool) -> Result<R> {
    let arms = &observed.final_posterior.arms;
    let n: u64 = arms.iter().map(|a| a.n()).sum();
    if n == 0 {
        return Err(Error::Calibration("observed trial has no outcomes".into()));
    }
    let total_n = R::from_count(n);
    match arms[0] {
        ArmPosterior::Exponential { .. } => {
            let time: R = arms.iter().map(|a| a.sufficient()).sum();
            Ok(total_n / time)
        }
        ArmPosterior::Bernoulli { .. } => {
            let s: R = arms.iter().map(|a| a.sufficient()).sum();
            if add_half {
                return Ok((s + R::lit(0.5)) / (total_n + R::one()));
            }
            let p = s / total_n;
            if p <= R::zero() || p >= R::one() {
                let corrected = (s + R::lit(0.5)) / (total_n + R::one());
                return Err(Error::Calibration(format!(
                    "pooled proportion is {p}, which gives a degenerate null; \
                     apply the add-half correction (pooled p = {corrected})"
                )));
            }
            Ok(p)
        }
        ArmPosterior::Normal { .. } => {
            let sum: R = arms.iter().map(|a| a.sufficient()).sum();
            Ok(sum / total_n)
        }
    }
}

/// Result of a pooled-estimate calibration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PooledCalibration<R> {
    pub null_model: OutcomeModel<R>,
    pub critical_values: Vec<CriticalValue<R>>,
}

/// Calibrates under the equal-arms null at the pooled estimate of the
/// observed trial. `template` supplies the family, direction and, for
/// normal outcomes, the known standard deviations.
#[allow(clippy::too_many_arguments)]
pub fn calibrate_under_pooled<R: Real>(
    observed: &TrialTrajectory<R>,
    template: &OutcomeModel<R>,
    prior: &PriorSpec<R>,
    tests: &[TestSpec<R>],
    alpha: R,
    replicates: u64,
    seed: u64,
    add_half: bool,
) -> Result<PooledCalibration<R>> {
    let value = pooled_estimate(observed, add_half)?;
    if add_half && template.kind() == FamilyKind::Bernoulli {
        log::info!("pooled proportion uses the add-half correction: {value}");
    }
    let null_model = template.with_equal_arms(value)?;
    let null = NullSpec::new(observed.design, null_model, *prior, replicates, seed)?;
    Ok(PooledCalibration {
        null_model,
        critical_values: calibrate(&null, tests, alpha)?,
    })
}

/// Calibrations at several candidate null values of a binary or normal
/// model, for checking how sensitive the thresholds are to the null.
#[allow(clippy::too_many_arguments)]
pub fn sensitivity_sweep<R: Real>(
    design: &DesignConfig,
    template: &OutcomeModel<R>,
    prior: &PriorSpec<R>,
    null_values: &[R],
    tests: &[TestSpec<R>],
    alpha: R,
    replicates: u64,
    seed: u64,
) -> Result<Vec<(R, Vec<CriticalValue<R>>)>> {
    null_values
        .iter()
        .map(|&v| {
            let null = NullSpec::new(
                *design,
                template.with_equal_arms(v)?,
                *prior,
                replicates,
                seed,
            )?;
            Ok((v, calibrate(&null, tests, alpha)?))
        })
        .collect()
}

/// Header of the critical-value table.
pub const CRITICAL_VALUE_COLUMNS: [&str; 8] = [
    "test",
    "alpha",
    "q_alpha",
    "achieved_alpha",
    "degenerate_max",
    "replicates",
    "seed",
    "null_model_description",
];
