//! Allocation-probability test statistics and frequentist comparators.

use serde::{Deserialize, Serialize};

use crate::allocation::TrialTrajectory;
use crate::error::{Error, Result};
use crate::outcome::{Arm, ArmPosterior, Direction, FamilyKind, OutcomeModel};
use crate::scalar::Real;
use crate::special::{ln_gamma, ln_scaled_series, normal_quantile, normal_sf};

/// Transform f applied to each allocation probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Transform<R> {
    /// 1 when π exceeds `threshold` (or reaches it, when not strict).
    Indicator {
        threshold: R,
        strict: bool,
    },
    Identity,
}

impl<R: Real> Transform<R> {
    #[inline]
    pub fn apply(&self, pi: R) -> R {
        match *self {
            Transform::Indicator { threshold, strict } => {
                let hit = if strict {
                    pi > threshold
                } else {
                    pi >= threshold
                };
                if hit {
                    R::one()
                } else {
                    R::zero()
                }
            }
            Transform::Identity => pi,
        }
    }
}

/// Weights w_t over blocks t_min..=T+1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Weights<R> {
    Ones,
    /// w_t = t.
    Time,
    LastBlockOnly,
    /// One weight per block t_min..=T+1, in order.
    Custom(Vec<R>),
}

/// A generalized AP test: Σ_{t=t_min}^{T+1} f(π_t) w_t.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApTestSpec<R> {
    pub f: Transform<R>,
    pub w: Weights<R>,
    pub t_min: u64,
}

impl<R: Real> ApTestSpec<R> {
    pub fn new(f: Transform<R>, w: Weights<R>, t_min: u64) -> Result<Self> {
        let spec = Self { f, w, t_min };
        spec.validate()?;
        Ok(spec)
    }

    /// Count of blocks with π above one half.
    pub fn original() -> Self {
        Self {
            f: Transform::Indicator {
                threshold: R::lit(0.5),
                strict: true,
            },
            w: Weights::Ones,
            t_min: 1,
        }
    }

    pub fn timedirect() -> Self {
        Self {
            f: Transform::Identity,
            w: Weights::Time,
            t_min: 1,
        }
    }

    /// π_{T+1}; `t_min` has no effect on the value.
    pub fn last_block(t_min: u64) -> Self {
        Self {
            f: Transform::Identity,
            w: Weights::LastBlockOnly,
            t_min: t_min.max(1),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.t_min < 1 {
            return Err(Error::InvalidTest("t_min must be >= 1".into()));
        }
        if let Transform::Indicator { threshold, .. } = self.f {
            if !(threshold >= R::zero() && threshold <= R::one()) {
                return Err(Error::InvalidTest(format!(
                    "indicator threshold must lie in [0, 1], got {threshold}"
                )));
            }
        }
        if let Weights::Custom(w) = &self.w {
            if w.is_empty() {
                return Err(Error::InvalidTest("custom weights are empty".into()));
            }
            if w.iter().any(|x| !x.is_finite() || *x < R::zero()) {
                return Err(Error::InvalidTest(
                    "custom weights must be finite and nonnegative".into(),
                ));
            }
            if w.iter().all(|x| *x == R::zero()) {
                return Err(Error::InvalidTest("custom weights are all zero".into()));
            }
        }
        Ok(())
    }

    /// Checks the test against a trial with `num_blocks` adaptive blocks.
    pub fn check_blocks(&self, num_blocks: u64) -> Result<()> {
        self.validate()?;
        let last = num_blocks + 1;
        if self.t_min > last {
            return Err(Error::InvalidTest(format!(
                "t_min = {} exceeds T + 1 = {last}",
                self.t_min
            )));
        }
        if let Weights::Custom(w) = &self.w {
            let expected = last - self.t_min + 1;
            if w.len() as u64 != expected {
                return Err(Error::InvalidTest(format!(
                    "custom weights have length {}, expected T + 2 - t_min = {expected}",
                    w.len()
                )));
            }
        }
        Ok(())
    }

    #[inline]
    fn weight(&self, t: u64, last: u64) -> R {
        match &self.w {
            Weights::Ones => R::one(),
            Weights::Time => R::from_count(t),
            Weights::LastBlockOnly => {
                if t == last {
                    R::one()
                } else {
                    R::zero()
                }
            }
            Weights::Custom(w) => w[(t - self.t_min) as usize],
        }
    }

    /// Largest value the statistic can take when f is bounded by one.
    pub fn max_attainable(&self, num_blocks: u64) -> R {
        let last = num_blocks + 1;
        (self.t_min..=last).map(|t| self.weight(t, last)).sum()
    }

    /// True when the statistic only takes finitely many values.
    pub fn is_discrete(&self) -> bool {
        matches!(self.f, Transform::Indicator { .. })
    }

    /// Statistic from the probabilities π_1..π_{T+1}.
    pub fn evaluate(&self, alloc_probs: &[R]) -> Result<R> {
        if alloc_probs.is_empty() {
            return Err(Error::InvalidTest("empty allocation trajectory".into()));
        }
        let last = alloc_probs.len() as u64;
        self.check_blocks(last - 1)?;
        if let Weights::LastBlockOnly = self.w {
            return Ok(self.f.apply(alloc_probs[(last - 1) as usize]));
        }
        let mut s = R::zero();
        for t in self.t_min..=last {
            s += self.f.apply(alloc_probs[(t - 1) as usize]) * self.weight(t, last);
        }
        Ok(s)
    }
}

pub fn ap_statistic<R: Real>(traj: &TrialTrajectory<R>, spec: &ApTestSpec<R>) -> Result<R> {
    spec.evaluate(&traj.alloc_probs)
}

/// Frequentist comparator tests. Large statistics are evidence against
/// the null; all but the two-sided LR favour the experimental arm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Comparator {
    /// Signed-root deviance of the two-sample exponential likelihood ratio,
    /// one-sided.
    LikelihoodRatio,
    /// Root deviance, two-sided; p = P(chi2_1 > D).
    LikelihoodRatioTwoSided,
    /// -ln of the one-sided Fisher exact p-value.
    FisherExact,
    /// Known-variance two-sample z.
    ZTest,
}

impl Comparator {
    pub fn for_family(kind: FamilyKind) -> Self {
        match kind {
            FamilyKind::Exponential => Comparator::LikelihoodRatioTwoSided,
            FamilyKind::Bernoulli => Comparator::FisherExact,
            FamilyKind::Normal => Comparator::ZTest,
        }
    }

    pub fn family(self) -> FamilyKind {
        match self {
            Comparator::LikelihoodRatio | Comparator::LikelihoodRatioTwoSided => {
                FamilyKind::Exponential
            }
            Comparator::FisherExact => FamilyKind::Bernoulli,
            Comparator::ZTest => FamilyKind::Normal,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Comparator::LikelihoodRatio => "lr1",
            Comparator::LikelihoodRatioTwoSided => "lr",
            Comparator::FisherExact => "fisher",
            Comparator::ZTest => "z",
        }
    }

    /// Threshold on the statistic equivalent to `p <= alpha`.
    pub fn nominal_critical<R: Real>(self, alpha: R) -> R {
        match self {
            Comparator::LikelihoodRatio | Comparator::ZTest => normal_quantile(R::one() - alpha),
            Comparator::LikelihoodRatioTwoSided => normal_quantile(R::one() - alpha / R::lit(2.0)),
            // Exact p-values sit on a lattice; a relative slack of 1e-9 keeps
            // p == alpha on the rejecting side despite rounding.
            Comparator::FisherExact => -(alpha * R::lit(1.0 + 1e-9)).ln(),
        }
    }
}

/// Value of a test statistic on one trial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Observation<R> {
    pub statistic: R,
    pub p_value: Option<R>,
    /// Set when an arm is empty; the statistic is then -inf.
    pub degenerate: bool,
}

impl<R: Real> Observation<R> {
    fn degenerate() -> Self {
        Self {
            statistic: R::neg_infinity(),
            p_value: Some(R::one()),
            degenerate: true,
        }
    }
}

fn empty_arm<R: Real>(e: &ArmPosterior<R>, c: &ArmPosterior<R>) -> bool {
    e.n() == 0 || c.n() == 0
}

fn expect_family<R: Real>(p: &ArmPosterior<R>, want: FamilyKind, test: &str) -> Result<()> {
    if p.kind() != want {
        return Err(Error::InvalidTest(format!(
            "{test} needs {} data, got {}",
            want.name(),
            p.kind().name()
        )));
    }
    Ok(())
}

/// Two-sample exponential likelihood ratio from sufficient statistics.
/// Returns the signed root of the deviance and its upper normal tail.
pub fn lr_exponential_counts<R: Real>(n1: u64, time1: R, n0: u64, time0: R) -> Result<(R, R)> {
    if n1 == 0 || n0 == 0 {
        return Err(Error::DegenerateData(
            "likelihood ratio needs data on both arms".into(),
        ));
    }
    if !(time1 > R::zero() && time0 > R::zero()) {
        return Err(Error::DegenerateData(
            "likelihood ratio needs positive total time".into(),
        ));
    }
    let (a1, a0) = (R::from_count(n1), R::from_count(n0));
    let l1 = a1 / time1;
    let l0 = a0 / time0;
    let pooled = (a1 + a0) / (time1 + time0);
    let d = R::lit(2.0) * (a1 * (l1 / pooled).ln() + a0 * (l0 / pooled).ln());
    let root = d.max(R::zero()).sqrt();
    let signed = if l1 > l0 {
        root
    } else if l1 < l0 {
        -root
    } else {
        R::zero()
    };
    Ok((signed, normal_sf(signed)))
}

/// Two-sided version of [`lr_exponential`]: the statistic is √D.
pub fn lr_exponential_two_sided<R: Real>(traj: &TrialTrajectory<R>) -> Result<Observation<R>> {
    let one = lr_exponential(traj, Direction::LargerIsBetter)?;
    if one.degenerate {
        return Ok(one);
    }
    let root = one.statistic.abs();
    Ok(Observation {
        statistic: root,
        p_value: Some((R::lit(2.0) * normal_sf(root)).min(R::one())),
        degenerate: false,
    })
}

pub fn lr_exponential<R: Real>(
    traj: &TrialTrajectory<R>,
    direction: Direction,
) -> Result<Observation<R>> {
    let e = traj.final_posterior.arm(Arm::Experimental);
    let c = traj.final_posterior.arm(Arm::Control);
    expect_family(e, FamilyKind::Exponential, "likelihood ratio")?;
    if empty_arm(e, c) {
        return Ok(Observation::degenerate());
    }
    let (s, _) = lr_exponential_counts(e.n(), e.sufficient(), c.n(), c.sufficient())?;
    let s = match direction {
        Direction::LargerIsBetter => s,
        Direction::SmallerIsBetter => -s,
    };
    Ok(Observation {
        statistic: s,
        p_value: Some(normal_sf(s)),
        degenerate: false,
    })
}

fn ln_choose<R: Real>(n: u64, k: u64) -> R {
    ln_gamma(R::from_count(n + 1))
        - ln_gamma(R::from_count(k + 1))
        - ln_gamma(R::from_count(n - k + 1))
}

/// One-sided Fisher exact p-value P(S1 >= s1) given the margins, testing
/// whether arm 1 has the higher success probability.
pub fn fisher_exact_one_sided<R: Real>(n1: u64, s1: u64, n0: u64, s0: u64) -> Result<R> {
    Ok(fisher_exact_ln_p::<R>(n1, s1, n0, s0)?.exp())
}

/// Natural log of [`fisher_exact_one_sided`], usable when p underflows.
pub fn fisher_exact_ln_p<R: Real>(n1: u64, s1: u64, n0: u64, s0: u64) -> Result<R> {
    if s1 > n1 || s0 > n0 {
        return Err(Error::InvalidTest(format!(
            "success counts exceed arm sizes: {s1}/{n1}, {s0}/{n0}"
        )));
    }
    let total = n1 + n0;
    let k = s1 + s0;
    let x_max = n1.min(k);
    let x_min = n1.saturating_sub(total - k);
    if s1 <= x_min {
        return Ok(R::zero());
    }
    let log_first =
        ln_choose::<R>(k, s1) + ln_choose::<R>(total - k, n1 - s1) - ln_choose::<R>(total, n1);
    let control_failures = n0 - s0;
    let ln_p = ln_scaled_series(log_first, x_max - s1 + 1, true, |j| {
        let x = s1 + j;
        R::from_count((k - x) * (n1 - x))
            / R::from_count((x + 1) * (control_failures + (x - s1) + 1))
    });
    Ok(ln_p.min(R::zero()))
}

pub fn fisher_exact<R: Real>(
    traj: &TrialTrajectory<R>,
    direction: Direction,
) -> Result<Observation<R>> {
    let e = traj.final_posterior.arm(Arm::Experimental);
    let c = traj.final_posterior.arm(Arm::Control);
    expect_family(e, FamilyKind::Bernoulli, "Fisher exact test")?;
    if empty_arm(e, c) {
        return Ok(Observation::degenerate());
    }
    let counts = |p: &ArmPosterior<R>| match *p {
        ArmPosterior::Bernoulli { n, successes } => match direction {
            Direction::LargerIsBetter => (n, successes),
            Direction::SmallerIsBetter => (n, n - successes),
        },
        _ => unreachable!(),
    };
    let (n1, s1) = counts(e);
    let (n0, s0) = counts(c);
    let ln_p: R = fisher_exact_ln_p(n1, s1, n0, s0)?;
    Ok(Observation {
        statistic: -ln_p,
        p_value: Some(ln_p.exp()),
        degenerate: false,
    })
}

/// Known-variance two-sample z statistic and its upper-tail p-value.
pub fn z_test_counts<R: Real>(
    n1: u64,
    sum1: R,
    sd1: R,
    n0: u64,
    sum0: R,
    sd0: R,
) -> Result<(R, R)> {
    if n1 == 0 || n0 == 0 {
        return Err(Error::DegenerateData(
            "z test needs data on both arms".into(),
        ));
    }
    if !(sd1 > R::zero() && sd0 > R::zero()) {
        return Err(Error::InvalidTest(
            "z test needs positive standard deviations".into(),
        ));
    }
    let (a1, a0) = (R::from_count(n1), R::from_count(n0));
    let se = (sd1 * sd1 / a1 + sd0 * sd0 / a0).sqrt();
    let z = (sum1 / a1 - sum0 / a0) / se;
    Ok((z, normal_sf(z)))
}

pub fn z_test_normal<R: Real>(
    traj: &TrialTrajectory<R>,
    direction: Direction,
) -> Result<Observation<R>> {
    let e = traj.final_posterior.arm(Arm::Experimental);
    let c = traj.final_posterior.arm(Arm::Control);
    expect_family(e, FamilyKind::Normal, "z test")?;
    if empty_arm(e, c) {
        return Ok(Observation::degenerate());
    }
    let parts = |p: &ArmPosterior<R>| match *p {
        ArmPosterior::Normal { n, sum, sd } => (n, sum, sd),
        _ => unreachable!(),
    };
    let (n1, sum1, sd1) = parts(e);
    let (n0, sum0, sd0) = parts(c);
    let (z, _) = z_test_counts(n1, sum1, sd1, n0, sum0, sd0)?;
    let z = match direction {
        Direction::LargerIsBetter => z,
        Direction::SmallerIsBetter => -z,
    };
    Ok(Observation {
        statistic: z,
        p_value: Some(normal_sf(z)),
        degenerate: false,
    })
}

/// Any test the harness can run on a trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TestSpec<R> {
    Ap { label: String, spec: ApTestSpec<R> },
    Comparator(Comparator),
}

impl<R: Real> TestSpec<R> {
    pub fn original() -> Self {
        TestSpec::Ap {
            label: "original".into(),
            spec: ApTestSpec::original(),
        }
    }

    pub fn timedirect() -> Self {
        TestSpec::Ap {
            label: "timedirect".into(),
            spec: ApTestSpec::timedirect(),
        }
    }

    pub fn last_block() -> Self {
        TestSpec::Ap {
            label: "lastblock".into(),
            spec: ApTestSpec::last_block(1),
        }
    }

    /// The three named AP tests plus the family's comparator.
    pub fn standard_set(kind: FamilyKind) -> Vec<Self> {
        vec![
            Self::original(),
            Self::timedirect(),
            Self::last_block(),
            TestSpec::Comparator(Comparator::for_family(kind)),
        ]
    }

    pub fn label(&self) -> &str {
        match self {
            TestSpec::Ap { label, .. } => label,
            TestSpec::Comparator(c) => c.label(),
        }
    }

    pub fn is_ap(&self) -> bool {
        matches!(self, TestSpec::Ap { .. })
    }

    pub fn is_discrete(&self) -> bool {
        match self {
            TestSpec::Ap { spec, .. } => spec.is_discrete(),
            TestSpec::Comparator(c) => *c == Comparator::FisherExact,
        }
    }

    /// Fails when the test cannot be applied to this design and family.
    pub fn check(&self, num_blocks: u64, kind: FamilyKind) -> Result<()> {
        match self {
            TestSpec::Ap { spec, .. } => spec.check_blocks(num_blocks),
            TestSpec::Comparator(c) if c.family() != kind => Err(Error::InvalidTest(format!(
                "{} does not apply to {} outcomes",
                c.label(),
                kind.name()
            ))),
            TestSpec::Comparator(_) => Ok(()),
        }
    }

    pub fn observe(
        &self,
        traj: &TrialTrajectory<R>,
        model: &OutcomeModel<R>,
    ) -> Result<Observation<R>> {
        match self {
            TestSpec::Ap { spec, .. } => Ok(Observation {
                statistic: ap_statistic(traj, spec)?,
                p_value: None,
                degenerate: false,
            }),
            TestSpec::Comparator(Comparator::LikelihoodRatio) => {
                lr_exponential(traj, model.direction())
            }
            TestSpec::Comparator(Comparator::LikelihoodRatioTwoSided) => {
                lr_exponential_two_sided(traj)
            }
            TestSpec::Comparator(Comparator::FisherExact) => fisher_exact(traj, model.direction()),
            TestSpec::Comparator(Comparator::ZTest) => z_test_normal(traj, model.direction()),
        }
    }
}

/// Outcome of applying a test with a given critical value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestDecisionRecord<R> {
    pub test_name: String,
    pub statistic: R,
    pub critical_value: R,
    pub rejected: bool,
    pub nominal_alpha: R,
    pub degenerate: bool,
}

impl<R: Real> TestDecisionRecord<R> {
    /// Rejects iff the statistic strictly exceeds the critical value.
    pub fn decide(
        test_name: &str,
        obs: &Observation<R>,
        critical_value: R,
        nominal_alpha: R,
    ) -> Self {
        Self {
            test_name: test_name.to_string(),
            statistic: obs.statistic,
            critical_value,
            rejected: !obs.degenerate && obs.statistic > critical_value,
            nominal_alpha,
            degenerate: obs.degenerate,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::allocation::{simulate_trial, DesignConfig, DesignKind};
    use crate::outcome::{PosteriorState, PriorSpec};
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const PI: [f64; 4] = [0.6, 0.7, 0.4, 0.8];

    #[test]
    fn named_presets_on_a_short_trajectory() {
        assert_eq!(ApTestSpec::original().evaluate(&PI).unwrap(), 3.0);
        assert_abs_diff_eq!(
            ApTestSpec::timedirect().evaluate(&PI).unwrap(),
            6.4,
            epsilon = 1e-12
        );
        assert_eq!(ApTestSpec::last_block(1).evaluate(&PI).unwrap(), 0.8);
        assert_eq!(ApTestSpec::last_block(3).evaluate(&PI).unwrap(), 0.8);
    }

    #[test]
    fn indicator_ties() {
        let pi = [0.5f64, 0.5];
        assert_eq!(ApTestSpec::original().evaluate(&pi).unwrap(), 0.0);
        let loose = ApTestSpec::new(
            Transform::Indicator {
                threshold: 0.5,
                strict: false,
            },
            Weights::Ones,
            1,
        )
        .unwrap();
        assert_eq!(loose.evaluate(&pi).unwrap(), 2.0);
    }

    #[test]
    fn t_min_drops_early_blocks() {
        let s = ApTestSpec {
            t_min: 3,
            ..ApTestSpec::original()
        };
        assert_eq!(s.evaluate(&PI).unwrap(), 1.0);
        assert_eq!(s.max_attainable(3), 2.0);
        let s = ApTestSpec {
            t_min: 5,
            ..ApTestSpec::original()
        };
        assert!(s.evaluate(&PI).is_err());
    }

    #[test]
    fn custom_weights_are_checked() {
        let s = ApTestSpec::new(Transform::Identity, Weights::Custom(vec![1.0, 2.0]), 1).unwrap();
        assert!(s.evaluate(&PI).is_err());
        assert!(
            ApTestSpec::new(Transform::Identity, Weights::Custom(vec![0.0f64, 0.0]), 1).is_err()
        );
        assert!(
            ApTestSpec::new(Transform::Identity, Weights::Custom(vec![1.0, -1.0f64]), 1).is_err()
        );
        assert!(ApTestSpec::new(Transform::Identity, Weights::Custom(vec![f64::NAN]), 1).is_err());
        let s = ApTestSpec::new(
            Transform::Identity,
            Weights::Custom(vec![0.0, 0.0, 0.0, 1.0]),
            1,
        )
        .unwrap();
        assert_eq!(s.evaluate(&PI).unwrap(), 0.8);
    }

    #[test]
    fn lr_null_point_and_oracle() {
        let (s, p) = lr_exponential_counts(3, 6.0f64, 5, 10.0).unwrap();
        assert_eq!(s, 0.0);
        assert_eq!(p, 0.5);

        // Direct log-likelihood evaluation at the MLEs.
        let ll = |n: f64, y: f64, l: f64| n * l.ln() - l * y;
        let (s, _) = lr_exponential_counts(1, 1.0f64, 1, 2.0).unwrap();
        let d = 2.0 * (ll(1.0, 1.0, 1.0) + ll(1.0, 2.0, 0.5) - ll(2.0, 3.0, 2.0 / 3.0));
        assert!(d > 0.0 && s > 0.0);
        assert_abs_diff_eq!(s, d.sqrt(), epsilon = 1e-14);
        assert!(lr_exponential_counts(0, 0.0f64, 1, 1.0).is_err());
    }

    #[test]
    fn two_sided_lr_doubles_the_tail() {
        let design = DesignConfig::new(30, 10, 2, 1, DesignKind::StandardBrar).unwrap();
        let model = OutcomeModel::exponential(1.0f64, 1.5).unwrap();
        let traj = simulate_trial(
            &design,
            &model,
            &PriorSpec::vague_gamma(),
            &mut ChaCha8Rng::seed_from_u64(8),
        )
        .unwrap();
        let one = lr_exponential(&traj, Direction::LargerIsBetter).unwrap();
        let two = lr_exponential_two_sided(&traj).unwrap();
        assert_eq!(two.statistic, one.statistic.abs());
        let p1 = one.p_value.unwrap();
        let expected = 2.0 * p1.min(1.0 - p1);
        assert_abs_diff_eq!(two.p_value.unwrap(), expected, epsilon = 1e-12);
        let c: f64 = Comparator::LikelihoodRatioTwoSided.nominal_critical(0.05);
        assert_abs_diff_eq!(c, 1.959963984540054, epsilon = 1e-9);
    }

    #[test]
    fn fisher_small_tables() {
        let p: f64 = fisher_exact_one_sided(3, 3, 3, 0).unwrap();
        assert_abs_diff_eq!(p, 0.05, epsilon = 1e-15);
        let p: f64 = fisher_exact_one_sided(4, 4, 4, 4).unwrap();
        assert_eq!(p, 1.0);
        let p: f64 = fisher_exact_one_sided(4, 0, 4, 0).unwrap();
        assert_eq!(p, 1.0);
        let p: f64 = fisher_exact_one_sided(0, 0, 4, 2).unwrap();
        assert_eq!(p, 1.0);
        assert!(fisher_exact_one_sided::<f64>(2, 3, 1, 0).is_err());
        let nominal: f64 = Comparator::FisherExact.nominal_critical(0.05);
        assert!(-(0.05f64).ln() > nominal);
    }

    #[test]
    fn fisher_large_margins_stay_in_range() {
        let p: f64 = fisher_exact_one_sided(200, 200, 200, 0).unwrap();
        assert!(p > 0.0 && p < 1e-100);
        // 1 / C(1200, 600) underflows; its logarithm does not.
        let ln_p: f64 = fisher_exact_ln_p(600, 600, 600, 0).unwrap();
        assert!(ln_p.is_finite() && ln_p < -800.0);
        let p: f64 = fisher_exact_one_sided(600, 300, 600, 300).unwrap();
        assert!(p > 0.5 && p < 0.6);
    }

    #[test]
    fn z_unit_construction() {
        let (z, p) = z_test_counts(4, 8.0f64, 1.0, 4, 8.0, 1.0).unwrap();
        assert_eq!((z, p), (0.0, 0.5));
        let se = (4.0f64 / 4.0 + 1.0 / 9.0).sqrt();
        let (z, _) = z_test_counts(4, 4.0 * (1.0 + se), 2.0, 9, 9.0, 1.0).unwrap();
        assert_abs_diff_eq!(z, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn degenerate_arm_never_rejects() {
        let design = DesignConfig::new(4, 2, 1, 1, DesignKind::StandardBrar).unwrap();
        let model = OutcomeModel::exponential(1.0, 1.0).unwrap();
        let mut traj = simulate_trial(
            &design,
            &model,
            &PriorSpec::vague_gamma(),
            &mut ChaCha8Rng::seed_from_u64(1),
        )
        .unwrap();
        traj.final_posterior = PosteriorState::new(&model)
            .updated(Arm::Experimental, 1.0)
            .unwrap();
        let t = TestSpec::Comparator(Comparator::LikelihoodRatio);
        let obs = t.observe(&traj, &model).unwrap();
        assert!(obs.degenerate);
        let two = TestSpec::Comparator(Comparator::LikelihoodRatioTwoSided);
        assert!(two.observe(&traj, &model).unwrap().degenerate);
        let rec = TestDecisionRecord::decide(t.label(), &obs, -1e300, 0.05);
        assert!(!rec.rejected && rec.degenerate);
    }

    #[test]
    fn comparator_family_mismatch() {
        let t: TestSpec<f64> = TestSpec::Comparator(Comparator::FisherExact);
        assert!(t.check(10, FamilyKind::Exponential).is_err());
        assert!(t.check(10, FamilyKind::Bernoulli).is_ok());
    }

    #[test]
    fn decision_is_strict() {
        let obs = Observation {
            statistic: 2.0f64,
            p_value: None,
            degenerate: false,
        };
        assert!(!TestDecisionRecord::decide("x", &obs, 2.0, 0.05).rejected);
        assert!(TestDecisionRecord::decide("x", &obs, 1.999, 0.05).rejected);
    }
}
