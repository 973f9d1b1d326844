//! Outcome families, conjugate priors, posterior bookkeeping and the
//! posterior probability that the experimental arm is the better one.

use rand::Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature;
use crate::scalar::{open_unit, Real};
use crate::special::{
    beta_regularized, gamma_lower_regularized, ln_beta, ln_gamma, normal_cdf, normal_pdf,
    scaled_series,
};

/// Treatment arm. `Control` is arm 0, `Experimental` is arm 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Arm {
    Control,
    Experimental,
}

impl Arm {
    #[inline]
    pub fn index(self) -> usize {
        match self {
            Arm::Control => 0,
            Arm::Experimental => 1,
        }
    }

    #[inline]
    pub fn from_index(i: usize) -> Arm {
        if i == 0 {
            Arm::Control
        } else {
            Arm::Experimental
        }
    }

    #[inline]
    pub fn other(self) -> Arm {
        match self {
            Arm::Control => Arm::Experimental,
            Arm::Experimental => Arm::Control,
        }
    }
}

/// Which direction of the family's natural parameter (rate, success
/// probability or mean) is beneficial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    LargerIsBetter,
    SmallerIsBetter,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FamilyKind {
    Exponential,
    Bernoulli,
    Normal,
}

impl FamilyKind {
    pub fn name(self) -> &'static str {
        match self {
            FamilyKind::Exponential => "exponential",
            FamilyKind::Bernoulli => "bernoulli",
            FamilyKind::Normal => "normal",
        }
    }
}

/// Data-generating distribution of each arm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Family<R> {
    Exponential {
        rate_control: R,
        rate_experimental: R,
    },
    Bernoulli {
        p_control: R,
        p_experimental: R,
    },
    NormalKnownVar {
        mean_control: R,
        mean_experimental: R,
        sd_control: R,
        sd_experimental: R,
    },
}

/// A validated two-arm outcome model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OutcomeModel<R> {
    family: Family<R>,
    direction: Direction,
}

fn positive<R: Real>(what: &str, x: R) -> Result<()> {
    if x.is_finite() && x > R::zero() {
        Ok(())
    } else {
        Err(Error::InvalidModel(format!(
            "{what} must be finite and > 0, got {x}"
        )))
    }
}

impl<R: Real> OutcomeModel<R> {
    pub fn new(family: Family<R>, direction: Direction) -> Result<Self> {
        match family {
            Family::Exponential {
                rate_control,
                rate_experimental,
            } => {
                positive("rate_control", rate_control)?;
                positive("rate_experimental", rate_experimental)?;
            }
            Family::Bernoulli {
                p_control,
                p_experimental,
            } => {
                for (what, p) in [("p_control", p_control), ("p_experimental", p_experimental)] {
                    if !(p > R::zero() && p < R::one()) {
                        return Err(Error::InvalidModel(format!(
                            "{what} must lie strictly inside (0, 1), got {p}"
                        )));
                    }
                }
            }
            Family::NormalKnownVar {
                mean_control,
                mean_experimental,
                sd_control,
                sd_experimental,
            } => {
                if !mean_control.is_finite() || !mean_experimental.is_finite() {
                    return Err(Error::InvalidModel("normal means must be finite".into()));
                }
                positive("sd_control", sd_control)?;
                positive("sd_experimental", sd_experimental)?;
            }
        }
        Ok(Self { family, direction })
    }

    /// Exponential times to event where a higher rate is beneficial.
    pub fn exponential(rate_control: R, rate_experimental: R) -> Result<Self> {
        Self::new(
            Family::Exponential {
                rate_control,
                rate_experimental,
            },
            Direction::LargerIsBetter,
        )
    }

    /// Binary outcome where success is beneficial.
    pub fn bernoulli(p_control: R, p_experimental: R) -> Result<Self> {
        Self::new(
            Family::Bernoulli {
                p_control,
                p_experimental,
            },
            Direction::LargerIsBetter,
        )
    }

    pub fn normal(
        mean_control: R,
        mean_experimental: R,
        sd_control: R,
        sd_experimental: R,
    ) -> Result<Self> {
        Self::new(
            Family::NormalKnownVar {
                mean_control,
                mean_experimental,
                sd_control,
                sd_experimental,
            },
            Direction::LargerIsBetter,
        )
    }

    pub fn with_direction(mut self, direction: Direction) -> Self {
        self.direction = direction;
        self
    }

    pub fn family(&self) -> &Family<R> {
        &self.family
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn kind(&self) -> FamilyKind {
        match self.family {
            Family::Exponential { .. } => FamilyKind::Exponential,
            Family::Bernoulli { .. } => FamilyKind::Bernoulli,
            Family::NormalKnownVar { .. } => FamilyKind::Normal,
        }
    }

    /// Natural parameter of an arm: rate, success probability or mean.
    pub fn parameter(&self, arm: Arm) -> R {
        match (self.family, arm) {
            (Family::Exponential { rate_control, .. }, Arm::Control) => rate_control,
            (
                Family::Exponential {
                    rate_experimental, ..
                },
                Arm::Experimental,
            ) => rate_experimental,
            (Family::Bernoulli { p_control, .. }, Arm::Control) => p_control,
            (Family::Bernoulli { p_experimental, .. }, Arm::Experimental) => p_experimental,
            (Family::NormalKnownVar { mean_control, .. }, Arm::Control) => mean_control,
            (
                Family::NormalKnownVar {
                    mean_experimental, ..
                },
                Arm::Experimental,
            ) => mean_experimental,
        }
    }

    /// Known outcome standard deviation (normal family only).
    pub fn known_sd(&self, arm: Arm) -> Option<R> {
        match self.family {
            Family::NormalKnownVar {
                sd_control,
                sd_experimental,
                ..
            } => Some(if arm == Arm::Control {
                sd_control
            } else {
                sd_experimental
            }),
            _ => None,
        }
    }

    /// Expected outcome of a subject on `arm`.
    pub fn mean_outcome(&self, arm: Arm) -> R {
        match self.family {
            Family::Exponential { .. } => R::one() / self.parameter(arm),
            _ => self.parameter(arm),
        }
    }

    /// The strictly better arm, or `None` when the arms are identical in
    /// their natural parameter.
    pub fn better_arm(&self) -> Option<Arm> {
        let c = self.parameter(Arm::Control);
        let e = self.parameter(Arm::Experimental);
        if c == e {
            return None;
        }
        let exp_larger = e > c;
        Some(match (self.direction, exp_larger) {
            (Direction::LargerIsBetter, true) | (Direction::SmallerIsBetter, false) => {
                Arm::Experimental
            }
            _ => Arm::Control,
        })
    }

    /// True when the arms share the natural parameter (the tested null).
    /// Normal arms may keep different known standard deviations.
    pub fn arms_equal(&self) -> bool {
        self.parameter(Arm::Control) == self.parameter(Arm::Experimental)
    }

    /// Same family and direction with both arms set to `value`; normal arms
    /// keep their standard deviations.
    pub fn with_equal_arms(&self, value: R) -> Result<Self> {
        let family = match self.family {
            Family::Exponential { .. } => Family::Exponential {
                rate_control: value,
                rate_experimental: value,
            },
            Family::Bernoulli { .. } => Family::Bernoulli {
                p_control: value,
                p_experimental: value,
            },
            Family::NormalKnownVar {
                sd_control,
                sd_experimental,
                ..
            } => Family::NormalKnownVar {
                mean_control: value,
                mean_experimental: value,
                sd_control,
                sd_experimental,
            },
        };
        Self::new(family, self.direction)
    }

    /// Model with the arm labels exchanged.
    pub fn swapped(&self) -> Self {
        let family = match self.family {
            Family::Exponential {
                rate_control,
                rate_experimental,
            } => Family::Exponential {
                rate_control: rate_experimental,
                rate_experimental: rate_control,
            },
            Family::Bernoulli {
                p_control,
                p_experimental,
            } => Family::Bernoulli {
                p_control: p_experimental,
                p_experimental: p_control,
            },
            Family::NormalKnownVar {
                mean_control,
                mean_experimental,
                sd_control,
                sd_experimental,
            } => Family::NormalKnownVar {
                mean_control: mean_experimental,
                mean_experimental: mean_control,
                sd_control: sd_experimental,
                sd_experimental: sd_control,
            },
        };
        Self {
            family,
            direction: self.direction,
        }
    }

    /// Draws one outcome for a subject on `arm`.
    pub fn sample_outcome<G: Rng + ?Sized>(&self, arm: Arm, rng: &mut G) -> R {
        match self.family {
            Family::Exponential { .. } => {
                let e: f64 = rng.sample(Exp1);
                R::lit(e) / self.parameter(arm)
            }
            Family::Bernoulli { .. } => {
                let u: f64 = rng.random();
                if u < self.parameter(arm).as_f64() {
                    R::one()
                } else {
                    R::zero()
                }
            }
            Family::NormalKnownVar { .. } => {
                let z: f64 = rng.sample(StandardNormal);
                self.parameter(arm) + self.known_sd(arm).unwrap() * R::lit(z)
            }
        }
    }

    /// Short human-readable description used in export headers.
    pub fn describe(&self) -> String {
        let dir = match self.direction {
            Direction::LargerIsBetter => "larger-better",
            Direction::SmallerIsBetter => "smaller-better",
        };
        match self.family {
            Family::Exponential {
                rate_control,
                rate_experimental,
            } => format!("exponential(rate0={rate_control},rate1={rate_experimental},{dir})"),
            Family::Bernoulli {
                p_control,
                p_experimental,
            } => format!("bernoulli(p0={p_control},p1={p_experimental},{dir})"),
            Family::NormalKnownVar {
                mean_control,
                mean_experimental,
                sd_control,
                sd_experimental,
            } => format!(
                "normal(mean0={mean_control},mean1={mean_experimental},sd0={sd_control},sd1={sd_experimental},{dir})"
            ),
        }
    }
}

/// Conjugate prior, applied identically to both arms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PriorSpec<R> {
    Gamma { shape: R, rate: R },
    Beta { alpha: R, beta: R },
    Normal { mean: R, variance: R },
}

impl<R: Real> PriorSpec<R> {
    /// The vague Gamma(1, 0.001) prior for exponential rates.
    pub fn vague_gamma() -> Self {
        PriorSpec::Gamma {
            shape: R::one(),
            rate: R::lit(0.001),
        }
    }

    /// Uniform Beta(1, 1) prior for success probabilities.
    pub fn uniform_beta() -> Self {
        PriorSpec::Beta {
            alpha: R::one(),
            beta: R::one(),
        }
    }

    /// Normal(0, 1e6) prior for means.
    pub fn vague_normal() -> Self {
        PriorSpec::Normal {
            mean: R::zero(),
            variance: R::lit(1e6),
        }
    }

    pub fn default_for(kind: FamilyKind) -> Self {
        match kind {
            FamilyKind::Exponential => Self::vague_gamma(),
            FamilyKind::Bernoulli => Self::uniform_beta(),
            FamilyKind::Normal => Self::vague_normal(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let check = |what: &str, x: R| {
            if x.is_finite() && x > R::zero() {
                Ok(())
            } else {
                Err(Error::InvalidPrior(format!(
                    "{what} must be finite and > 0, got {x}"
                )))
            }
        };
        match *self {
            PriorSpec::Gamma { shape, rate } => {
                check("gamma shape", shape)?;
                check("gamma rate", rate)
            }
            PriorSpec::Beta { alpha, beta } => {
                check("beta alpha", alpha)?;
                check("beta beta", beta)
            }
            PriorSpec::Normal { mean, variance } => {
                if !mean.is_finite() {
                    return Err(Error::InvalidPrior(
                        "normal prior mean must be finite".into(),
                    ));
                }
                check("normal prior variance", variance)
            }
        }
    }

    /// Checks that the prior is conjugate to `kind`.
    pub fn check_family(&self, kind: FamilyKind) -> Result<()> {
        let ok = matches!(
            (self, kind),
            (PriorSpec::Gamma { .. }, FamilyKind::Exponential)
                | (PriorSpec::Beta { .. }, FamilyKind::Bernoulli)
                | (PriorSpec::Normal { .. }, FamilyKind::Normal)
        );
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidPrior(format!(
                "{self:?} is not conjugate to the {} family",
                kind.name()
            )))
        }
    }

    pub fn describe(&self) -> String {
        match *self {
            PriorSpec::Gamma { shape, rate } => format!("gamma({shape},{rate})"),
            PriorSpec::Beta { alpha, beta } => format!("beta({alpha},{beta})"),
            PriorSpec::Normal { mean, variance } => format!("normal({mean},{variance})"),
        }
    }
}

/// Sufficient statistics of one arm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum ArmPosterior<R> {
    Exponential { n: u64, total_time: R },
    Bernoulli { n: u64, successes: u64 },
    Normal { n: u64, sum: R, sd: R },
}

impl<R: Real> ArmPosterior<R> {
    pub fn empty(model: &OutcomeModel<R>, arm: Arm) -> Self {
        match model.kind() {
            FamilyKind::Exponential => ArmPosterior::Exponential {
                n: 0,
                total_time: R::zero(),
            },
            FamilyKind::Bernoulli => ArmPosterior::Bernoulli { n: 0, successes: 0 },
            FamilyKind::Normal => ArmPosterior::Normal {
                n: 0,
                sum: R::zero(),
                sd: model.known_sd(arm).unwrap(),
            },
        }
    }

    pub fn n(&self) -> u64 {
        match *self {
            ArmPosterior::Exponential { n, .. }
            | ArmPosterior::Bernoulli { n, .. }
            | ArmPosterior::Normal { n, .. } => n,
        }
    }

    /// Total time, success count or outcome sum.
    pub fn sufficient(&self) -> R {
        match *self {
            ArmPosterior::Exponential { total_time, .. } => total_time,
            ArmPosterior::Bernoulli { successes, .. } => R::from_count(successes),
            ArmPosterior::Normal { sum, .. } => sum,
        }
    }

    pub fn kind(&self) -> FamilyKind {
        match self {
            ArmPosterior::Exponential { .. } => FamilyKind::Exponential,
            ArmPosterior::Bernoulli { .. } => FamilyKind::Bernoulli,
            ArmPosterior::Normal { .. } => FamilyKind::Normal,
        }
    }

    /// Adds one observed outcome.
    pub fn observe(&mut self, outcome: R) -> Result<()> {
        match self {
            ArmPosterior::Exponential { n, total_time } => {
                if !(outcome.is_finite() && outcome > R::zero()) {
                    return Err(Error::IncompatibleOutcome {
                        family: "exponential",
                        value: outcome.as_f64(),
                    });
                }
                *n += 1;
                *total_time += outcome;
            }
            ArmPosterior::Bernoulli { n, successes } => {
                if outcome == R::one() {
                    *successes += 1;
                } else if outcome != R::zero() {
                    return Err(Error::IncompatibleOutcome {
                        family: "bernoulli",
                        value: outcome.as_f64(),
                    });
                }
                *n += 1;
            }
            ArmPosterior::Normal { n, sum, .. } => {
                if !outcome.is_finite() {
                    return Err(Error::IncompatibleOutcome {
                        family: "normal",
                        value: outcome.as_f64(),
                    });
                }
                *n += 1;
                *sum += outcome;
            }
        }
        Ok(())
    }
}

/// Posterior summaries of both arms, indexed by [`Arm::index`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PosteriorState<R> {
    pub arms: [ArmPosterior<R>; 2],
}

impl<R: Real> PosteriorState<R> {
    pub fn new(model: &OutcomeModel<R>) -> Self {
        Self {
            arms: [
                ArmPosterior::empty(model, Arm::Control),
                ArmPosterior::empty(model, Arm::Experimental),
            ],
        }
    }

    pub fn arm(&self, arm: Arm) -> &ArmPosterior<R> {
        &self.arms[arm.index()]
    }

    /// Returns the state after observing `outcome` on `arm`.
    pub fn updated(mut self, arm: Arm, outcome: R) -> Result<Self> {
        self.arms[arm.index()].observe(outcome)?;
        Ok(self)
    }

    pub fn update(&mut self, arm: Arm, outcome: R) -> Result<()> {
        self.arms[arm.index()].observe(outcome)
    }

    pub fn total_n(&self) -> u64 {
        self.arms[0].n() + self.arms[1].n()
    }
}

/// Convenience wrapper over [`PosteriorState::updated`].
pub fn update_posterior<R: Real>(
    state: PosteriorState<R>,
    arm: Arm,
    outcome: R,
) -> Result<PosteriorState<R>> {
    state.updated(arm, outcome)
}

/// Posterior probability that the experimental arm's natural parameter is
/// better than the control arm's, given their sufficient statistics.
///
/// Gamma and Beta posteriors with integer parameters use exact finite
/// sums; other shapes are integrated numerically to an absolute tolerance
/// of 1e-10. The normal family uses the Gaussian closed form. The result is
/// clamped to the open unit interval.
pub fn superiority_probability<R: Real>(
    post_exp: &ArmPosterior<R>,
    post_ctrl: &ArmPosterior<R>,
    prior: &PriorSpec<R>,
    direction: Direction,
) -> Result<R> {
    prior.validate()?;
    superiority_unchecked(post_exp, post_ctrl, prior, direction)
}

pub(crate) fn superiority_unchecked<R: Real>(
    post_exp: &ArmPosterior<R>,
    post_ctrl: &ArmPosterior<R>,
    prior: &PriorSpec<R>,
    direction: Direction,
) -> Result<R> {
    let (better, worse) = match direction {
        Direction::LargerIsBetter => (post_exp, post_ctrl),
        Direction::SmallerIsBetter => (post_ctrl, post_exp),
    };
    let p = larger_parameter_probability(better, worse, prior, true)?;
    Ok(open_unit(p))
}

/// Same quantity as [`superiority_probability`] but always evaluated as the
/// one-dimensional integral of the experimental posterior density times the
/// control posterior CDF. Independent of the closed forms.
pub fn superiority_by_quadrature<R: Real>(
    post_exp: &ArmPosterior<R>,
    post_ctrl: &ArmPosterior<R>,
    prior: &PriorSpec<R>,
    direction: Direction,
) -> Result<R> {
    prior.validate()?;
    let (better, worse) = match direction {
        Direction::LargerIsBetter => (post_exp, post_ctrl),
        Direction::SmallerIsBetter => (post_ctrl, post_exp),
    };
    larger_parameter_probability(better, worse, prior, false)
}

fn is_integer<R: Real>(x: R) -> bool {
    x.fract() == R::zero() && x < R::lit(4.5e15)
}

fn mismatch(prior_kind: &str, post: FamilyKind) -> Error {
    Error::InvalidPrior(format!(
        "{prior_kind} prior cannot be combined with {} posteriors",
        post.name()
    ))
}

/// P(θ_x > θ_y) for the posteriors of the parameters of arms x and y.
fn larger_parameter_probability<R: Real>(
    x: &ArmPosterior<R>,
    y: &ArmPosterior<R>,
    prior: &PriorSpec<R>,
    allow_closed_form: bool,
) -> Result<R> {
    match (*prior, *x, *y) {
        (
            PriorSpec::Gamma { shape, rate },
            ArmPosterior::Exponential {
                n: nx,
                total_time: tx,
            },
            ArmPosterior::Exponential {
                n: ny,
                total_time: ty,
            },
        ) => {
            let ax = shape + R::from_count(nx);
            let bx = rate + tx;
            let ay = shape + R::from_count(ny);
            let by = rate + ty;
            if allow_closed_form && is_integer(shape) {
                Ok(gamma_exceeds_closed(
                    ax.to_u64().unwrap(),
                    bx,
                    ay.to_u64().unwrap(),
                    by,
                ))
            } else {
                gamma_exceeds_quadrature(ax, bx, ay, by)
            }
        }
        (
            PriorSpec::Beta { alpha, beta },
            ArmPosterior::Bernoulli {
                n: nx,
                successes: sx,
            },
            ArmPosterior::Bernoulli {
                n: ny,
                successes: sy,
            },
        ) => {
            let ax = alpha + R::from_count(sx);
            let bx = beta + R::from_count(nx - sx);
            let ay = alpha + R::from_count(sy);
            let by = beta + R::from_count(ny - sy);
            if allow_closed_form && is_integer(alpha) && is_integer(beta) {
                Ok(beta_exceeds_closed(
                    ax.to_u64().unwrap(),
                    bx.to_u64().unwrap(),
                    ay.to_u64().unwrap(),
                    by.to_u64().unwrap(),
                ))
            } else {
                beta_exceeds_quadrature(ax, bx, ay, by)
            }
        }
        (
            PriorSpec::Normal { mean, variance },
            ArmPosterior::Normal {
                n: nx,
                sum: sx,
                sd: dx,
            },
            ArmPosterior::Normal {
                n: ny,
                sum: sy,
                sd: dy,
            },
        ) => {
            let (mx, vx) = normal_posterior(mean, variance, nx, sx, dx);
            let (my, vy) = normal_posterior(mean, variance, ny, sy, dy);
            if allow_closed_form {
                Ok(normal_cdf((mx - my) / (vx + vy).sqrt()))
            } else {
                normal_exceeds_quadrature(mx, vx, my, vy)
            }
        }
        (PriorSpec::Gamma { .. }, p, _) => Err(mismatch("gamma", p.kind())),
        (PriorSpec::Beta { .. }, p, _) => Err(mismatch("beta", p.kind())),
        (PriorSpec::Normal { .. }, p, _) => Err(mismatch("normal", p.kind())),
    }
}

/// Known-variance conjugate update: returns posterior (mean, variance).
pub fn normal_posterior<R: Real>(prior_mean: R, prior_var: R, n: u64, sum: R, sd: R) -> (R, R) {
    let data_precision = R::from_count(n) / (sd * sd);
    let precision = R::one() / prior_var + data_precision;
    let mean = (prior_mean / prior_var + sum / (sd * sd)) / precision;
    (mean, R::one() / precision)
}

/// P(X > Y) for X ~ Gamma(ax, bx), Y ~ Gamma(ay, by) (shape, rate) with
/// integer shapes. Equals a negative-binomial CDF; the shorter of the two
/// complementary sums is evaluated.
fn gamma_exceeds_closed<R: Real>(ax: u64, bx: R, ay: u64, by: R) -> R {
    let total = bx + by;
    let p = by / total;
    let q = bx / total;
    if ax <= ay {
        // sum_{k < ax} C(ay + k - 1, k) p^ay q^k
        let ay_r = R::from_count(ay);
        scaled_series(ay_r * p.ln(), ax, true, |k| {
            let k = R::from_count(k);
            (ay_r + k) / (k + R::one()) * q
        })
    } else {
        let ax_r = R::from_count(ax);
        R::one()
            - scaled_series(ax_r * q.ln(), ay, true, |k| {
                let k = R::from_count(k);
                (ax_r + k) / (k + R::one()) * p
            })
    }
}

/// P(X > Y) for X ~ Beta(xa, xb), Y ~ Beta(ya, yb) as the sum over
/// i < xa of B(ya + i, yb + xb) / ((xb + i) B(1 + i, xb) B(ya, yb)).
fn beta_series<R: Real>(xa: u64, xb: u64, ya: u64, yb: u64) -> R {
    let (xb_r, ya_r, yb_r) = (R::from_count(xb), R::from_count(ya), R::from_count(yb));
    let log_first = ln_beta(ya_r, yb_r + xb_r) - ln_beta(ya_r, yb_r);
    scaled_series(log_first, xa, false, |i| {
        let i = R::from_count(i);
        (ya_r + i) * (xb_r + i) / ((ya_r + yb_r + xb_r + i) * (R::one() + i))
    })
}

/// P(X > Y) for integer Beta parameters, choosing the shortest of the four
/// equivalent series (by complement and by reflection p -> 1 - p).
fn beta_exceeds_closed<R: Real>(xa: u64, xb: u64, ya: u64, yb: u64) -> R {
    let shortest = xa.min(xb).min(ya).min(yb);
    if shortest == xa {
        beta_series(xa, xb, ya, yb)
    } else if shortest == ya {
        R::one() - beta_series(ya, yb, xa, xb)
    } else if shortest == yb {
        // P(X > Y) = P(1 - Y > 1 - X)
        beta_series(yb, ya, xb, xa)
    } else {
        R::one() - beta_series(xb, xa, yb, ya)
    }
}

fn sorted_breaks<R: Real>(lo: R, hi: R, center: R, sd: R) -> Vec<R> {
    let mut breaks = vec![lo, hi];
    for k in [-8.0, -4.0, -2.0, -1.0, 0.0, 1.0, 2.0, 4.0, 8.0] {
        let b = center + sd * R::lit(k);
        if b > lo && b < hi {
            breaks.push(b);
        }
    }
    breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    breaks.dedup();
    breaks
}

fn quadrature_tolerance<R: Real>() -> R {
    R::lit(1e-11)
}

fn gamma_exceeds_quadrature<R: Real>(ax: R, bx: R, ay: R, by: R) -> Result<R> {
    // x = e^s; integrand = f_X(x) x P(ay, by x)
    let log_norm = ax * bx.ln() - ln_gamma(ax);
    let center = (ax / bx).ln();
    let sd = R::one() / ax.sqrt();
    let two = R::lit(2.0);
    let lo = center - two - R::lit(40.0) / ax - R::lit(12.0) * sd;
    let hi = center + two + (R::one() + R::lit(100.0) / ax).ln() + R::lit(12.0) * sd;
    let f = |s: R| {
        let x = s.exp();
        let density = (log_norm + ax * s - bx * x).exp();
        density * gamma_lower_regularized(ay, by * x)
    };
    quadrature::integrate(
        f,
        &sorted_breaks(lo, hi, center, sd),
        quadrature_tolerance(),
    )
}

fn softplus<R: Real>(s: R) -> R {
    if s > R::zero() {
        s + (-s).exp().ln_1p()
    } else {
        s.exp().ln_1p()
    }
}

fn beta_exceeds_quadrature<R: Real>(xa: R, xb: R, ya: R, yb: R) -> Result<R> {
    // x = logistic(s); integrand = f_X(x) x (1 - x) I_x(ya, yb)
    let log_norm = -ln_beta(xa, xb);
    let center = (xa / xb).ln();
    let sd = (R::one() / xa + R::one() / xb).sqrt();
    let two = R::lit(2.0);
    let lo = center - two - R::lit(40.0) / xa - R::lit(12.0) * sd;
    let hi = center + two + R::lit(40.0) / xb + R::lit(12.0) * sd;
    let f = |s: R| {
        let ln_x = -softplus(-s);
        let ln_1mx = -softplus(s);
        let density = (log_norm + xa * ln_x + xb * ln_1mx).exp();
        density * beta_regularized(ya, yb, ln_x.exp())
    };
    quadrature::integrate(
        f,
        &sorted_breaks(lo, hi, center, sd),
        quadrature_tolerance(),
    )
}

fn normal_exceeds_quadrature<R: Real>(mx: R, vx: R, my: R, vy: R) -> Result<R> {
    let sdx = vx.sqrt();
    let sdy = vy.sqrt();
    let lo = mx - R::lit(40.0) * sdx;
    let hi = mx + R::lit(40.0) * sdx;
    let f = |x: R| normal_pdf((x - mx) / sdx) / sdx * normal_cdf((x - my) / sdy);
    quadrature::integrate(f, &sorted_breaks(lo, hi, mx, sdx), quadrature_tolerance())
}
