//! Trial simulation under equal randomization, standard BRAR and tuned BRAR.
//!
//! A trial consists of a burn-in block of `burn_in` subjects (block 0)
//! followed by `num_blocks` blocks of `block_size` subjects. Every subject
//! of block `t` shares the allocation probability π_t computed from the
//! data of blocks `0..t`. After the last block, π_{T+1} is computed from
//! all data even though nobody is allocated with it.

use std::io::{self, Write};

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::outcome::{superiority_probability, Arm, OutcomeModel, PosteriorState, PriorSpec};
use crate::scalar::{open_unit, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DesignKind {
    /// Permuted-block equal randomization over all subjects.
    EqualRandomization {
        permuted_block_size: u64,
    },
    StandardBrar,
    TunedBrar,
}

impl DesignKind {
    pub const DEFAULT_PERMUTED_BLOCK: u64 = 8;

    pub fn equal_randomization() -> Self {
        DesignKind::EqualRandomization {
            permuted_block_size: Self::DEFAULT_PERMUTED_BLOCK,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            DesignKind::EqualRandomization { .. } => "er",
            DesignKind::StandardBrar => "standard-brar",
            DesignKind::TunedBrar => "tuned-brar",
        }
    }

    /// Tag mixed into random-stream domains so designs never share draws.
    pub fn stream_tag(&self) -> u64 {
        match self {
            DesignKind::EqualRandomization { .. } => 0,
            DesignKind::StandardBrar => 1,
            DesignKind::TunedBrar => 2,
        }
    }

    pub fn is_adaptive(&self) -> bool {
        !matches!(self, DesignKind::EqualRandomization { .. })
    }
}

/// Trial geometry and allocation rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct DesignConfig {
    total_n: u64,
    burn_in: u64,
    block_size: u64,
    num_blocks: u64,
    t_min: u64,
    kind: DesignKind,
}

impl DesignConfig {
    /// Builds a design from the total sample size; the number of blocks is
    /// derived from `total_n = burn_in + block_size * num_blocks`.
    pub fn new(
        total_n: u64,
        burn_in: u64,
        block_size: u64,
        t_min: u64,
        kind: DesignKind,
    ) -> Result<Self> {
        if block_size == 0 {
            return Err(Error::InvalidDesign("block_size must be >= 1".into()));
        }
        if total_n < burn_in {
            return Err(Error::InvalidDesign(format!(
                "total_n ({total_n}) is smaller than burn_in ({burn_in})"
            )));
        }
        let rest = total_n - burn_in;
        if !rest.is_multiple_of(block_size) {
            return Err(Error::InvalidDesign(format!(
                "total_n - burn_in = {rest} is not a multiple of block_size {block_size}"
            )));
        }
        Self::from_blocks(burn_in, block_size, rest / block_size, t_min, kind)
    }

    pub fn from_blocks(
        burn_in: u64,
        block_size: u64,
        num_blocks: u64,
        t_min: u64,
        kind: DesignKind,
    ) -> Result<Self> {
        if burn_in < 2 || !burn_in.is_multiple_of(2) {
            return Err(Error::InvalidDesign(format!(
                "burn_in must be even and >= 2, got {burn_in}"
            )));
        }
        if block_size == 0 {
            return Err(Error::InvalidDesign("block_size must be >= 1".into()));
        }
        if t_min < 1 || t_min > num_blocks + 1 {
            return Err(Error::InvalidDesign(format!(
                "t_min must lie in 1..={}, got {t_min}",
                num_blocks + 1
            )));
        }
        if let DesignKind::EqualRandomization {
            permuted_block_size,
        } = kind
        {
            if permuted_block_size < 2 || permuted_block_size % 2 != 0 {
                return Err(Error::InvalidDesign(format!(
                    "permuted block size must be even and >= 2, got {permuted_block_size}"
                )));
            }
        }
        Ok(Self {
            total_n: burn_in + block_size * num_blocks,
            burn_in,
            block_size,
            num_blocks,
            t_min,
            kind,
        })
    }

    pub fn total_n(&self) -> u64 {
        self.total_n
    }
    pub fn burn_in(&self) -> u64 {
        self.burn_in
    }
    pub fn block_size(&self) -> u64 {
        self.block_size
    }
    pub fn num_blocks(&self) -> u64 {
        self.num_blocks
    }
    pub fn t_min(&self) -> u64 {
        self.t_min
    }
    pub fn kind(&self) -> DesignKind {
        self.kind
    }

    /// Same geometry with a different allocation rule.
    pub fn with_kind(&self, kind: DesignKind) -> Result<Self> {
        Self::from_blocks(
            self.burn_in,
            self.block_size,
            self.num_blocks,
            self.t_min,
            kind,
        )
    }

    pub fn with_t_min(&self, t_min: u64) -> Result<Self> {
        Self::from_blocks(
            self.burn_in,
            self.block_size,
            self.num_blocks,
            t_min,
            self.kind,
        )
    }

    /// Design truncated after `blocks` adaptive blocks.
    pub fn truncated(&self, blocks: u64) -> Result<Self> {
        Self::from_blocks(
            self.burn_in,
            self.block_size,
            blocks.min(self.num_blocks),
            self.t_min.min(blocks + 1),
            self.kind,
        )
    }
}

/// Regularizes a BRAR probability towards 1/2 with exponent
/// `c = 0.1 + 0.9 t / T`. With `T = 0` the exponent is 1.
pub fn tune_probability<R: Real>(pi: R, t: u64, num_blocks: u64) -> R {
    let c = if num_blocks == 0 {
        R::one()
    } else {
        R::lit(0.1) + R::lit(0.9) * R::from_count(t) / R::from_count(num_blocks)
    };
    if c == R::one() {
        return pi;
    }
    // pi^c / (pi^c + (1 - pi)^c) written as a logistic of the log-odds.
    let log_odds_against = (R::one() - pi).ln() - pi.ln();
    open_unit(R::one() / (R::one() + (c * log_odds_against).exp()))
}

/// BRAR allocation probability π^BRAR for the experimental arm.
pub fn brar_probability<R: Real>(
    state: &PosteriorState<R>,
    prior: &PriorSpec<R>,
    model: &OutcomeModel<R>,
) -> Result<R> {
    superiority_probability(
        state.arm(Arm::Experimental),
        state.arm(Arm::Control),
        prior,
        model.direction(),
    )
}

/// Allocation probability of block `t` under `design`: BRAR, tuned when
/// the design asks for it. Equal randomization records the untuned value.
pub fn allocation_probability<R: Real>(
    design: &DesignConfig,
    state: &PosteriorState<R>,
    prior: &PriorSpec<R>,
    model: &OutcomeModel<R>,
    t: u64,
) -> Result<R> {
    let pi = brar_probability(state, prior, model)?;
    Ok(match design.kind {
        DesignKind::TunedBrar => tune_probability(pi, t, design.num_blocks),
        _ => pi,
    })
}

/// Permuted-block sequence: every complete block holds `block / 2`
/// subjects per arm in random order; the leftover is as balanced as
/// possible, with a fair coin deciding the odd subject.
pub fn permuted_block_sequence<G: Rng + ?Sized>(
    n: u64,
    block: u64,
    rng: &mut G,
) -> Result<Vec<Arm>> {
    if block < 2 || !block.is_multiple_of(2) {
        return Err(Error::InvalidDesign(format!(
            "permuted block size must be even and >= 2, got {block}"
        )));
    }
    if n == 0 {
        return Err(Error::InvalidDesign("sequence length must be >= 1".into()));
    }
    let mut seq = Vec::with_capacity(n as usize);
    let mut remaining = n;
    while remaining > 0 {
        let size = remaining.min(block);
        let ones = if size.is_multiple_of(2) {
            size / 2
        } else {
            size / 2 + u64::from(rng.random_bool(0.5))
        };
        let start = seq.len();
        seq.extend((0..size).map(|i| {
            if i < ones {
                Arm::Experimental
            } else {
                Arm::Control
            }
        }));
        seq[start..].shuffle(rng);
        remaining -= size;
    }
    Ok(seq)
}

/// Knobs that do not change the statistical model.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SimulationOptions {
    /// Exchanges arm labels in every allocation draw: uniforms `u` are read
    /// as `1 - u` and permuted sequences are complemented. Running a
    /// swapped model with this flag mirrors the original trial exactly.
    pub mirror_stream: bool,
}

/// One simulated trial.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialTrajectory<R> {
    pub design: DesignConfig,
    /// Allocated arms, burn-in first, then block 1 to T.
    pub arms: Vec<Arm>,
    /// Outcomes aligned with `arms`.
    pub outcomes: Vec<R>,
    /// π_{t,1} for t = 1..=T+1, stored at index t - 1.
    pub alloc_probs: Vec<R>,
    pub final_posterior: PosteriorState<R>,
}

impl<R: Real> TrialTrajectory<R> {
    pub fn num_blocks(&self) -> u64 {
        self.design.num_blocks
    }

    /// π_{t,1}, 1-based, valid for t in 1..=T+1.
    pub fn pi(&self, t: u64) -> R {
        self.alloc_probs[(t - 1) as usize]
    }

    /// Range of subject indices belonging to block `t` (0 = burn-in).
    pub fn block_range(&self, t: u64) -> std::ops::Range<usize> {
        let b0 = self.design.burn_in as usize;
        if t == 0 {
            0..b0
        } else {
            let bs = self.design.block_size as usize;
            let start = b0 + (t as usize - 1) * bs;
            start..start + bs
        }
    }

    pub fn count_on(&self, arm: Arm) -> u64 {
        self.arms.iter().filter(|&&a| a == arm).count() as u64
    }

    /// Posterior states used to compute π_1..π_{T+1}: entry t - 1 holds the
    /// state after blocks 0..t-1. Rebuilt from the recorded data.
    pub fn posterior_history(&self, model: &OutcomeModel<R>) -> Result<Vec<PosteriorState<R>>> {
        let mut state = PosteriorState::new(model);
        let mut history = Vec::with_capacity(self.alloc_probs.len());
        for t in 0..=self.design.num_blocks {
            for i in self.block_range(t) {
                state.update(self.arms[i], self.outcomes[i])?;
            }
            history.push(state);
        }
        Ok(history)
    }
}

/// Simulates one trial. See [`simulate_trial_with`].
pub fn simulate_trial<R: Real, G: Rng + ?Sized>(
    design: &DesignConfig,
    model: &OutcomeModel<R>,
    prior: &PriorSpec<R>,
    rng: &mut G,
) -> Result<TrialTrajectory<R>> {
    simulate_trial_with(design, model, prior, rng, SimulationOptions::default())
}

/// Simulates one trial.
///
/// Draw order per trial: the permuted sequence (equal randomization) or the
/// burn-in permutation (BRAR) first; then, subject by subject, the
/// allocation uniform (BRAR blocks only) followed by the outcome. Posteriors
/// are updated after every outcome, which is equivalent to updating after
/// the block because π is fixed for the whole block.
pub fn simulate_trial_with<R: Real, G: Rng + ?Sized>(
    design: &DesignConfig,
    model: &OutcomeModel<R>,
    prior: &PriorSpec<R>,
    rng: &mut G,
    options: SimulationOptions,
) -> Result<TrialTrajectory<R>> {
    prior.check_family(model.kind())?;
    let n = design.total_n as usize;
    let label = |arm: Arm| {
        if options.mirror_stream {
            arm.other()
        } else {
            arm
        }
    };

    let fixed: Option<Vec<Arm>> = match design.kind {
        DesignKind::EqualRandomization {
            permuted_block_size,
        } => Some(
            permuted_block_sequence(design.total_n, permuted_block_size, rng)?
                .into_iter()
                .map(label)
                .collect(),
        ),
        _ => None,
    };

    let mut arms = Vec::with_capacity(n);
    let mut outcomes = Vec::with_capacity(n);
    let mut state = PosteriorState::new(model);
    let mut alloc_probs = Vec::with_capacity(design.num_blocks as usize + 1);

    let observe = |arm: Arm,
                   rng: &mut G,
                   arms: &mut Vec<Arm>,
                   outcomes: &mut Vec<R>,
                   state: &mut PosteriorState<R>| {
        let y = model.sample_outcome(arm, rng);
        state.update(arm, y)?;
        arms.push(arm);
        outcomes.push(y);
        Ok::<(), Error>(())
    };

    let burn_in: Vec<Arm> = match &fixed {
        Some(seq) => seq[..design.burn_in as usize].to_vec(),
        None => {
            let half = design.burn_in / 2;
            let mut b: Vec<Arm> = (0..design.burn_in)
                .map(|i| {
                    if i < half {
                        Arm::Control
                    } else {
                        Arm::Experimental
                    }
                })
                .collect();
            b.shuffle(rng);
            b.into_iter().map(label).collect()
        }
    };
    for arm in burn_in {
        observe(arm, rng, &mut arms, &mut outcomes, &mut state)?;
    }

    for t in 1..=design.num_blocks {
        let pi = allocation_probability(design, &state, prior, model, t)?;
        alloc_probs.push(pi);
        for _ in 0..design.block_size {
            let arm = match &fixed {
                Some(seq) => seq[arms.len()],
                None => {
                    let u: f64 = rng.random();
                    let u = if options.mirror_stream { 1.0 - u } else { u };
                    if u < pi.as_f64() {
                        Arm::Experimental
                    } else {
                        Arm::Control
                    }
                }
            };
            observe(arm, rng, &mut arms, &mut outcomes, &mut state)?;
        }
    }
    alloc_probs.push(allocation_probability(
        design,
        &state,
        prior,
        model,
        design.num_blocks + 1,
    )?);

    Ok(TrialTrajectory {
        design: *design,
        arms,
        outcomes,
        alloc_probs,
        final_posterior: state,
    })
}

/// Column header of the trajectory dump.
pub const TRAJECTORY_COLUMNS: &str = "replicate,t,pi_t1,n1,n0,suffstat1,suffstat0";

/// Writes one row per block t = 1..=T+1 with π_t and the sufficient
/// statistics it was computed from.
pub fn write_trajectory_rows<R: Real, W: Write>(
    out: &mut W,
    replicate: u64,
    trajectory: &TrialTrajectory<R>,
    model: &OutcomeModel<R>,
) -> io::Result<()> {
    let history = trajectory
        .posterior_history(model)
        .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))?;
    for (i, state) in history.iter().enumerate() {
        let e = state.arm(Arm::Experimental);
        let c = state.arm(Arm::Control);
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            replicate,
            i + 1,
            trajectory.alloc_probs[i],
            e.n(),
            c.n(),
            e.sufficient(),
            c.sufficient()
        )?;
    }
    Ok(())
}
