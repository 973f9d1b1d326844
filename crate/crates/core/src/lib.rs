//! Allocation-probability tests for two-arm trials with Bayesian
//! response-adaptive randomization.
//!
//! Trials are simulated under equal randomization, standard BRAR or tuned
//! BRAR ([`allocation`]); test statistics are computed from the trajectory
//! of allocation probabilities or from the final data ([`stats`]); critical
//! values are calibrated by Monte Carlo under a null model
//! ([`calibration`]); and [`harness`] aggregates operating characteristics
//! across scenario grids.
//!
//! All numerical code is generic over [`Real`] (`f32` or `f64`). The
//! aliases at the crate root fix the scalar to `f64`.

pub mod allocation;
pub mod calibration;
pub mod error;
pub mod harness;
pub mod outcome;
pub mod quadrature;
pub mod rng;
pub mod scalar;
pub mod special;
pub mod stats;

pub use allocation::{simulate_trial, DesignConfig, DesignKind};
pub use calibration::{critical_value, Mode};
pub use error::{Error, Result};
pub use harness::{run_scenario, ErComparator};
pub use outcome::{superiority_probability, Arm, Direction, FamilyKind};
pub use scalar::Real;
pub use stats::{ap_statistic, ApTestSpec, Comparator, TestSpec};

pub type Model = outcome::OutcomeModel<f64>;
pub type Prior = outcome::PriorSpec<f64>;
pub type Trajectory = allocation::TrialTrajectory<f64>;
pub type Test = stats::TestSpec<f64>;
pub type Critical = calibration::CriticalValue<f64>;
pub type Scenario = harness::ScenarioSpec<f64>;
pub type Report = harness::PerformanceReport<f64>;
