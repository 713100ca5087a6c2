//! Randomized truncated solves and the trial harness built on them.
//!
//! [`randomized_solve`] couples a live Krylov stream with a truncation rule.
//! [`Experiment`] runs many trials of the same problem by replaying the
//! deterministic trajectory, which gives the same estimates at a fraction of
//! the cost and makes results independent of the number of worker threads.

mod solve;
mod trials;

pub use solve::{randomized_solve, RandomizedSolveResult, SolveDiagnostics};
pub use trials::{CurveRow, ExactStatistics, Experiment, Metric, Problem, Replay, TrialStatistics};

#[allow(unused_imports)]
pub(crate) use trials::Neumaier;
