//! Unbiased randomized truncation of Krylov subspace solvers.
//!
//! The crate couples deterministic CG, CR and GMRES iteration streams with
//! truncation schedules (the adaptively subsampled "AS" estimator and an
//! exponential Russian-Roulette baseline) so that a randomly stopped solve
//! still returns an unbiased estimate of `A⁻¹b`.
//!
//! Module map:
//!
//! - [`linop`]: operators, dense/CSR matrices, random SPD generation, Matrix Market I/O.
//! - [`krylov`]: resumable CG/CR/GMRES streams emitting [`krylov::IterationRecord`]s.
//! - [`truncation`]: AS and RR truncation schedules and expected-cost formulas.
//! - [`driver`]: randomized solves, trial batching and cost/variance statistics.
//! - [`oracle`]: brute-force solution of the variance-minimization problem.
//! - [`gp`]: Gaussian-process hyperparameter training with stochastic gradients.

pub mod driver;
pub mod error;
pub mod gp;
pub mod krylov;
pub mod linop;
pub mod oracle;
pub mod rng;
pub mod truncation;

pub use error::{Error, Result};
