//! Gaussian-process hyperparameter training with Krylov-solved gradients.
//!
//! The loss is the negative marginal log likelihood of an RBF-kernel GP.
//! Its gradient needs `K⁻¹ y` and the traces `tr(K⁻¹ ∂K/∂θ)`; the traces are
//! estimated with Rademacher probes and every solve can be done exactly,
//! by truncated CG, or by a randomized truncated CG.

mod data;
mod kernel;
mod stochastic;
mod train;

pub use data::GpDataset;
pub use kernel::{exact_mll_and_grad, kernel_matrix, ExactMll, GpHyperparams, KernelMatrices};
pub use stochastic::{calibrate_eta, calibrate_rr_lambda, stochastic_grad, GradSolver, GradientSample, ProbeSet, StochasticOptions};
pub use train::{train, Adam, Trace, TraceRow, TrainConfig};
