//! Deterministic Krylov iterations exposed as resumable streams.
//!
//! Each call to [`KrylovIteration::step`] performs one iteration and returns
//! an [`IterationRecord`] with the solution increment and its improvement
//! `t_j`: the exact drop in squared energy-norm error (CG) or in squared
//! residual norm (CR, GMRES). Summed over a run, the improvements telescope
//! to the initial error, which is what the truncation schedules consume.

mod cg;
mod cr;
mod gmres;

pub use cg::Cg;
pub use cr::Cr;
pub use gmres::Gmres;

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linop::{norm2, LinearOperator};

/// Absolute threshold below which a denominator counts as a breakdown.
pub const BREAKDOWN: f64 = 1e-300;

/// Telemetry for one iteration `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub index: usize,
    /// Step size `α_j`. GMRES does not factor its improvement and reports `None`.
    pub alpha: Option<f64>,
    /// `‖q_j‖²`: `‖p_j‖_A²` for CG, `‖A p_j‖²` for CR.
    pub q_norm_sq: Option<f64>,
    /// `t_j ≥ 0` up to rounding.
    pub improvement: f64,
    /// Unweighted increment `x_{j+1} - x_j`.
    pub delta_x: Vec<f64>,
    /// `‖r_{j+1}‖₂` as tracked by the recurrence.
    pub residual_norm: f64,
    /// Set when the iteration reached the exact solution (GMRES happy breakdown
    /// or an exactly zero residual).
    pub exact: bool,
}

pub trait KrylovIteration {
    fn step(&mut self) -> Result<IterationRecord>;

    /// Current iterate `x_j`.
    fn solution(&self) -> &[f64];

    /// `‖r_j‖₂` from the recurrence.
    fn residual_norm(&self) -> f64;

    /// Number of completed iterations.
    fn iterations(&self) -> usize;

    /// True once the stream cannot produce further iterations.
    fn exhausted(&self) -> bool;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Cg,
    Cr,
    Gmres,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Cg => "cg",
            Method::Cr => "cr",
            Method::Gmres => "gmres",
        })
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cg" => Ok(Method::Cg),
            "cr" => Ok(Method::Cr),
            "gmres" => Ok(Method::Gmres),
            other => Err(Error::InvalidParameter(format!("unknown method `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SolverOptions {
    /// Replace the recursive residual by `b - A x` every this many iterations
    /// (CG and CR only). `None` keeps the pure recurrence.
    pub recompute_every: Option<usize>,
}

/// Starts a boxed iteration stream for `method`.
pub fn start<'a, A: LinearOperator + ?Sized>(
    method: Method,
    op: &'a A,
    b: &'a [f64],
    x0: &[f64],
    opts: SolverOptions,
) -> Result<Box<dyn KrylovIteration + 'a>> {
    Ok(match method {
        Method::Cg => Box::new(Cg::new(op, b, x0, opts)?),
        Method::Cr => Box::new(Cr::new(op, b, x0, opts)?),
        Method::Gmres => Box::new(Gmres::new(op, b, x0)?),
    })
}

/// Output of [`solve_deterministic`].
#[derive(Debug, Clone)]
pub struct DeterministicSolve {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub history: Vec<IterationRecord>,
    /// False when `maxit` was hit before the tolerance; `x` is then partial.
    pub converged: bool,
    pub initial_residual_norm: f64,
}

/// Runs `method` until `‖r‖ / ‖b‖ ≤ tol` or `maxit` iterations.
pub fn solve_deterministic<A: LinearOperator + ?Sized>(
    method: Method,
    op: &A,
    b: &[f64],
    x0: &[f64],
    tol: f64,
    maxit: usize,
    opts: SolverOptions,
) -> Result<DeterministicSolve> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance {tol} must be positive")));
    }
    let mut it = start(method, op, b, x0, opts)?;
    let threshold = tol * norm2(b);
    let initial_residual_norm = it.residual_norm();
    let mut history = Vec::new();
    let mut converged = it.residual_norm() <= threshold;
    while !converged && !it.exhausted() && history.len() < maxit {
        let rec = it.step()?;
        converged = rec.residual_norm <= threshold || rec.exact;
        history.push(rec);
    }
    Ok(DeterministicSolve {
        x: it.solution().to_vec(),
        iterations: history.len(),
        history,
        converged,
        initial_residual_norm,
    })
}

pub(crate) fn validate_system<A: LinearOperator + ?Sized>(op: &A, b: &[f64], x0: &[f64]) -> Result<()> {
    crate::linop::check_dim(op.dim(), b.len())?;
    crate::linop::check_dim(op.dim(), x0.len())?;
    if b.iter().chain(x0).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("right-hand side or initial guess".into()));
    }
    Ok(())
}
