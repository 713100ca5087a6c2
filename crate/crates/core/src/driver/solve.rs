use rand::Rng;

use crate::error::{Error, Result};
use crate::krylov::{start, validate_system, Method, SolverOptions};
use crate::linop::{axpy, norm2, LinearOperator};
use crate::truncation::{sample_truncation, Estimator};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SolveDiagnostics {
    /// Negative improvements clamped to zero by the rule.
    pub clamped_improvements: usize,
    /// The solver converged before any truncation; the remaining survival
    /// mass was assigned to the converged iterate.
    pub flushed: bool,
    /// Solver iterations performed, including the one computed to decide a
    /// truncation.
    pub solver_iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RandomizedSolveResult {
    /// `x̄ = x_0 + Σ_{k<J} Δx_k / s_k`.
    pub estimate: Vec<f64>,
    /// `J`, the number of applied increments.
    pub executed_iterations: usize,
    pub truncated: bool,
    /// `1 / s_k` for every applied increment.
    pub weights_applied: Vec<f64>,
    /// Unweighted iterate `x_J` of the underlying recurrence, usable as a
    /// warm start.
    pub deterministic_iterate: Vec<f64>,
    pub diagnostics: SolveDiagnostics,
}

/// One randomized truncated solve.
///
/// Iteration `k` is computed first; its improvement fixes `P(k)`, the
/// truncate-before-`k` draw is made, and only on survival is `Δx_k / s_k`
/// added to the estimate. The run ends on truncation or when the recurrence
/// reaches `‖r‖ ≤ tol ‖b‖`.
#[allow(clippy::too_many_arguments)]
pub fn randomized_solve<A, R>(
    op: &A,
    b: &[f64],
    x0: &[f64],
    method: Method,
    estimator: &Estimator,
    tol: f64,
    maxit: usize,
    opts: SolverOptions,
    rng: &mut R,
) -> Result<RandomizedSolveResult>
where
    A: LinearOperator + ?Sized,
    R: Rng + ?Sized,
{
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance {tol} must be positive")));
    }
    validate_system(op, b, x0)?;
    let mut solver = start(method, op, b, x0, opts)?;
    let mut rule = estimator.rule();
    let threshold = tol * norm2(b);

    let mut estimate = x0.to_vec();
    let mut weights = Vec::new();
    let mut survival = 1.0;
    let mut truncated = false;
    let mut flushed = solver.residual_norm() <= threshold;
    let mut det = x0.to_vec();

    let mut k = 0;
    while !flushed {
        if k == maxit {
            return Err(Error::MaxIterations(maxit));
        }
        let rec = solver.step()?;
        let step = rule.advance(k, rec.improvement)?;
        if sample_truncation(k, step.prob, survival, rng)? {
            truncated = true;
            break;
        }
        if !(step.survival > 0.0) {
            return Err(Error::ScheduleInconsistency { index: k, prob: step.prob, survival: step.survival });
        }
        let w = 1.0 / step.survival;
        axpy(w, &rec.delta_x, &mut estimate);
        axpy(1.0, &rec.delta_x, &mut det);
        weights.push(w);
        survival = step.survival;
        k += 1;
        flushed = rec.exact || rec.residual_norm <= threshold || solver.exhausted();
    }
    if flushed {
        rule.finish();
    }
    Ok(RandomizedSolveResult {
        estimate,
        executed_iterations: weights.len(),
        truncated,
        weights_applied: weights,
        deterministic_iterate: det,
        diagnostics: SolveDiagnostics {
            clamped_improvements: rule.clamped(),
            flushed,
            solver_iterations: solver.iterations(),
        },
    })
}
