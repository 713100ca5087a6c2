//! Numerical ground truth for the truncation schedules.
//!
//! [`objective`] is the expected squared error of a randomized run under a
//! schedule `P(0..=N)`. [`brute_force_optimum`] minimizes it over all
//! schedules of a given expected cost without using any of the closed forms,
//! and returns a KKT certificate for the point it finds.
//! [`non_diminishing_instance`] builds improvement sequences on which streaming
//! schedules cannot be optimal.

mod optimize;

pub use optimize::{brute_force_optimum, OracleOptions, OracleResult, RestartOptimum};

use crate::error::{Error, Result};

/// Largest horizon accepted by the oracle.
pub const MAX_HORIZON: usize = 30;

/// Improvements `t_0..t_{N-1}` and an expected cost `C ∈ (0, N]`.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationInstance {
    improvements: Vec<f64>,
    cost: f64,
}

impl OptimizationInstance {
    pub fn new(improvements: Vec<f64>, cost: f64) -> Result<Self> {
        let n = improvements.len();
        if n == 0 || n > MAX_HORIZON {
            return Err(Error::InvalidParameter(format!("horizon {n} outside 1..={MAX_HORIZON}")));
        }
        if let Some(t) = improvements.iter().find(|t| !(**t >= 0.0 && t.is_finite())) {
            return Err(Error::InvalidParameter(format!("improvement {t} is not finite and non-negative")));
        }
        if !(cost > 0.0 && cost <= n as f64) {
            return Err(Error::InvalidParameter(format!("cost {cost} outside (0, {n}]")));
        }
        Ok(Self { improvements, cost })
    }

    pub fn improvements(&self) -> &[f64] {
        &self.improvements
    }

    pub fn cost(&self) -> f64 {
        self.cost
    }

    /// `N`.
    pub fn horizon(&self) -> usize {
        self.improvements.len()
    }

    pub fn with_cost(&self, cost: f64) -> Result<Self> {
        Self::new(self.improvements.clone(), cost)
    }
}

/// Lagrange multipliers of the cost-constrained problem at a candidate
/// optimum, with the residuals of the first-order conditions.
#[derive(Debug, Clone, PartialEq)]
pub struct KktCertificate {
    /// Multiplier of the cost constraint `Σ j P(j) = C`.
    pub lagrange_lambda: f64,
    /// Multiplier of `Σ P(j) = 1`.
    pub lagrange_mu: f64,
    /// Multipliers of `P(j) ≥ 0`.
    pub u: Vec<f64>,
    /// Largest `|∂f/∂P(j) - jλ - μ - u_j|`, relative to the gradient scale.
    pub max_stationarity_residual: f64,
    /// Largest `u_j P(j)`.
    pub max_complementarity: f64,
    /// Most negative `u_j` (0 when all are non-negative).
    pub min_multiplier: f64,
    /// Largest violation of the two equality constraints.
    pub max_constraint_violation: f64,
}

impl KktCertificate {
    pub fn holds(&self, tol: f64) -> bool {
        self.max_stationarity_residual <= tol
            && self.max_complementarity <= 1e-8
            && self.min_multiplier >= -tol
            && self.max_constraint_violation <= tol
    }
}

/// Expected squared error `Σ_j P(j) ‖v_j‖²` of the reweighted estimator.
///
/// `‖v_0‖² = Σ_k t_k`; for `1 ≤ j ≤ N` the first `j` increments are applied
/// with weight `1/s_k`, contributing `t_k (1 - 1/s_k)²`, and the rest are
/// missing, contributing `t_k`. Returns `+∞` when the cumulative mass
/// reaches 1 before index `N` while nonzero improvements remain: the
/// estimator then divides by a vanishing survival.
pub fn objective(probs: &[f64], instance: &OptimizationInstance) -> Result<f64> {
    let t = instance.improvements();
    let n = t.len();
    if probs.len() != n + 1 {
        return Err(Error::DimensionMismatch { expected: n + 1, found: probs.len() });
    }
    if let Some(p) = probs.iter().find(|p| !(**p >= 0.0)) {
        return Err(Error::InvalidParameter(format!("negative probability {p}")));
    }
    let mut survival = Vec::with_capacity(n);
    let mut acc = 0.0;
    for &p in &probs[..n] {
        acc += p;
        survival.push(1.0 - acc);
    }
    if let Some(k) = survival.iter().position(|s| *s <= 0.0) {
        if t[k..].iter().any(|x| *x > 0.0) {
            return Ok(f64::INFINITY);
        }
    }
    let mut total = 0.0;
    for (j, &p) in probs.iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        let applied: f64 = (0..j).map(|k| t[k] * (1.0 - 1.0 / survival[k]).powi(2)).sum();
        let missing: f64 = t[j.min(n)..].iter().sum();
        total += p * (applied + missing);
    }
    Ok(total)
}

/// An improvement sequence realizing the construction that defeats any
/// streaming schedule.
///
/// With anchor `t_{n+1} = 1`: earlier terms decrease to it, the next `m`
/// terms equal `1 - δ` with `0 < δ < ε`, then `t_{n+m+2} = 1 + mε`, and the
/// remaining terms halve. Every defining relation is re-checked before
/// returning.
pub fn non_diminishing_instance(n: isize, m: usize, epsilon: f64, horizon: usize) -> Result<Vec<f64>> {
    if n < -1 || m < 1 {
        return Err(Error::InvalidParameter(format!("need n >= -1 and m >= 1, got n = {n}, m = {m}")));
    }
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidParameter(format!("epsilon = {epsilon} must be positive")));
    }
    let peak = (n + m as isize + 2) as usize;
    if peak + 1 >= horizon {
        return Err(Error::InvalidParameter(format!("n + m + 3 = {} must be at most N - 1 = {}", peak + 1, horizon - 1)));
    }
    let anchor = (n + 1) as usize;
    let delta = epsilon.min(1.0) / 2.0;
    let t: Vec<f64> = (0..horizon)
        .map(|j| {
            if j < anchor {
                1.0 + (anchor - j) as f64
            } else if j == anchor {
                1.0
            } else if j < peak {
                1.0 - delta
            } else {
                (1.0 + m as f64 * epsilon) * 0.5f64.powi((j - peak) as i32)
            }
        })
        .collect();
    check_non_diminishing(&t, n, m, epsilon)?;
    Ok(t)
}

/// Verifies the defining relations of [`non_diminishing_instance`].
pub fn check_non_diminishing(t: &[f64], n: isize, m: usize, epsilon: f64) -> Result<()> {
    let a = (n + 1) as usize;
    let fail = |what: &str| Err(Error::Degenerate(format!("construction violates {what}")));
    if a + m + 2 >= t.len() {
        return fail("the horizon bound");
    }
    if n >= 0 && !(t[a - 1] > t[a]) {
        return fail("t_n > t_{n+1}");
    }
    if !(t[a + 1] + epsilon > t[a] && t[a] > t[a + 1]) {
        return fail("t_{n+2} + eps > t_{n+1} > t_{n+2}");
    }
    if m >= 2 && (a + 1..a + m).any(|j| t[j + 1] != t[j]) {
        return fail("the equal middle block");
    }
    let tail: f64 = t[a + m + 1..].iter().sum();
    if !(tail > t[a] + m as f64 * epsilon) {
        return fail("the tail sum bound");
    }
    if (t[a + m + 1] - (t[a] + m as f64 * epsilon)).abs() > 1e-12 * t[a + m + 1] {
        return fail("t_{n+m+2} = t_{n+1} + m eps");
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::truncation::{as_probabilities_finite, AsConfig};

    fn inst(t: &[f64], c: f64) -> OptimizationInstance {
        OptimizationInstance::new(t.to_vec(), c).unwrap()
    }

    #[test]
    fn point_mass_at_horizon_has_zero_error() {
        let i = inst(&[3.0, 2.0, 1.0], 3.0);
        assert_eq!(objective(&[0.0, 0.0, 0.0, 1.0], &i).unwrap(), 0.0);
    }

    #[test]
    fn single_iteration_by_hand() {
        let i = inst(&[1.0], 0.5);
        let q: f64 = 0.5;
        let v = objective(&[q, 1.0 - q], &i).unwrap();
        assert!((v - (q + q * q / (1.0 - q))).abs() < 1e-15);
        assert!((v - 1.0).abs() < 1e-15);
    }

    #[test]
    fn premature_full_mass_is_infinite() {
        let i = inst(&[1.0, 1.0], 1.0);
        assert_eq!(objective(&[0.0, 1.0, 0.0], &i).unwrap(), f64::INFINITY);
        assert!(objective(&[-0.1, 1.1, 0.0], &i).is_err());
    }

    #[test]
    fn zero_tail_tolerates_full_mass() {
        let i = inst(&[1.0, 0.0], 1.0);
        let v = objective(&[0.0, 1.0, 0.0], &i).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn non_diminishing_example() {
        let t = non_diminishing_instance(-1, 2, 0.01, 10).unwrap();
        assert_eq!(t.len(), 10);
        check_non_diminishing(&t, -1, 2, 0.01).unwrap();
        let s = as_probabilities_finite(&t, &AsConfig::new(-0.5).unwrap()).unwrap();
        s.validate(1e-10).unwrap();
    }

    #[test]
    fn non_diminishing_rejects_bad_parameters() {
        assert!(non_diminishing_instance(-1, 2, 0.0, 10).is_err());
        assert!(non_diminishing_instance(3, 4, 0.1, 10).is_err());
        assert!(non_diminishing_instance(-2, 2, 0.1, 10).is_err());
    }
}
