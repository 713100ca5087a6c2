//! Truncation schedules for Russian-Roulette style randomized solves.
//!
//! `P(j)` is the probability of stopping *before* iteration `j`; the last
//! entry of a finite schedule is the probability of running everything.
//! The survival level `s_j = 1 - Σ_{i≤j} P(i)` is the probability that
//! iteration `j` is applied, and the applied increment is weighted by `1/s_j`.
//!
//! Two families are provided:
//!
//! - AS ([`AsConfig`]): probabilities derived from the observed improvements
//!   `t_j`, either from a complete sequence ([`as_probabilities_finite`],
//!   probability placed at the first index of each pooled group) or on the
//!   fly ([`AsStream`], probability placed at the last index of each group).
//! - RR ([`RrConfig`]): a fixed exponential tail after a number of
//!   guaranteed iterations.

mod as_finite;
mod pool;
mod rr;

pub use as_finite::{as_probabilities_finite, expected_cost, expected_cost_closed_form, initial_prob};
pub use pool::{AsStream, FlushOutcome, PoolEmission, PoolState};
pub use rr::{rr_schedule, RrStream};

use std::fmt;

use rand::Rng;

use crate::error::{Error, Result};

/// Slack allowed when comparing cumulative mass against 1.
pub const MASS_TOL: f64 = 1e-12;

/// Parameter of the AS estimator: `n = ⌊η⌋` deterministic iterations and
/// fractional part `σ` controlling the first truncation probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsConfig {
    eta: f64,
}

impl AsConfig {
    pub fn new(eta: f64) -> Result<Self> {
        if !eta.is_finite() || eta <= -1.0 {
            return Err(Error::InvalidParameter(format!("eta = {eta} must be finite and > -1")));
        }
        Ok(Self { eta })
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// `n = ⌊η⌋ ≥ -1`.
    pub fn n(&self) -> isize {
        self.eta.floor() as isize
    }

    /// `σ = η - n ∈ [0, 1)`.
    pub fn sigma(&self) -> f64 {
        self.eta - self.eta.floor()
    }
}

/// Exponential Russian-Roulette baseline: survival is 1 through
/// `min_iters`, then decays as `exp(-λ (j - min_iters))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RrConfig {
    pub min_iters: usize,
    pub lambda: f64,
}

impl RrConfig {
    pub fn new(min_iters: usize, lambda: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::InvalidParameter(format!("lambda = {lambda} must be finite and > 0")));
        }
        Ok(Self { min_iters, lambda })
    }

    /// Survival `Q(j)`.
    pub fn survival(&self, j: usize) -> f64 {
        if j <= self.min_iters {
            1.0
        } else {
            (-self.lambda * (j - self.min_iters) as f64).exp()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Estimator {
    As(AsConfig),
    Rr(RrConfig),
}

impl Estimator {
    pub fn rule(&self) -> Box<dyn TruncationRule + Send> {
        match *self {
            Estimator::As(c) => Box::new(AsStream::new(c)),
            Estimator::Rr(c) => Box::new(RrStream::new(c)),
        }
    }

    /// Short family name used in CSV output.
    pub fn family(&self) -> &'static str {
        match self {
            Estimator::As(_) => "as",
            Estimator::Rr(_) => "rr",
        }
    }
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Estimator::As(c) => write!(f, "eta={}", c.eta()),
            Estimator::Rr(c) => write!(f, "min_iters={};lambda={}", c.min_iters, c.lambda),
        }
    }
}

/// Probability assigned at one index together with the survival after it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RuleStep {
    pub prob: f64,
    pub survival: f64,
}

/// Sequential source of truncation probabilities.
///
/// `advance` is called once per iteration, in order, with that iteration's
/// improvement; it returns `P(index)` and `s_index`. Rules never look past
/// the improvement they are given.
pub trait TruncationRule {
    fn advance(&mut self, index: usize, improvement: f64) -> Result<RuleStep>;

    /// End of stream (the solver converged). Returns the survival mass that
    /// is assigned to running to convergence.
    fn finish(&mut self) -> f64;

    /// Number of negative improvements clamped to zero.
    fn clamped(&self) -> usize {
        0
    }
}

/// One pooled group of consecutive iterations sharing a survival level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoolGroup {
    pub first: usize,
    /// Inclusive; may reach past the real iterations when dummy zero
    /// improvements were needed to close the group.
    pub last: usize,
    pub mean: f64,
}

/// A complete schedule `P(0..=N)`; `P(N)` is the mass of running all `N`
/// iterations (or to convergence).
#[derive(Debug, Clone, PartialEq)]
pub struct TruncationSchedule {
    probs: Vec<f64>,
    groups: Vec<PoolGroup>,
}

impl TruncationSchedule {
    pub fn new(probs: Vec<f64>) -> Self {
        Self { probs, groups: Vec::new() }
    }

    pub(crate) fn with_groups(probs: Vec<f64>, groups: Vec<PoolGroup>) -> Self {
        Self { probs, groups }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// `N`, the index of the run-to-completion entry.
    pub fn horizon(&self) -> usize {
        self.probs.len() - 1
    }

    pub fn prob(&self, j: usize) -> f64 {
        self.probs.get(j).copied().unwrap_or(0.0)
    }

    pub fn cumulative(&self, j: usize) -> f64 {
        self.probs.iter().take(j + 1).sum()
    }

    /// `s_j = 1 - Σ_{i≤j} P(i)`.
    pub fn survival(&self, j: usize) -> f64 {
        1.0 - self.cumulative(j)
    }

    pub fn survivals(&self) -> Vec<f64> {
        let mut acc = 0.0;
        self.probs
            .iter()
            .map(|p| {
                acc += p;
                1.0 - acc
            })
            .collect()
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// `Σ_j j P(j)`, the expected number of applied iterations.
    pub fn expected_cost(&self) -> f64 {
        self.probs.iter().enumerate().map(|(j, p)| j as f64 * p).sum()
    }

    /// Nonzero entries as `(index, P)`.
    pub fn nonzero(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.probs.iter().copied().enumerate().filter(|&(_, p)| p != 0.0)
    }

    /// Groups formed by pooling (empty for schedules not built by pooling).
    pub fn groups(&self) -> &[PoolGroup] {
        &self.groups
    }

    /// Checks `P ∈ [0, 1]`, `Σ P = 1 ± tol`, cumulative never above `1 + tol`.
    pub fn validate(&self, tol: f64) -> Result<()> {
        let mut acc = 0.0;
        for (j, &p) in self.probs.iter().enumerate() {
            acc += p;
            if !(0.0..=1.0).contains(&p) || acc > 1.0 + tol {
                return Err(Error::ScheduleInconsistency { index: j, prob: p, survival: 1.0 - acc });
            }
        }
        if (acc - 1.0).abs() > tol {
            return Err(Error::ScheduleInconsistency { index: self.horizon(), prob: acc, survival: 1.0 - acc });
        }
        Ok(())
    }
}

/// Draws the truncate-before-`index` decision given that `index - 1`
/// survived with probability `prev_survival`: true with probability
/// `prob / prev_survival`. Consumes exactly one uniform variate.
pub fn sample_truncation<R: Rng + ?Sized>(
    index: usize,
    prob: f64,
    prev_survival: f64,
    rng: &mut R,
) -> Result<bool> {
    let u: f64 = rng.random();
    if prob == 0.0 {
        return Ok(false);
    }
    let ratio = prob / prev_survival;
    if !(prev_survival > 0.0) || !(ratio <= 1.0 + MASS_TOL) || ratio < 0.0 {
        return Err(Error::ScheduleInconsistency { index, prob, survival: prev_survival });
    }
    Ok(u < ratio)
}

/// Runs `estimator` over a complete improvement sequence of a run that
/// converged after `improvements.len()` iterations. The remaining mass is
/// placed at the final index.
pub fn schedule_from_stream(improvements: &[f64], estimator: &Estimator) -> Result<TruncationSchedule> {
    let mut rule = estimator.rule();
    let mut probs = Vec::with_capacity(improvements.len() + 1);
    for (k, &t) in improvements.iter().enumerate() {
        probs.push(rule.advance(k, t)?.prob);
    }
    probs.push(rule.finish());
    Ok(TruncationSchedule::new(probs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    #[test]
    fn config_decomposition() {
        let c = AsConfig::new(-0.5).unwrap();
        assert_eq!(c.n(), -1);
        assert_eq!(c.sigma(), 0.5);
        let c = AsConfig::new(10.25).unwrap();
        assert_eq!(c.n(), 10);
        assert_eq!(c.sigma(), 0.25);
        assert!(AsConfig::new(-1.0).is_err());
        assert!(AsConfig::new(f64::NAN).is_err());
        assert!(RrConfig::new(0, 0.0).is_err());
    }

    #[test]
    fn sampling_edges() {
        let mut rng = seeded(1);
        for _ in 0..1000 {
            assert!(!sample_truncation(3, 0.0, 0.7, &mut rng).unwrap());
            assert!(sample_truncation(3, 0.7, 0.7, &mut rng).unwrap());
        }
        assert!(matches!(
            sample_truncation(3, 0.8, 0.7, &mut rng),
            Err(Error::ScheduleInconsistency { index: 3, .. })
        ));
    }

    #[test]
    fn sampling_rate() {
        let mut rng = seeded(2);
        let hits = (0..100_000).filter(|_| sample_truncation(1, 0.125, 0.5, &mut rng).unwrap()).count();
        let rate = hits as f64 / 1e5;
        assert!((rate - 0.25).abs() < 0.005, "rate {rate}");
    }

    #[test]
    fn sampling_consumes_one_variate() {
        let mut a = seeded(5);
        let mut b = seeded(5);
        sample_truncation(0, 0.0, 1.0, &mut a).unwrap();
        sample_truncation(0, 0.3, 1.0, &mut a).unwrap();
        let _: f64 = b.random();
        let _: f64 = b.random();
        assert_eq!(a.random::<u64>(), b.random::<u64>());
    }
}
