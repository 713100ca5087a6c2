use super::{RrConfig, RuleStep, TruncationRule, TruncationSchedule};
use crate::error::Result;

/// Finite RR schedule over `horizon` iterations: `P(j) = Q(j-1) - Q(j)` for
/// `j < horizon` and the tail `Q(horizon - 1)` at `horizon`.
pub fn rr_schedule(config: &RrConfig, horizon: usize) -> TruncationSchedule {
    let mut probs = Vec::with_capacity(horizon + 1);
    for j in 0..horizon {
        probs.push(step_prob(config, j));
    }
    probs.push(if horizon == 0 { 1.0 } else { config.survival(horizon - 1) });
    TruncationSchedule::new(probs)
}

fn step_prob(config: &RrConfig, j: usize) -> f64 {
    if j == 0 {
        0.0
    } else {
        config.survival(j - 1) - config.survival(j)
    }
}

/// RR rule for a live solver; ignores the improvements.
#[derive(Debug, Clone)]
pub struct RrStream {
    config: RrConfig,
    survival: f64,
}

impl RrStream {
    pub fn new(config: RrConfig) -> Self {
        Self { config, survival: 1.0 }
    }
}

impl TruncationRule for RrStream {
    fn advance(&mut self, index: usize, _improvement: f64) -> Result<RuleStep> {
        let prob = step_prob(&self.config, index);
        self.survival = self.config.survival(index);
        Ok(RuleStep { prob, survival: self.survival })
    }

    fn finish(&mut self) -> f64 {
        self.survival
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::truncation::{schedule_from_stream, Estimator};

    #[test]
    fn halving() {
        let c = RrConfig::new(0, std::f64::consts::LN_2).unwrap();
        let s = rr_schedule(&c, 3);
        let p = s.probs();
        assert_eq!(p[0], 0.0);
        assert!((p[1] - 0.5).abs() < 1e-15);
        assert!((p[2] - 0.25).abs() < 1e-15);
        assert!((p[3] - 0.25).abs() < 1e-15);
        s.validate(1e-14).unwrap();
    }

    #[test]
    fn guaranteed_iterations() {
        let c = RrConfig::new(5, 0.3).unwrap();
        let s = rr_schedule(&c, 20);
        assert!(s.probs()[..6].iter().all(|&p| p == 0.0));
        assert!(s.probs()[6] > 0.0);
        s.validate(1e-14).unwrap();
    }

    #[test]
    fn tiny_rate_is_deterministic() {
        let c = RrConfig::new(0, 1e-300).unwrap();
        let s = rr_schedule(&c, 50);
        assert_eq!(s.probs()[50], 1.0);
        assert_eq!(s.expected_cost(), 50.0);
    }

    #[test]
    fn stream_matches_schedule() {
        let c = RrConfig::new(2, 0.2).unwrap();
        let t = vec![1.0; 12];
        let a = rr_schedule(&c, 12);
        let b = schedule_from_stream(&t, &Estimator::Rr(c)).unwrap();
        assert_eq!(a.probs(), b.probs());
    }
}
