use super::{initial_prob, AsConfig, PoolGroup, RuleStep, TruncationRule};
use crate::error::{Error, Result};

/// Streaming pool of improvements after the first random index `n + 1`.
///
/// The candidate group absorbs improvements while its running mean exceeds
/// the committed level `g_prev`. As soon as the mean falls to `g_prev` or
/// below, the group closes and its probability
/// `(1 - P(n+1)) (√g_prev - √g_curr) / anchor` is emitted at the group's
/// last index, which is the index just pushed. Interior indices get zero.
#[derive(Debug, Clone)]
pub struct PoolState {
    g_prev: f64,
    g_curr: f64,
    /// Size of the candidate group; 0 when no group is open.
    count: usize,
    /// `√t_{n+1}`.
    anchor: f64,
    p_init: f64,
    first_pending: usize,
    clamped: usize,
    closed: Vec<PoolGroup>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoolEmission {
    pub index: usize,
    pub prob: f64,
    /// Survival after the emission: `(1 - P(n+1)) √g_curr / anchor`.
    pub survival: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlushOutcome {
    /// Candidate group still open at end of stream. Its mean exceeds the
    /// committed level, so it carries no truncation mass.
    pub open_group: Option<PoolGroup>,
    /// Survival mass assigned to running to convergence.
    pub remaining: f64,
}

impl PoolState {
    /// `anchor_improvement` is `t_{n+1}`; the first pooled index is `start`.
    pub fn new(anchor_improvement: f64, p_init: f64, start: usize) -> Result<Self> {
        if !(anchor_improvement > 0.0) {
            return Err(Error::Degenerate(format!("anchor improvement {anchor_improvement} is not positive")));
        }
        if !(0.0..=1.0).contains(&p_init) {
            return Err(Error::InvalidParameter(format!("initial probability {p_init} outside [0, 1]")));
        }
        Ok(Self {
            g_prev: anchor_improvement,
            g_curr: 0.0,
            count: 0,
            anchor: anchor_improvement.sqrt(),
            p_init,
            first_pending: start,
            clamped: 0,
            closed: vec![PoolGroup { first: start.saturating_sub(1), last: start.saturating_sub(1), mean: anchor_improvement }],
        })
    }

    fn scale(&self) -> f64 {
        (1.0 - self.p_init) / self.anchor
    }

    /// Current survival level `(1 - P(n+1)) √g_prev / anchor`.
    pub fn survival(&self) -> f64 {
        self.scale() * self.g_prev.sqrt()
    }

    /// Feeds `t_index`. Returns the emission when this index closes a group.
    pub fn push(&mut self, index: usize, improvement: f64) -> Option<PoolEmission> {
        let t = if improvement < 0.0 {
            self.clamped += 1;
            0.0
        } else {
            improvement
        };
        if self.count == 0 {
            self.first_pending = index;
            self.g_curr = t;
            self.count = 1;
        } else {
            self.g_curr = (self.g_curr * self.count as f64 + t) / (self.count + 1) as f64;
            self.count += 1;
        }
        if self.g_prev < self.g_curr {
            return None;
        }
        let scale = self.scale();
        let prob = scale * (self.g_prev.sqrt() - self.g_curr.sqrt());
        self.closed.push(PoolGroup { first: self.first_pending, last: index, mean: self.g_curr });
        self.g_prev = self.g_curr;
        self.count = 0;
        Some(PoolEmission { index, prob, survival: scale * self.g_prev.sqrt() })
    }

    /// End of stream: the open candidate (if any) is left without mass and
    /// the current survival goes to convergence.
    pub fn flush(&mut self, last_index: usize) -> FlushOutcome {
        let open_group = (self.count > 0).then(|| PoolGroup {
            first: self.first_pending,
            last: last_index,
            mean: self.g_curr,
        });
        self.count = 0;
        FlushOutcome { open_group, remaining: self.survival() }
    }

    /// Closed groups so far, starting with the anchor group `{n + 1}`.
    pub fn groups(&self) -> &[PoolGroup] {
        &self.closed
    }

    pub fn clamped(&self) -> usize {
        self.clamped
    }
}

/// AS truncation rule for a live solver stream.
///
/// Indices `0..=n` are deterministic, `n + 1` receives
/// [`initial_prob`], and later indices are pooled by [`PoolState`].
#[derive(Debug, Clone)]
pub struct AsStream {
    config: AsConfig,
    last_t: Option<f64>,
    pool: Option<PoolState>,
    survival: f64,
    last_index: Option<usize>,
    clamped: usize,
}

impl AsStream {
    pub fn new(config: AsConfig) -> Self {
        Self { config, last_t: None, pool: None, survival: 1.0, last_index: None, clamped: 0 }
    }

    pub fn pool(&self) -> Option<&PoolState> {
        self.pool.as_ref()
    }
}

impl TruncationRule for AsStream {
    fn advance(&mut self, index: usize, improvement: f64) -> Result<RuleStep> {
        let expected = self.last_index.map_or(0, |i| i + 1);
        if index != expected {
            return Err(Error::InvalidParameter(format!("expected index {expected}, got {index}")));
        }
        self.last_index = Some(index);
        let t = if improvement < 0.0 {
            self.clamped += 1;
            0.0
        } else {
            improvement
        };
        let first_random = (self.config.n() + 1) as usize;
        let step = if index < first_random {
            RuleStep { prob: 0.0, survival: 1.0 }
        } else if index == first_random {
            let t_n = if self.config.n() >= 0 { self.last_t } else { None };
            let p_init = initial_prob(&self.config, t_n, t)?;
            self.pool = Some(PoolState::new(t, p_init, index + 1)?);
            RuleStep { prob: p_init, survival: 1.0 - p_init }
        } else {
            let pool = self.pool.as_mut().expect("pool starts at the first random index");
            match pool.push(index, t) {
                Some(e) => RuleStep { prob: e.prob, survival: e.survival },
                None => RuleStep { prob: 0.0, survival: self.survival },
            }
        };
        self.last_t = Some(t);
        self.survival = step.survival;
        Ok(step)
    }

    fn finish(&mut self) -> f64 {
        if let (Some(pool), Some(last)) = (self.pool.as_mut(), self.last_index) {
            pool.flush(last);
        }
        self.survival
    }

    fn clamped(&self) -> usize {
        self.clamped
    }
}
