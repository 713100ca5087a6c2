use super::{AsConfig, PoolGroup, TruncationSchedule};
use crate::error::{Error, Result};

/// `P(n+1)`, the first nonzero truncation probability.
///
/// `1 - σ` when `n = -1`; otherwise `(1 - σ)(√t_n - √t_{n+1}) / √t_n`,
/// clamped at 0 when `t_n ≤ t_{n+1}`. `t_n` must be given iff `n ≥ 0`.
pub fn initial_prob(config: &AsConfig, t_n: Option<f64>, t_next: f64) -> Result<f64> {
    if !(t_next >= 0.0) {
        return Err(Error::InvalidParameter(format!("improvement {t_next} must be >= 0")));
    }
    let sigma = config.sigma();
    match (config.n(), t_n) {
        (-1, None) => Ok(1.0 - sigma),
        (-1, Some(_)) => Err(Error::InvalidParameter("t_n given with n = -1".into())),
        (_, None) => Err(Error::InvalidParameter("t_n required when n >= 0".into())),
        (_, Some(t_n)) => {
            if !(t_n > 0.0) {
                return Err(Error::Degenerate(format!(
                    "t_{} = {t_n}: the solver converged before the first random index",
                    config.n()
                )));
            }
            let (a, b) = (t_n.sqrt(), t_next.sqrt());
            Ok(((1.0 - sigma) * (a - b) / a).max(0.0))
        }
    }
}

/// AS probabilities for a complete improvement sequence `t_0..t_{N-1}`.
///
/// Iterations after `n + 1` are pooled greedily: each group grows until its
/// mean improvement drops to or below the previous group's mean. A final
/// group that cannot close within the sequence is padded with zero-improvement
/// dummy iterations. Each group's probability sits at its first index and the
/// remainder `(1 - P(n+1)) √g_last / √t_{n+1}` at `N`.
pub fn as_probabilities_finite(improvements: &[f64], config: &AsConfig) -> Result<TruncationSchedule> {
    let len = improvements.len();
    if len < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 iterations, got {len}")));
    }
    if let Some(t) = improvements.iter().find(|t| !(**t >= 0.0) || !t.is_finite()) {
        return Err(Error::InvalidParameter(format!("improvement {t} is not a finite non-negative value")));
    }
    let n = config.n();
    if n > len as isize - 2 {
        return Err(Error::InvalidParameter(format!("eta = {} needs eta < N - 1 = {}", config.eta(), len - 1)));
    }
    let first = (n + 1) as usize;
    let anchor_t = improvements[first];
    if !(anchor_t > 0.0) {
        return Err(Error::Degenerate(format!("anchor improvement t_{first} is zero")));
    }
    let t_n = if n >= 0 { Some(improvements[n as usize]) } else { None };
    let p_init = initial_prob(config, t_n, anchor_t)?;
    let scale = (1.0 - p_init) / anchor_t.sqrt();

    let mut probs = vec![0.0; len + 1];
    probs[first] = p_init;
    let mut groups = vec![PoolGroup { first, last: first, mean: anchor_t }];
    let mut g_prev = anchor_t;
    let mut start = first + 1;
    while start < len {
        let mut sum = improvements[start];
        let mut count = 1usize;
        let mut last = start;
        let mean = loop {
            let mean = sum / count as f64;
            if g_prev >= mean {
                break mean;
            }
            if last + 1 < len {
                last += 1;
                sum += improvements[last];
                count += 1;
            } else {
                // Only dummy zeros remain: the smallest padded size that
                // brings the mean down to g_prev.
                let padded = padded_group_size(sum, count, g_prev);
                match padded {
                    Some(c) => {
                        last = start + c - 1;
                        break sum / c as f64;
                    }
                    None => {
                        last = usize::MAX;
                        break 0.0;
                    }
                }
            }
        };
        probs[start] = scale * (g_prev.sqrt() - mean.sqrt());
        groups.push(PoolGroup { first: start, last, mean });
        g_prev = mean;
        start = last.saturating_add(1);
    }
    probs[len] = scale * g_prev.sqrt();
    Ok(TruncationSchedule::with_groups(probs, groups))
}

/// Smallest `c ≥ count` with `sum / c ≤ g_prev`; `None` when `g_prev = 0`
/// (the padded mean only reaches zero in the limit).
fn padded_group_size(sum: f64, count: usize, g_prev: f64) -> Option<usize> {
    if !(g_prev > 0.0) {
        return None;
    }
    let mut c = ((sum / g_prev).ceil() as usize).max(count);
    while c > count && sum / (c - 1) as f64 <= g_prev {
        c -= 1;
    }
    while sum / c as f64 > g_prev {
        c += 1;
    }
    Some(c)
}

/// Expected number of applied iterations for the AS schedule of `improvements`.
///
/// Uses the closed form when the sequence has strictly diminishing returns
/// from index `max(n, 0)` on, and `Σ j P(j)` over the pooled schedule otherwise.
pub fn expected_cost(improvements: &[f64], config: &AsConfig) -> Result<f64> {
    match expected_cost_closed_form(improvements, config) {
        Some(c) => Ok(c),
        None => Ok(as_probabilities_finite(improvements, config)?.expected_cost()),
    }
}

/// Closed-form average cost; `None` unless returns strictly diminish.
pub fn expected_cost_closed_form(improvements: &[f64], config: &AsConfig) -> Option<f64> {
    let len = improvements.len();
    let n = config.n();
    if len < 2 || n > len as isize - 2 {
        return None;
    }
    let from = n.max(0) as usize;
    let diminishing = improvements[from..].windows(2).all(|w| w[0] > w[1]) && improvements[len - 1] >= 0.0;
    if !diminishing {
        return None;
    }
    let sigma = config.sigma();
    let first = (n + 1) as usize;
    let anchor = improvements[first].sqrt();
    let tail: f64 = improvements[first + 1..].iter().map(|t| t.sqrt()).sum::<f64>() / anchor;
    if n == -1 {
        Some(sigma + sigma * tail)
    } else {
        let ratio = anchor / improvements[n as usize].sqrt();
        Some(n as f64 + 1.0 + (sigma + (1.0 - sigma) * ratio) * (1.0 + tail))
    }
}
