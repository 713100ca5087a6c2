use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, Exp1};

use super::{objective, KktCertificate, OptimizationInstance};
use crate::error::{Error, Result};
use crate::rng::trial_rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOptions {
    pub restarts: usize,
    /// Projected-gradient iterations per restart before the Newton polish.
    pub pg_iterations: usize,
    /// Lower bound on `P(N)` during the projected-gradient phase.
    pub floor: f64,
    /// Relative KKT tolerance required of the returned point.
    pub kkt_tol: f64,
    pub seed: u64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self { restarts: 50, pg_iterations: 400, floor: 1e-6, kkt_tol: 1e-7, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RestartOptimum {
    pub restart: usize,
    pub objective: f64,
    pub probs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub probs: Vec<f64>,
    pub objective: f64,
    pub certificate: KktCertificate,
    /// Distinct end points over all restarts, best first.
    pub restart_optima: Vec<RestartOptimum>,
}

/// Minimizes [`objective`] over schedules with `Σ P = 1`, `Σ j P(j) = C`,
/// `P ≥ 0`.
///
/// Each restart starts from a random feasible point and runs projected
/// gradient descent with backtracking, projecting by Dykstra's alternating
/// method onto the orthant and the two hyperplanes. The end point is then
/// polished by Newton steps on the active set, with indices added or dropped
/// until the multipliers certify a KKT point. The restart with the smallest
/// objective wins, ties going to the lowest restart index.
pub fn brute_force_optimum(instance: &OptimizationInstance, opts: &OracleOptions) -> Result<OracleResult> {
    let n = instance.horizon();
    let t = instance.improvements();
    let c = instance.cost();
    if c >= n as f64 - 1e-12 {
        let mut probs = vec![0.0; n + 1];
        probs[n] = 1.0;
        let certificate = certify(t, c, &probs, &[n]);
        return Ok(OracleResult {
            objective: 0.0,
            restart_optima: vec![RestartOptimum { restart: 0, objective: 0.0, probs: probs.clone() }],
            probs,
            certificate,
        });
    }
    if opts.restarts == 0 {
        return Err(Error::InvalidParameter("at least one restart is required".into()));
    }
    let runs = run_restarts(instance, opts);
    let mut best: Option<RestartOptimum> = None;
    let mut distinct: Vec<RestartOptimum> = Vec::new();
    for run in runs {
        if !run.objective.is_finite() {
            continue;
        }
        if !distinct.iter().any(|d| max_abs_diff(&d.probs, &run.probs) < 1e-6) {
            distinct.push(run.clone());
        }
        if best.as_ref().is_none_or(|b| run.objective < b.objective) {
            best = Some(run);
        }
    }
    let best = best.ok_or_else(|| Error::OracleNonConvergence("no restart reached a finite objective".into()))?;
    distinct.sort_by(|a, b| a.objective.total_cmp(&b.objective).then(a.restart.cmp(&b.restart)));
    let support: Vec<usize> = (0..=n).filter(|&i| best.probs[i] > 0.0).collect();
    let certificate = certify(t, c, &best.probs, &support);
    if !certificate.holds(opts.kkt_tol) {
        return Err(Error::OracleNonConvergence(format!(
            "best objective {:e} after {} restarts fails the KKT check ({:?}) at P = {:?}",
            best.objective, opts.restarts, certificate, best.probs
        )));
    }
    Ok(OracleResult { probs: best.probs, objective: best.objective, certificate, restart_optima: distinct })
}

fn run_restarts(instance: &OptimizationInstance, opts: &OracleOptions) -> Vec<RestartOptimum> {
    let one = |r: usize| single_restart(instance, opts, r);
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..opts.restarts).into_par_iter().map(one).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..opts.restarts).map(one).collect()
    }
}

fn single_restart(instance: &OptimizationInstance, opts: &OracleOptions, restart: usize) -> RestartOptimum {
    let t = instance.improvements();
    let c = instance.cost();
    let n = t.len();
    let mut lb = vec![0.0; n + 1];
    lb[n] = opts.floor;
    let mut rng = trial_rng(opts.seed, restart as u64);
    let start: Vec<f64> = (0..=n).map(|_| Exp1.sample(&mut rng)).collect();
    let total: f64 = start.iter().sum();
    let start: Vec<f64> = start.iter().map(|v| v / total).collect();
    let mut p = dykstra(&start, &lb, c);
    let mut f = smooth_value(t, &p);
    let mut step = 1.0 / gradient(t, &p).iter().fold(1.0f64, |m, g| m.max(g.abs()));
    for _ in 0..opts.pg_iterations {
        let g = gradient(t, &p);
        let mut accepted = None;
        while step > 1e-30 {
            let trial: Vec<f64> = p.iter().zip(&g).map(|(pi, gi)| pi - step * gi).collect();
            let q = dykstra(&trial, &lb, c);
            let fq = smooth_value(t, &q);
            let d: Vec<f64> = q.iter().zip(&p).map(|(a, b)| a - b).collect();
            let lin: f64 = g.iter().zip(&d).map(|(a, b)| a * b).sum();
            let quad: f64 = d.iter().map(|x| x * x).sum::<f64>() / (2.0 * step);
            if fq <= f + lin + quad {
                accepted = Some((q, fq));
                break;
            }
            step *= 0.5;
        }
        let Some((q, fq)) = accepted else { break };
        let moved = max_abs_diff(&q, &p);
        p = q;
        f = fq;
        step *= 1.5;
        if moved < 1e-14 {
            break;
        }
    }
    if let Some(q) = polish(t, c, &p) {
        if smooth_value(t, &q) <= f {
            p = q;
        }
    }
    let objective = objective(&p, instance).unwrap_or(f64::INFINITY);
    RestartOptimum { restart, objective, probs: p }
}

fn survivals(p: &[f64]) -> Vec<f64> {
    let n = p.len() - 1;
    let mut acc = 0.0;
    p[..n]
        .iter()
        .map(|x| {
            acc += x;
            1.0 - acc
        })
        .collect()
}

/// `Σ_k t_k (1/s_k - 1)`, the objective written through the survivals.
fn smooth_value(t: &[f64], p: &[f64]) -> f64 {
    let s = survivals(p);
    let mut v = 0.0;
    for (tk, sk) in t.iter().zip(&s) {
        if *tk > 0.0 {
            if *sk <= 0.0 {
                return f64::INFINITY;
            }
            v += tk * (1.0 / sk - 1.0);
        }
    }
    v
}

/// `∂f/∂P(i) = Σ_{k=i}^{N-1} t_k / s_k²`; zero for `i = N`.
fn gradient(t: &[f64], p: &[f64]) -> Vec<f64> {
    let s = survivals(p);
    let n = t.len();
    let mut g = vec![0.0; n + 1];
    let mut acc = 0.0;
    for k in (0..n).rev() {
        if t[k] > 0.0 {
            acc += t[k] / (s[k] * s[k]);
        }
        g[k] = acc;
    }
    g
}

/// `H_il = Σ_{k ≥ max(i,l)} 2 t_k / s_k³`.
fn hessian_tail(t: &[f64], p: &[f64]) -> Vec<f64> {
    let s = survivals(p);
    let n = t.len();
    let mut r = vec![0.0; n + 1];
    let mut acc = 0.0;
    for k in (0..n).rev() {
        if t[k] > 0.0 {
            acc += 2.0 * t[k] / (s[k] * s[k] * s[k]);
        }
        r[k] = acc;
    }
    r
}

/// Projection onto `{Σ P = 1, Σ j P(j) = c}`.
fn project_affine(x: &[f64], c: f64) -> Vec<f64> {
    let m = x.len() as f64;
    let (mut sj, mut sjj, mut sx, mut sjx) = (0.0, 0.0, 0.0, 0.0);
    for (j, v) in x.iter().enumerate() {
        let j = j as f64;
        sj += j;
        sjj += j * j;
        sx += v;
        sjx += j * v;
    }
    let (r0, r1) = (sx - 1.0, sjx - c);
    let det = m * sjj - sj * sj;
    let a = (sjj * r0 - sj * r1) / det;
    let b = (m * r1 - sj * r0) / det;
    x.iter().enumerate().map(|(j, v)| v - a - b * j as f64).collect()
}

/// Dykstra's alternating projections onto the affine constraints and the
/// orthant `P ≥ lb`.
fn dykstra(y: &[f64], lb: &[f64], c: f64) -> Vec<f64> {
    let len = y.len();
    let mut x = y.to_vec();
    let mut p = vec![0.0; len];
    let mut q = vec![0.0; len];
    for _ in 0..20_000 {
        let xp: Vec<f64> = x.iter().zip(&p).map(|(a, b)| a + b).collect();
        let a = project_affine(&xp, c);
        for i in 0..len {
            p[i] = xp[i] - a[i];
        }
        let aq: Vec<f64> = a.iter().zip(&q).map(|(u, v)| u + v).collect();
        let next: Vec<f64> = aq.iter().zip(lb).map(|(v, l)| v.max(*l)).collect();
        for i in 0..len {
            q[i] = aq[i] - next[i];
        }
        let moved = max_abs_diff(&next, &x);
        let gap = max_abs_diff(&next, &a);
        x = next;
        if moved < 1e-15 && gap < 1e-14 {
            break;
        }
    }
    x
}

/// Newton iterations on the active set, adjusted until the multipliers of
/// the inactive bounds are non-negative.
fn polish(t: &[f64], c: f64, start: &[f64]) -> Option<Vec<f64>> {
    let n = t.len();
    let mut p = start.to_vec();
    let mut support: Vec<usize> = (0..n).filter(|&i| p[i] > 1e-7).chain([n]).collect();
    for i in 0..=n {
        if !support.contains(&i) {
            p[i] = 0.0;
        }
    }
    for _ in 0..4 * (n + 1) {
        if support.len() < 2 {
            return None;
        }
        newton_on_support(t, c, &mut p, &mut support)?;
        let (lambda, mu) = fit_multipliers(&gradient(t, &p), &support);
        let g = gradient(t, &p);
        let scale = g.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        let worst = (0..=n)
            .filter(|i| !support.contains(i))
            .map(|j| (j, g[j] - j as f64 * lambda - mu))
            .min_by(|a, b| a.1.total_cmp(&b.1));
        match worst {
            Some((j, u)) if u < -1e-10 * scale => {
                support.push(j);
                support.sort_unstable();
            }
            _ => return Some(p),
        }
    }
    None
}

fn newton_on_support(t: &[f64], c: f64, p: &mut [f64], support: &mut Vec<usize>) -> Option<()> {
    let n = t.len();
    for _ in 0..200 {
        let m = support.len();
        let g = gradient(t, p);
        let r = hessian_tail(t, p);
        let mut kkt = DMatrix::zeros(m + 2, m + 2);
        let mut rhs = DVector::zeros(m + 2);
        let trace: f64 = support.iter().map(|&i| r[i]).sum::<f64>().max(1.0);
        for (a, &i) in support.iter().enumerate() {
            for (b, &l) in support.iter().enumerate() {
                kkt[(a, b)] = r[i.max(l)];
            }
            kkt[(a, a)] += 1e-14 * trace;
            kkt[(a, m)] = 1.0;
            kkt[(m, a)] = 1.0;
            kkt[(a, m + 1)] = i as f64;
            kkt[(m + 1, a)] = i as f64;
            rhs[a] = -g[i];
        }
        rhs[m] = 1.0 - p.iter().sum::<f64>();
        rhs[m + 1] = c - p.iter().enumerate().map(|(j, v)| j as f64 * v).sum::<f64>();
        let d = kkt.lu().solve(&rhs)?;

        let mut tau: f64 = 1.0;
        let mut blocking = None;
        for (a, &i) in support.iter().enumerate() {
            if d[a] < 0.0 && i != n {
                let limit = -p[i] / d[a];
                if limit < tau {
                    tau = limit;
                    blocking = Some(i);
                }
            }
        }
        let f0 = smooth_value(t, p);
        let slope: f64 = support.iter().enumerate().map(|(a, &i)| g[i] * d[a]).sum();
        let mut trial = p.to_vec();
        loop {
            for (a, &i) in support.iter().enumerate() {
                trial[i] = p[i] + tau * d[a];
            }
            if let Some(b) = blocking {
                trial[b] = 0.0;
            }
            let f1 = smooth_value(t, &trial);
            let feasible = trial[n] > 0.0 && f1.is_finite();
            if feasible && (f1 <= f0 + 1e-4 * tau * slope.min(0.0) || rhs[m].abs() + rhs[m + 1].abs() > 1e-13) {
                break;
            }
            tau *= 0.5;
            blocking = None;
            if tau < 1e-20 {
                return None;
            }
        }
        let step = support.iter().map(|&i| (trial[i] - p[i]).abs()).fold(0.0, f64::max);
        p.copy_from_slice(&trial);
        if let Some(b) = blocking {
            if p[b] == 0.0 {
                support.retain(|&i| i != b);
                continue;
            }
        }
        if step < 1e-15 {
            return Some(());
        }
    }
    Some(())
}

/// Least-squares `(λ, μ)` with `∂f/∂P(j) ≈ jλ + μ` on the support.
fn fit_multipliers(g: &[f64], support: &[usize]) -> (f64, f64) {
    let m = support.len() as f64;
    let (mut sj, mut sjj, mut sg, mut sjg) = (0.0, 0.0, 0.0, 0.0);
    for &i in support {
        let j = i as f64;
        sj += j;
        sjj += j * j;
        sg += g[i];
        sjg += j * g[i];
    }
    let det = m * sjj - sj * sj;
    if det.abs() < 1e-300 {
        return (0.0, sg / m);
    }
    let lambda = (m * sjg - sj * sg) / det;
    let mu = (sg - lambda * sj) / m;
    (lambda, mu)
}

fn certify(t: &[f64], c: f64, p: &[f64], support: &[usize]) -> KktCertificate {
    let n = t.len();
    let g = gradient(t, p);
    let (lambda, mu) = if support.len() >= 2 { fit_multipliers(&g, support) } else { (0.0, 0.0) };
    let scale = g.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let u: Vec<f64> =
        (0..=n).map(|j| if support.contains(&j) { 0.0 } else { g[j] - j as f64 * lambda - mu }).collect();
    let stationarity = (0..=n)
        .map(|j| (g[j] - j as f64 * lambda - mu - u[j]).abs() / scale)
        .fold(0.0, f64::max);
    let complementarity = u.iter().zip(p).map(|(a, b)| (a * b).abs()).fold(0.0, f64::max);
    let min_u = u.iter().fold(0.0f64, |m, v| m.min(*v / scale));
    let sum: f64 = p.iter().sum();
    let cost: f64 = p.iter().enumerate().map(|(j, v)| j as f64 * v).sum();
    KktCertificate {
        lagrange_lambda: lambda,
        lagrange_mu: mu,
        u,
        max_stationarity_residual: stationarity,
        max_complementarity: complementarity,
        min_multiplier: min_u,
        max_constraint_violation: (sum - 1.0).abs().max((cost - c).abs()),
    }
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
