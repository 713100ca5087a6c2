use std::ops::Range;

use crate::error::{Error, Result};
use crate::krylov::{start, validate_system, IterationRecord, Method, SolverOptions};
use crate::linop::{axpy, direct_solve, dot, energy_norm_sq, matvec, norm2, residual, LinearOperator};
use crate::rng::trial_rng;
use crate::truncation::{sample_truncation, AsConfig, Estimator, RrConfig};

use super::solve::{randomized_solve, RandomizedSolveResult};

/// Error measure averaged over trials.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    /// `‖x̄ - x*‖_A²`; symmetric operators only.
    Energy,
    /// `‖b - A x̄‖₂²`.
    Residual,
}

impl Metric {
    pub fn for_method(method: Method) -> Self {
        match method {
            Method::Cg => Metric::Energy,
            Method::Cr | Method::Gmres => Metric::Residual,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Metric::Energy => "energy_error_sq",
            Metric::Residual => "residual_sq",
        }
    }
}

/// A linear system together with the solver settings used for every trial.
#[derive(Debug, Clone)]
pub struct Problem<'a, A: ?Sized> {
    pub op: &'a A,
    pub b: Vec<f64>,
    pub x0: Vec<f64>,
    pub method: Method,
    pub tol: f64,
    pub maxit: usize,
    pub opts: SolverOptions,
}

impl<'a, A: LinearOperator + ?Sized> Problem<'a, A> {
    /// Zero initial guess, tolerance `1e-8`, at most `10 n` iterations.
    pub fn new(op: &'a A, b: Vec<f64>, method: Method) -> Self {
        let n = op.dim();
        Self { op, b, x0: vec![0.0; n], method, tol: 1e-8, maxit: 10 * n.max(1), opts: SolverOptions::default() }
    }
}

/// Statistics of a batch of randomized solves.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialStatistics {
    pub trials: u64,
    pub seed: u64,
    pub mean_estimate: Vec<f64>,
    /// Standard error of each coordinate of `mean_estimate`.
    pub coordinate_std_err: Vec<f64>,
    /// Mean of the metric over trials.
    pub mean_sq_error_metric: f64,
    pub metric_std_err: f64,
    /// `E‖x̄ - E x̄‖²` in the metric's norm, with `E x̄` the sample mean.
    pub strict_variance: f64,
    pub avg_iterations: f64,
    pub std_err_iterations: f64,
    /// Number of trials that applied exactly `J` increments, indexed by `J`.
    pub histogram: Vec<u64>,
}

/// Exact expectations of an estimator over the realized trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactStatistics {
    pub expected_cost: f64,
    pub expected_metric: f64,
}

/// One row of [`Experiment::variance_curve`].
#[derive(Debug, Clone, PartialEq)]
pub struct CurveRow {
    pub estimator: Estimator,
    pub stats: TrialStatistics,
}

/// Weighted prefix estimates of one estimator along the fixed trajectory.
#[derive(Debug, Clone)]
pub struct Replay {
    probs: Vec<f64>,
    survivals: Vec<f64>,
    /// `x̄_J` for `J = 0..=reachable`.
    estimates: Vec<Vec<f64>>,
    metrics: Vec<f64>,
    complete: bool,
    maxit: usize,
}

impl Replay {
    /// `P(k)` for `k` below the trajectory length.
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn survivals(&self) -> &[f64] {
        &self.survivals
    }

    /// Probability that exactly `J` increments are applied, `J = 0..=K`.
    pub fn stop_distribution(&self) -> Vec<f64> {
        let mut d = self.probs.clone();
        d.push(if self.complete { self.survivals.last().copied().unwrap_or(1.0) } else { 0.0 });
        d
    }

    pub fn estimate(&self, j: usize) -> &[f64] {
        &self.estimates[j]
    }

    pub fn metric(&self, j: usize) -> f64 {
        self.metrics[j]
    }

    /// Replays the sampling of trial `index`: one uniform per index, exactly
    /// as [`randomized_solve`] draws them. Returns `J`.
    pub fn sample(&self, base_seed: u64, index: u64) -> Result<usize> {
        let mut rng = trial_rng(base_seed, index);
        let mut survival = 1.0;
        for (k, (&p, &s)) in self.probs.iter().zip(&self.survivals).enumerate() {
            if sample_truncation(k, p, survival, &mut rng)? {
                return Ok(k);
            }
            if !(s > 0.0) {
                return Err(Error::ScheduleInconsistency { index: k, prob: p, survival: s });
            }
            survival = s;
        }
        if self.complete {
            Ok(self.probs.len())
        } else {
            Err(Error::MaxIterations(self.maxit))
        }
    }
}

/// A problem with its deterministic trajectory and reference solution.
///
/// The recurrence is deterministic given `(A, b, x_0)`, so every trial of
/// every estimator follows a prefix of the same trajectory. Trials are
/// therefore replayed: the per-trial generator decides `J`, and the
/// estimate is the precomputed prefix `x̄_J`, identical to what
/// [`randomized_solve`] returns with the same generator.
pub struct Experiment<'a, A: ?Sized> {
    problem: Problem<'a, A>,
    x_star: Vec<f64>,
    metric: Metric,
    improvements: Vec<f64>,
    deltas: Vec<Vec<f64>>,
    complete: bool,
}

impl<'a, A: LinearOperator + ?Sized> Experiment<'a, A> {
    /// Runs the deterministic recurrence and a dense reference solve.
    pub fn new(problem: Problem<'a, A>) -> Result<Self> {
        let x_star = direct_solve(problem.op, &problem.b)?;
        Self::with_reference(problem, x_star)
    }

    pub fn with_reference(problem: Problem<'a, A>, x_star: Vec<f64>) -> Result<Self> {
        if !(problem.tol > 0.0) {
            return Err(Error::InvalidParameter(format!("tolerance {} must be positive", problem.tol)));
        }
        validate_system(problem.op, &problem.b, &problem.x0)?;
        let metric = Metric::for_method(problem.method);
        if metric == Metric::Energy && !problem.op.is_symmetric() {
            return Err(Error::NotSymmetric);
        }
        let (history, complete) = {
            let mut solver = start(problem.method, problem.op, &problem.b, &problem.x0, problem.opts)?;
            let threshold = problem.tol * norm2(&problem.b);
            let mut complete = solver.residual_norm() <= threshold;
            let mut history: Vec<IterationRecord> = Vec::new();
            while !complete && history.len() < problem.maxit {
                let rec = solver.step()?;
                complete = rec.exact || rec.residual_norm <= threshold || solver.exhausted();
                history.push(rec);
            }
            (history, complete)
        };
        let (improvements, deltas) = history.into_iter().map(|r| (r.improvement, r.delta_x)).unzip();
        Ok(Self { problem, x_star, metric, improvements, deltas, complete })
    }

    pub fn problem(&self) -> &Problem<'a, A> {
        &self.problem
    }

    pub fn x_star(&self) -> &[f64] {
        &self.x_star
    }

    pub fn metric_kind(&self) -> Metric {
        self.metric
    }

    pub fn improvements(&self) -> &[f64] {
        &self.improvements
    }

    /// Iterations of the deterministic run.
    pub fn iterations(&self) -> usize {
        self.improvements.len()
    }

    pub fn converged(&self) -> bool {
        self.complete
    }

    /// Unweighted final iterate.
    pub fn deterministic_solution(&self) -> Vec<f64> {
        let mut x = self.problem.x0.clone();
        for d in &self.deltas {
            axpy(1.0, d, &mut x);
        }
        x
    }

    /// Metric of an arbitrary estimate.
    pub fn metric(&self, x: &[f64]) -> Result<f64> {
        match self.metric {
            Metric::Energy => {
                let e: Vec<f64> = x.iter().zip(&self.x_star).map(|(a, b)| a - b).collect();
                energy_norm_sq(self.problem.op, &e)
            }
            Metric::Residual => {
                let r = residual(self.problem.op, &self.problem.b, x)?;
                Ok(dot(&r, &r))
            }
        }
    }

    /// Metric norm of a difference of two estimates.
    fn metric_of_difference(&self, d: &[f64]) -> Result<f64> {
        match self.metric {
            Metric::Energy => energy_norm_sq(self.problem.op, d),
            Metric::Residual => {
                let ad = matvec(self.problem.op, d)?;
                Ok(dot(&ad, &ad))
            }
        }
    }

    pub fn replay(&self, estimator: &Estimator) -> Result<Replay> {
        let mut rule = estimator.rule();
        let mut probs = Vec::with_capacity(self.iterations());
        let mut survivals = Vec::with_capacity(self.iterations());
        for (k, &t) in self.improvements.iter().enumerate() {
            let step = rule.advance(k, t)?;
            probs.push(step.prob);
            survivals.push(step.survival);
        }
        if self.complete {
            rule.finish();
        }
        let reachable = survivals.iter().position(|s| !(*s > 0.0)).unwrap_or(survivals.len());
        let mut estimates = Vec::with_capacity(reachable + 1);
        let mut x = self.problem.x0.clone();
        estimates.push(x.clone());
        for (d, s) in self.deltas.iter().zip(&survivals).take(reachable) {
            axpy(1.0 / s, d, &mut x);
            estimates.push(x.clone());
        }
        let metrics = estimates.iter().map(|e| self.metric(e)).collect::<Result<_>>()?;
        Ok(Replay { probs, survivals, estimates, metrics, complete: self.complete, maxit: self.problem.maxit })
    }

    /// Expected cost `Σ J P(J)` and expected metric over the trajectory.
    pub fn exact_statistics(&self, estimator: &Estimator) -> Result<ExactStatistics> {
        let replay = self.replay(estimator)?;
        let dist = replay.stop_distribution();
        let mut cost = Neumaier::default();
        let mut metric = Neumaier::default();
        for (j, &p) in dist.iter().enumerate() {
            if p > 0.0 {
                cost.add(j as f64 * p);
                metric.add(p * replay.metrics[j]);
            }
        }
        if !self.complete && dist[..dist.len() - 1].iter().sum::<f64>() < 1.0 - 1e-12 {
            return Err(Error::MaxIterations(self.problem.maxit));
        }
        Ok(ExactStatistics { expected_cost: cost.sum(), expected_metric: metric.sum() })
    }

    /// Runs trial `index` through [`randomized_solve`] with the same generator
    /// the batched harness uses.
    pub fn live_trial(&self, estimator: &Estimator, base_seed: u64, index: u64) -> Result<RandomizedSolveResult> {
        let p = &self.problem;
        let mut rng = trial_rng(base_seed, index);
        randomized_solve(p.op, &p.b, &p.x0, p.method, estimator, p.tol, p.maxit, p.opts, &mut rng)
    }

    /// `trials` independent randomized solves. `workers = 0` uses every
    /// available thread; the result does not depend on `workers`.
    pub fn run_trials(&self, estimator: &Estimator, trials: u64, base_seed: u64, workers: usize) -> Result<TrialStatistics> {
        if trials == 0 {
            return Err(Error::InvalidParameter("trials must be >= 1".into()));
        }
        let replay = self.replay(estimator)?;
        let histogram = sample_histogram(&replay, trials, base_seed, workers)?;
        self.statistics(&replay, histogram, base_seed)
    }

    fn statistics(&self, replay: &Replay, histogram: Vec<u64>, seed: u64) -> Result<TrialStatistics> {
        let trials: u64 = histogram.iter().sum();
        let tf = trials as f64;
        let n = self.problem.x0.len();
        let used = || histogram.iter().enumerate().filter(|(_, c)| **c > 0).map(|(j, &c)| (j, c as f64));

        let mut mean = vec![0.0; n];
        for (j, c) in used() {
            axpy(c / tf, &replay.estimates[j], &mut mean);
        }
        let mut var = vec![0.0; n];
        let mut strict = Neumaier::default();
        let mut metric = Neumaier::default();
        let mut iters = Neumaier::default();
        for (j, c) in used() {
            let d: Vec<f64> = replay.estimates[j].iter().zip(&mean).map(|(a, m)| a - m).collect();
            for (v, di) in var.iter_mut().zip(&d) {
                *v += c * di * di;
            }
            strict.add(c * self.metric_of_difference(&d)?);
            metric.add(c * replay.metrics[j]);
            iters.add(c * j as f64);
        }
        let metric_mean = metric.sum() / tf;
        let avg = iters.sum() / tf;
        let mut metric_var = Neumaier::default();
        let mut iter_var = Neumaier::default();
        for (j, c) in used() {
            metric_var.add(c * (replay.metrics[j] - metric_mean).powi(2));
            iter_var.add(c * (j as f64 - avg).powi(2));
        }
        let std_err = |ss: f64| if trials > 1 { (ss / (tf - 1.0) / tf).sqrt() } else { 0.0 };
        Ok(TrialStatistics {
            trials,
            seed,
            coordinate_std_err: var.iter().map(|&v| std_err(v)).collect(),
            mean_estimate: mean,
            mean_sq_error_metric: metric_mean,
            metric_std_err: std_err(metric_var.sum()),
            strict_variance: strict.sum() / tf,
            avg_iterations: avg,
            std_err_iterations: std_err(iter_var.sum()),
            histogram,
        })
    }

    /// One [`TrialStatistics`] per estimator, sorted by average iterations.
    pub fn variance_curve(
        &self,
        estimators: &[Estimator],
        trials: u64,
        base_seed: u64,
        workers: usize,
    ) -> Result<Vec<CurveRow>> {
        if estimators.is_empty() {
            return Err(Error::InvalidParameter("empty parameter grid".into()));
        }
        let mut rows = estimators
            .iter()
            .map(|e| Ok(CurveRow { estimator: *e, stats: self.run_trials(e, trials, base_seed, workers)? }))
            .collect::<Result<Vec<_>>>()?;
        rows.sort_by(|a, b| a.stats.avg_iterations.total_cmp(&b.stats.avg_iterations));
        Ok(rows)
    }

    /// The AS parameter whose expected cost equals `target` (bisection).
    pub fn calibrate_eta(&self, target: f64) -> Result<AsConfig> {
        let cost = |eta: f64| -> Result<f64> {
            Ok(self.exact_statistics(&Estimator::As(AsConfig::new(eta)?))?.expected_cost)
        };
        let lo = -1.0 + 1e-12;
        let hi = self.iterations() as f64;
        let eta = bisect(lo, hi, target, cost, true)?;
        AsConfig::new(eta)
    }

    /// The RR rate with `min_iters` guaranteed iterations whose expected cost
    /// equals `target` (bisection in `log λ`).
    pub fn calibrate_rr_lambda(&self, min_iters: usize, target: f64) -> Result<RrConfig> {
        let cost = |log_lambda: f64| -> Result<f64> {
            Ok(self.exact_statistics(&Estimator::Rr(RrConfig::new(min_iters, log_lambda.exp())?))?.expected_cost)
        };
        let log_lambda = bisect(-30.0, 30.0, target, cost, false)?;
        RrConfig::new(min_iters, log_lambda.exp())
    }
}

/// Solves `f(x) = target` for monotone `f` on `[lo, hi]`.
fn bisect(mut lo: f64, mut hi: f64, target: f64, f: impl Fn(f64) -> Result<f64>, increasing: bool) -> Result<f64> {
    let (flo, fhi) = (f(lo)?, f(hi)?);
    let (min, max) = if increasing { (flo, fhi) } else { (fhi, flo) };
    if !(target >= min && target <= max) {
        return Err(Error::InvalidParameter(format!("target cost {target} outside attainable range [{min}, {max}]")));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if (f(mid)? < target) == increasing {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

const CHUNK: u64 = 1024;

fn sample_chunk(replay: &Replay, range: Range<u64>, seed: u64) -> Result<Vec<u64>> {
    let mut h = vec![0u64; replay.probs.len() + 1];
    for i in range {
        let j = replay.sample(seed, i).map_err(|e| Error::Trial { index: i, source: Box::new(e) })?;
        h[j] += 1;
    }
    Ok(h)
}

fn sample_histogram(replay: &Replay, trials: u64, seed: u64, workers: usize) -> Result<Vec<u64>> {
    let chunks: Vec<Range<u64>> = (0..trials.div_ceil(CHUNK)).map(|c| c * CHUNK..((c + 1) * CHUNK).min(trials)).collect();
    let parts: Vec<Result<Vec<u64>>> = run_chunks(replay, &chunks, seed, workers);
    let mut hist = vec![0u64; replay.probs.len() + 1];
    for part in parts {
        for (h, p) in hist.iter_mut().zip(part?) {
            *h += p;
        }
    }
    Ok(hist)
}

#[cfg(feature = "parallel")]
fn run_chunks(replay: &Replay, chunks: &[Range<u64>], seed: u64, workers: usize) -> Vec<Result<Vec<u64>>> {
    use rayon::prelude::*;
    if workers == 1 || chunks.len() == 1 {
        return chunks.iter().map(|r| sample_chunk(replay, r.clone(), seed)).collect();
    }
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        Ok(pool) => pool,
        Err(_) => return chunks.iter().map(|r| sample_chunk(replay, r.clone(), seed)).collect(),
    };
    pool.install(|| chunks.par_iter().map(|r| sample_chunk(replay, r.clone(), seed)).collect())
}

#[cfg(not(feature = "parallel"))]
fn run_chunks(replay: &Replay, chunks: &[Range<u64>], seed: u64, _workers: usize) -> Vec<Result<Vec<u64>>> {
    chunks.iter().map(|r| sample_chunk(replay, r.clone(), seed)).collect()
}

/// Compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Neumaier {
    sum: f64,
    c: f64,
}

impl Neumaier {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.c += (self.sum - t) + x;
        } else {
            self.c += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn sum(&self) -> f64 {
        self.sum + self.c
    }
}
