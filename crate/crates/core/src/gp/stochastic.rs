use rand::Rng;

use super::kernel::{factor, kernel_matrix};
use super::{GpDataset, GpHyperparams};
use crate::driver::randomized_solve;
use crate::error::{Error, Result};
use crate::krylov::{solve_deterministic, Method, SolverOptions};
use crate::linop::{dot, matvec, DenseMatrix};
use crate::rng::trial_rng;
use crate::truncation::{schedule_from_stream, AsConfig, Estimator, RrConfig};

/// Probe vectors for the Hutchinson trace estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeSet {
    probes: Vec<Vec<f64>>,
}

impl ProbeSet {
    /// `t` vectors with independent ±1 entries.
    pub fn rademacher<R: Rng + ?Sized>(t: usize, n: usize, rng: &mut R) -> Self {
        let probes = (0..t).map(|_| (0..n).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect()).collect();
        Self { probes }
    }

    /// `√n e_i` for every `i`, which makes the estimate exact.
    pub fn scaled_basis(n: usize) -> Self {
        let s = (n as f64).sqrt();
        let probes = (0..n)
            .map(|i| {
                let mut e = vec![0.0; n];
                e[i] = s;
                e
            })
            .collect();
        Self { probes }
    }

    pub fn probes(&self) -> &[Vec<f64>] {
        &self.probes
    }

    pub fn len(&self) -> usize {
        self.probes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probes.is_empty()
    }
}

/// How the linear systems inside the gradient are solved.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GradSolver {
    Cholesky,
    /// Deterministic CG stopped after `maxit` iterations.
    Cg { maxit: usize },
    AsCg { eta: f64 },
    RrCg { min_iters: usize, lambda: f64 },
}

impl GradSolver {
    fn estimator(&self) -> Result<Option<Estimator>> {
        Ok(match *self {
            GradSolver::AsCg { eta } => Some(Estimator::As(AsConfig::new(eta)?)),
            GradSolver::RrCg { min_iters, lambda } => Some(Estimator::Rr(RrConfig::new(min_iters, lambda)?)),
            _ => None,
        })
    }
}

impl std::fmt::Display for GradSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GradSolver::Cholesky => write!(f, "cholesky"),
            GradSolver::Cg { maxit } => write!(f, "cg(maxit={maxit})"),
            GradSolver::AsCg { eta } => write!(f, "as-cg(eta={eta})"),
            GradSolver::RrCg { min_iters, lambda } => write!(f, "rr-cg(min_iters={min_iters};lambda={lambda})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StochasticOptions {
    /// Relative residual at which CG-based solves stop.
    pub tol: f64,
    /// Iteration cap for randomized solves, as a multiple of `N`.
    pub maxit_factor: usize,
    /// Solve `K⁻¹ y` twice, independently, for the quadratic term. When
    /// false one randomized solve is reused for both factors.
    pub independent_bilinear: bool,
}

impl Default for StochasticOptions {
    fn default() -> Self {
        Self { tol: 1e-10, maxit_factor: 10, independent_bilinear: true }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradientSample {
    pub grad: [f64; 3],
    /// Mean applied CG iterations over all solves of this sample.
    pub avg_solver_iters: f64,
    /// Unweighted solution of the first `K x = y` solve, for warm starts.
    pub warm_start: Vec<f64>,
}

struct Solved {
    x: Vec<f64>,
    det: Vec<f64>,
    iters: usize,
}

/// One stochastic gradient `½ (tr(K⁻¹ ∂K) - yᵀK⁻¹ ∂K K⁻¹y)` per
/// log-parameter.
///
/// The trace is averaged over `zᵢᵀ K⁻¹ ∂K zᵢ`; the quadratic term is
/// `uᵀ ∂K v` with `u`, `v` two solves of `K x = y` that are independent
/// for randomized solvers. `warm` is the initial guess for the `y` solves.
pub fn stochastic_grad<R: Rng + ?Sized>(
    params: &GpHyperparams,
    data: &GpDataset,
    probes: &ProbeSet,
    solver: GradSolver,
    opts: &StochasticOptions,
    warm: Option<&[f64]>,
    rng: &mut R,
) -> Result<GradientSample> {
    if probes.is_empty() {
        return Err(Error::InvalidParameter("at least one probe is required".into()));
    }
    let n = data.len();
    let km = kernel_matrix(params, data);
    let y = data.targets();
    let zero = vec![0.0; n];
    let x0 = warm.unwrap_or(&zero);
    let key: u64 = rng.random();

    let mut jobs: Vec<(&[f64], &[f64])> = vec![(y, x0)];
    if opts.independent_bilinear && solver.estimator()?.is_some() {
        jobs.push((y, x0));
    }
    let y_jobs = jobs.len();
    jobs.extend(probes.probes().iter().map(|z| (z.as_slice(), zero.as_slice())));

    let solved = solve_all(&km.k, &jobs, solver, opts, key)?;
    let (u, v) = (&solved[0].x, &solved[y_jobs - 1].x);
    let t = probes.len() as f64;
    let mut grad = [0.0; 3];
    for (g, dk) in grad.iter_mut().zip(&km.grads) {
        let quad = dot(u, &matvec(dk, v)?);
        let trace: f64 = probes
            .probes()
            .iter()
            .zip(&solved[y_jobs..])
            .map(|(z, s)| Ok(dot(&s.x, &matvec(dk, z)?)))
            .sum::<Result<f64>>()?
            / t;
        *g = 0.5 * (trace - quad);
    }
    let avg = solved.iter().map(|s| s.iters as f64).sum::<f64>() / solved.len() as f64;
    Ok(GradientSample { grad, avg_solver_iters: avg, warm_start: solved[0].det.clone() })
}

fn solve_all(
    k: &DenseMatrix,
    jobs: &[(&[f64], &[f64])],
    solver: GradSolver,
    opts: &StochasticOptions,
    key: u64,
) -> Result<Vec<Solved>> {
    let n = k.data().len().isqrt();
    let estimator = solver.estimator()?;
    let chol = match solver {
        GradSolver::Cholesky => Some(factor(k)?),
        _ => None,
    };
    let one = |(i, (rhs, x0)): (usize, &(&[f64], &[f64]))| -> Result<Solved> {
        match (solver, &estimator, &chol) {
            (GradSolver::Cholesky, _, Some(c)) => {
                let x: Vec<f64> = c.solve(&nalgebra::DVector::from_column_slice(rhs)).iter().copied().collect();
                Ok(Solved { det: x.clone(), x, iters: 0 })
            }
            (GradSolver::Cg { maxit }, _, _) => {
                let s = solve_deterministic(Method::Cg, k, rhs, x0, opts.tol, maxit, SolverOptions::default())?;
                Ok(Solved { det: s.x.clone(), x: s.x, iters: s.iterations })
            }
            (_, Some(est), _) => {
                let mut rng = trial_rng(key, i as u64);
                let maxit = opts.maxit_factor * n;
                let r = randomized_solve(k, rhs, x0, Method::Cg, est, opts.tol, maxit, SolverOptions::default(), &mut rng)?;
                Ok(Solved { x: r.estimate, det: r.deterministic_iterate, iters: r.executed_iterations })
            }
            _ => unreachable!("solver and its state disagree"),
        }
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        jobs.par_iter().enumerate().map(one).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        jobs.iter().enumerate().map(one).collect()
    }
}

/// The AS parameter whose expected CG cost, averaged over `samples`
/// Rademacher right-hand sides, equals `target`.
pub fn calibrate_eta<R: Rng + ?Sized>(
    params: &GpHyperparams,
    data: &GpDataset,
    target: f64,
    samples: usize,
    tol: f64,
    rng: &mut R,
) -> Result<AsConfig> {
    let runs = probe_improvements(params, data, samples, tol, rng)?;
    let longest = runs.iter().map(Vec::len).max().unwrap_or(0) as f64;
    let eta = bisect(-1.0 + 1e-12, longest, target, |eta| {
        average_cost(&runs, &Estimator::As(AsConfig::new(eta)?))
    })?;
    AsConfig::new(eta)
}

/// The RR rate with `min_iters` guaranteed iterations whose expected CG
/// cost, averaged as in [`calibrate_eta`], equals `target`.
pub fn calibrate_rr_lambda<R: Rng + ?Sized>(
    params: &GpHyperparams,
    data: &GpDataset,
    min_iters: usize,
    target: f64,
    samples: usize,
    tol: f64,
    rng: &mut R,
) -> Result<RrConfig> {
    let runs = probe_improvements(params, data, samples, tol, rng)?;
    // Cost decreases in λ, so bisect on -log λ.
    let x = bisect(-30.0, 30.0, target, |x| {
        average_cost(&runs, &Estimator::Rr(RrConfig::new(min_iters, (-x).exp())?))
    })?;
    RrConfig::new(min_iters, (-x).exp())
}

fn probe_improvements<R: Rng + ?Sized>(
    params: &GpHyperparams,
    data: &GpDataset,
    samples: usize,
    tol: f64,
    rng: &mut R,
) -> Result<Vec<Vec<f64>>> {
    let km = kernel_matrix(params, data);
    let n = data.len();
    let probes = ProbeSet::rademacher(samples.max(1), n, rng);
    probes
        .probes()
        .iter()
        .map(|z| {
            let s = solve_deterministic(Method::Cg, &km.k, z, &vec![0.0; n], tol, 10 * n, SolverOptions::default())?;
            Ok(s.history.iter().map(|r| r.improvement).collect())
        })
        .collect()
}

fn average_cost(runs: &[Vec<f64>], est: &Estimator) -> Result<f64> {
    let mut total = 0.0;
    for t in runs {
        total += schedule_from_stream(t, est)?.expected_cost();
    }
    Ok(total / runs.len() as f64)
}

/// Solves `f(x) = target` for increasing `f` on `[lo, hi]`.
fn bisect(mut lo: f64, mut hi: f64, target: f64, f: impl Fn(f64) -> Result<f64>) -> Result<f64> {
    let (flo, fhi) = (f(lo)?, f(hi)?);
    if !(target >= flo && target <= fhi) {
        return Err(Error::InvalidParameter(format!("target cost {target} outside [{flo}, {fhi}]")));
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if f(mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
