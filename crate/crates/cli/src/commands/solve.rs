use as_krylov::driver::randomized_solve;
use as_krylov::krylov::{solve_deterministic, SolverOptions};
use as_krylov::linop::{norm2, residual, LinearOperator};
use as_krylov::rng::trial_rng;
use as_krylov::truncation::{AsConfig, Estimator, RrConfig};

use super::{method, systems};
use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::output::{num, Csv};

pub fn estimator(config: &ExperimentConfig) -> Result<Option<Estimator>, CliError> {
    Ok(match config.estimator.as_str() {
        "as" => Some(Estimator::As(AsConfig::new(config.eta)?)),
        "rr" => Some(Estimator::Rr(RrConfig::new(config.min_iters, config.lambda)?)),
        "det" => None,
        other => return Err(CliError::Invalid(format!("unknown estimator `{other}` (expected as, rr or det)"))),
    })
}

/// One solve per system; trial `0` of `trial_seed` drives the truncation.
pub fn run(config: &ExperimentConfig) -> Result<(), CliError> {
    let method = method(config)?;
    let est = estimator(config)?;
    let mut summary = Csv::new(config.output.join("solve_summary.csv"), "solve", config);
    summary.header(&[
        "system",
        "method",
        "estimator",
        "param",
        "iterations",
        "truncated",
        "solver_iterations",
        "residual_norm",
        "relative_residual",
    ]);
    for sys in systems(config)? {
        let n = sys.matrix.dim();
        let x0 = vec![0.0; n];
        let (x, iterations, truncated, solver_iterations) = match &est {
            Some(e) => {
                let mut rng = trial_rng(config.trial_seed, 0);
                let r = randomized_solve(
                    &sys.matrix,
                    &sys.rhs,
                    &x0,
                    method,
                    e,
                    config.tol,
                    config.maxit(),
                    SolverOptions::default(),
                    &mut rng,
                )?;
                (r.estimate, r.executed_iterations, r.truncated, r.diagnostics.solver_iterations)
            }
            None => {
                let s = solve_deterministic(method, &sys.matrix, &sys.rhs, &x0, config.tol, config.maxit(), SolverOptions::default())?;
                if !s.converged {
                    return Err(as_krylov::Error::MaxIterations(config.maxit()).into());
                }
                (s.x, s.iterations, false, s.iterations)
            }
        };
        let r = norm2(&residual(&sys.matrix, &sys.rhs, &x)?);
        let (family, param) = match &est {
            Some(e) => (e.family().to_owned(), e.to_string()),
            None => ("det".to_owned(), String::new()),
        };
        summary.row(&[
            sys.label.clone(),
            method.to_string(),
            family,
            param,
            iterations.to_string(),
            truncated.to_string(),
            solver_iterations.to_string(),
            num(r),
            num(r / norm2(&sys.rhs)),
        ]);
        let mut sol = Csv::new(config.output.join(format!("solve_{}_x.csv", sys.label)), "solve", config);
        sol.header(&["index", "x"]);
        for (i, v) in x.iter().enumerate() {
            sol.row(&[i.to_string(), num(*v)]);
        }
        sol.write()?;
        println!("{}: {} iterations, truncated = {truncated}, ‖r‖ = {r:.3e}", sys.label, iterations);
    }
    summary.write()
}
