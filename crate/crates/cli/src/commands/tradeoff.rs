use as_krylov::driver::{Experiment, Problem, TrialStatistics};
use as_krylov::linop::{CsrMatrix, LinearOperator};
use as_krylov::truncation::{AsConfig, Estimator, RrConfig};

use super::{method, systems, System};
use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::output::{num, Csv};

pub const COLUMNS: [&str; 10] = [
    "estimator",
    "param",
    "avg_iters",
    "stderr_iters",
    "metric_mean",
    "metric_stderr",
    "trials",
    "seed",
    "strict_variance",
    "expected_cost",
];

/// One CSV per estimator family and system: `tradeoff_<system>_as.csv` and
/// `tradeoff_<system>_rr_lambda<λ>.csv`, rows sorted by average iterations.
pub fn run(config: &ExperimentConfig) -> Result<(), CliError> {
    let method = method(config)?;
    if config.etas.is_empty() && (config.rr_lambdas.is_empty() || config.rr_min_iters.is_empty()) {
        return Err(CliError::Invalid("empty estimator grid".into()));
    }
    for sys in systems(config)? {
        let System { label, matrix, rhs } = sys;
        let mut problem = Problem::new(&matrix, rhs, method);
        problem.tol = config.tol;
        problem.maxit = config.maxit();
        let exp = Experiment::new(problem)?;
        println!("{label}: deterministic {method} converged = {} after {} iterations", exp.converged(), exp.iterations());

        if !config.etas.is_empty() {
            let grid = config.etas.iter().map(|&e| Ok(Estimator::As(AsConfig::new(e)?))).collect::<Result<Vec<_>, CliError>>()?;
            curve(config, &exp, &matrix, &label, "as", &grid)?;
        }
        if !config.rr_min_iters.is_empty() {
            for &lambda in &config.rr_lambdas {
                let grid = config
                    .rr_min_iters
                    .iter()
                    .map(|&m| Ok(Estimator::Rr(RrConfig::new(m, lambda)?)))
                    .collect::<Result<Vec<_>, CliError>>()?;
                curve(config, &exp, &matrix, &label, &format!("rr_lambda{lambda}"), &grid)?;
            }
        }
        if config.match_cost {
            matched(config, &exp, &matrix, &label)?;
        }
    }
    Ok(())
}

fn start_csv(config: &ExperimentConfig, exp: &Experiment<'_, CsrMatrix>, matrix: &CsrMatrix, label: &str, name: &str) -> Csv {
    let mut csv = Csv::new(config.output.join(format!("tradeoff_{label}_{name}.csv")), "tradeoff", config);
    csv.meta("system", label);
    csv.meta("n", matrix.dim());
    csv.meta("nnz", matrix.nnz());
    csv.meta("method", exp.problem().method);
    csv.meta("metric", exp.metric_kind().name());
    csv.meta("tol", config.tol);
    csv.meta("maxit", config.maxit());
    csv.meta("deterministic_iterations", exp.iterations());
    csv.meta("converged", exp.converged());
    csv.meta("trials", config.trials());
    csv.meta("seed", config.trial_seed);
    if config.trials() == 1 {
        csv.meta("warning", "a single trial gives no variance estimate; standard errors are reported as 0");
    }
    csv
}

fn curve(
    config: &ExperimentConfig,
    exp: &Experiment<'_, CsrMatrix>,
    matrix: &CsrMatrix,
    label: &str,
    name: &str,
    grid: &[Estimator],
) -> Result<(), CliError> {
    let mut csv = start_csv(config, exp, matrix, label, name);
    csv.header(&COLUMNS);
    for row in exp.variance_curve(grid, config.trials(), config.trial_seed, config.workers)? {
        let exact = exp.exact_statistics(&row.estimator)?;
        csv.row(&stats_fields(&row.estimator, &row.stats, exact.expected_cost));
    }
    csv.write()?;
    println!("  wrote {}", csv.path().display());
    Ok(())
}

pub fn stats_fields(est: &Estimator, s: &TrialStatistics, expected_cost: f64) -> Vec<String> {
    let (name, param) = match est {
        Estimator::As(c) => ("as".to_owned(), num(c.eta())),
        Estimator::Rr(c) => (format!("rr(lambda={})", c.lambda), c.min_iters.to_string()),
    };
    vec![
        name,
        param,
        num(s.avg_iterations),
        num(s.std_err_iterations),
        num(s.mean_sq_error_metric),
        num(s.metric_std_err),
        s.trials.to_string(),
        s.seed.to_string(),
        num(s.strict_variance),
        num(expected_cost),
    ]
}

/// AS calibrated to the exact expected cost of every RR grid point.
fn matched(config: &ExperimentConfig, exp: &Experiment<'_, CsrMatrix>, matrix: &CsrMatrix, label: &str) -> Result<(), CliError> {
    let mut csv = start_csv(config, exp, matrix, label, "matched");
    csv.header(&[
        "rr_lambda",
        "rr_min_iters",
        "rr_avg_iters",
        "rr_metric_mean",
        "rr_metric_stderr",
        "as_eta",
        "as_avg_iters",
        "as_metric_mean",
        "as_metric_stderr",
        "expected_cost",
    ]);
    for &lambda in &config.rr_lambdas {
        for &m in &config.rr_min_iters {
            let rr = Estimator::Rr(RrConfig::new(m, lambda)?);
            let cost = exp.exact_statistics(&rr)?.expected_cost;
            let as_cfg = match exp.calibrate_eta(cost) {
                Ok(c) => c,
                Err(e) if !e.is_numerical() => {
                    csv.meta("skipped", format!("lambda {lambda}, min_iters {m}: {e}"));
                    continue;
                }
                Err(e) => return Err(e.into()),
            };
            let a = exp.run_trials(&Estimator::As(as_cfg), config.trials(), config.trial_seed, config.workers)?;
            let r = exp.run_trials(&rr, config.trials(), config.trial_seed, config.workers)?;
            csv.row(&[
                num(lambda),
                m.to_string(),
                num(r.avg_iterations),
                num(r.mean_sq_error_metric),
                num(r.metric_std_err),
                num(as_cfg.eta()),
                num(a.avg_iterations),
                num(a.mean_sq_error_metric),
                num(a.metric_std_err),
                num(cost),
            ]);
        }
    }
    csv.write()?;
    println!("  wrote {}", csv.path().display());
    Ok(())
}
