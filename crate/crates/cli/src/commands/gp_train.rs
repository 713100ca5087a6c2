use as_krylov::gp::{
    calibrate_eta, calibrate_rr_lambda, train, GpDataset, GpHyperparams, GradSolver, StochasticOptions, Trace,
    TrainConfig,
};
use as_krylov::rng::seeded;

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::output::{num, Csv};

pub const TRACE_COLUMNS: [&str; 6] = ["step", "loss", "log_gamma", "log_l", "log_sigma2", "avg_solver_iters"];

pub fn dataset(config: &ExperimentConfig) -> Result<(GpDataset, String), CliError> {
    match &config.data {
        Some(path) => {
            let col = match config.target_col {
                Some(c) => c,
                None => column_count(path)?.checked_sub(1).ok_or_else(|| CliError::Invalid("empty dataset".into()))?,
            };
            Ok((GpDataset::from_csv(path, col)?, format!("{} (target column {col})", path.display())))
        }
        None => {
            let truth = GpHyperparams::new(config.gp_gamma, config.gp_l, config.gp_sigma2)?;
            let d = GpDataset::synthetic(config.gp_n, config.gp_dim, &truth, config.data_seed)?;
            let desc = format!(
                "synthetic N={} d={} gamma={} l={} sigma2={} seed={}",
                config.gp_n, config.gp_dim, config.gp_gamma, config.gp_l, config.gp_sigma2, config.data_seed
            );
            Ok((d, desc))
        }
    }
}

fn column_count(path: &std::path::Path) -> Result<usize, CliError> {
    let text = std::fs::read_to_string(path)?;
    let first = text.lines().find(|l| !l.trim().is_empty()).ok_or_else(|| CliError::Invalid("empty dataset".into()))?;
    Ok(first.split(',').count())
}

pub fn init_params(config: &ExperimentConfig) -> GpHyperparams {
    GpHyperparams::from_array([config.init_log_gamma, config.init_log_l, config.init_log_sigma2])
}

/// Parses a solver name, matching the truncated solvers to `target_cost`
/// average CG iterations at the initial hyperparameters.
pub fn grad_solver(name: &str, config: &ExperimentConfig, data: &GpDataset) -> Result<GradSolver, CliError> {
    let init = init_params(config);
    let mut rng = seeded(config.seed);
    let samples = config.calibration_samples.max(1);
    Ok(match name {
        "cholesky" => GradSolver::Cholesky,
        "cg" => GradSolver::Cg { maxit: (config.target_cost.round() as usize).max(1) },
        "as-cg" => {
            let c = calibrate_eta(&init, data, config.target_cost, samples, config.gp_tol, &mut rng)?;
            GradSolver::AsCg { eta: c.eta() }
        }
        "rr-cg" => {
            let c = calibrate_rr_lambda(&init, data, config.rr_gp_min_iters, config.target_cost, samples, config.gp_tol, &mut rng)?;
            GradSolver::RrCg { min_iters: c.min_iters, lambda: c.lambda }
        }
        other => return Err(CliError::Invalid(format!("unknown solver `{other}` (expected cholesky, cg, as-cg, rr-cg)"))),
    })
}

/// Standard deviation of consecutive loss differences.
pub fn loss_fluctuation(trace: &Trace) -> f64 {
    let d: Vec<f64> = trace.rows.windows(2).map(|w| w[1].loss - w[0].loss).collect();
    if d.len() < 2 {
        return 0.0;
    }
    let mean = d.iter().sum::<f64>() / d.len() as f64;
    (d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (d.len() - 1) as f64).sqrt()
}

pub fn run(config: &ExperimentConfig) -> Result<(), CliError> {
    if config.solvers.is_empty() {
        return Err(CliError::Invalid("no solvers given".into()));
    }
    let (data, desc) = dataset(config)?;
    let mut summary = Csv::new(config.output.join("gp_train_summary.csv"), "gp-train", config);
    summary.meta("dataset", &desc);
    summary.header(&["solver", "solver_config", "steps", "final_loss", "loss_diff_std", "mean_solver_iters", "aborted"]);
    for name in &config.solvers {
        let solver = grad_solver(name, config, &data)?;
        let tc = TrainConfig {
            steps: config.steps,
            lr: config.lr,
            milestones: config.milestones.clone(),
            decay: config.decay,
            solver,
            probes: config.probes,
            warm_start: config.warm_start,
            init: init_params(config),
            seed: config.trial_seed,
            stochastic: StochasticOptions {
                tol: config.gp_tol,
                independent_bilinear: config.independent_bilinear,
                ..Default::default()
            },
        };
        let trace = train(&data, &tc)?;
        let mut csv = Csv::new(config.output.join(format!("gp_train_{name}.csv")), "gp-train", config);
        csv.meta("dataset", &desc);
        csv.meta("solver", solver);
        if let Some(why) = &trace.aborted {
            csv.meta("aborted", why);
        }
        csv.header(&TRACE_COLUMNS);
        for r in &trace.rows {
            let p = r.params;
            csv.row(&[
                r.step.to_string(),
                num(r.loss),
                num(p.log_gamma),
                num(p.log_l),
                num(p.log_sigma2),
                num(r.avg_solver_iters),
            ]);
        }
        csv.write()?;
        let final_loss = trace.rows.last().map_or(f64::NAN, |r| r.loss);
        let iters = if trace.rows.is_empty() {
            0.0
        } else {
            trace.rows.iter().map(|r| r.avg_solver_iters).sum::<f64>() / trace.rows.len() as f64
        };
        let fluct = loss_fluctuation(&trace);
        summary.row(&[
            name.clone(),
            solver.to_string(),
            trace.rows.len().to_string(),
            num(final_loss),
            num(fluct),
            num(iters),
            trace.aborted.as_deref().unwrap_or("").replace(',', ";"),
        ]);
        println!("{name:<9} {solver}: final loss {final_loss:.6}, loss-difference std {fluct:.3e}, {iters:.1} CG iterations per solve");
    }
    summary.write()
}
