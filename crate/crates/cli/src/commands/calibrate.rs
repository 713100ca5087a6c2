use as_krylov::driver::{Experiment, Problem};
use as_krylov::gp;
use as_krylov::rng::seeded;
use as_krylov::truncation::Estimator;

use super::gp_train::{dataset, init_params};
use super::{method, systems};
use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::output::{num, Csv};

/// Parameters reaching `target_cost` average iterations: `η` for AS and
/// `λ` for RR at each `rr_min_iters`. In `system` mode the cost is exact
/// over the deterministic trajectory; in `gp` mode it is averaged over
/// Rademacher right-hand sides of the kernel matrix at the initial
/// hyperparameters.
pub fn run(config: &ExperimentConfig) -> Result<(), CliError> {
    let target = config.target_cost;
    let mut csv = Csv::new(config.output.join(format!("calibrate_{}.csv", config.calibrate)), "calibrate-cost", config);
    csv.meta("target_cost", target);
    csv.header(&["system", "estimator", "min_iters", "param", "expected_cost"]);
    let skip = |csv: &mut Csv, what: String, e: as_krylov::Error| -> Result<(), CliError> {
        if e.is_numerical() {
            return Err(e.into());
        }
        csv.meta("unattainable", format!("{what}: {e}"));
        Ok(())
    };
    match config.calibrate.as_str() {
        "system" => {
            let method = method(config)?;
            for sys in systems(config)? {
                let mut problem = Problem::new(&sys.matrix, sys.rhs.clone(), method);
                problem.tol = config.tol;
                problem.maxit = config.maxit();
                let exp = Experiment::new(problem)?;
                match exp.calibrate_eta(target) {
                    Ok(c) => {
                        let cost = exp.exact_statistics(&Estimator::As(c))?.expected_cost;
                        csv.row(&[sys.label.clone(), "as".into(), String::new(), num(c.eta()), num(cost)]);
                    }
                    Err(e) => skip(&mut csv, format!("{} as", sys.label), e)?,
                }
                for &m in &config.rr_min_iters {
                    match exp.calibrate_rr_lambda(m, target) {
                        Ok(c) => {
                            let cost = exp.exact_statistics(&Estimator::Rr(c))?.expected_cost;
                            csv.row(&[sys.label.clone(), "rr".into(), m.to_string(), num(c.lambda), num(cost)]);
                        }
                        Err(e) => skip(&mut csv, format!("{} rr min_iters {m}", sys.label), e)?,
                    }
                }
            }
        }
        "gp" => {
            let (data, desc) = dataset(config)?;
            csv.meta("dataset", desc);
            let init = init_params(config);
            let samples = config.calibration_samples.max(1);
            match gp::calibrate_eta(&init, &data, target, samples, config.gp_tol, &mut seeded(config.seed)) {
                Ok(c) => csv.row(&["gp".into(), "as".into(), String::new(), num(c.eta()), num(target)]),
                Err(e) => skip(&mut csv, "gp as".into(), e)?,
            }
            for &m in &config.rr_min_iters {
                match gp::calibrate_rr_lambda(&init, &data, m, target, samples, config.gp_tol, &mut seeded(config.seed)) {
                    Ok(c) => csv.row(&["gp".into(), "rr".into(), m.to_string(), num(c.lambda), num(target)]),
                    Err(e) => skip(&mut csv, format!("gp rr min_iters {m}"), e)?,
                }
            }
        }
        other => return Err(CliError::Invalid(format!("calibrate must be `system` or `gp`, got `{other}`"))),
    }
    csv.write()?;
    println!("wrote {}", csv.path().display());
    Ok(())
}
