use as_krylov::oracle::{brute_force_optimum, objective, non_diminishing_instance, OptimizationInstance, OracleOptions};
use as_krylov::rng::trial_rng;
use as_krylov::truncation::{as_probabilities_finite, schedule_from_stream, AsConfig, Estimator, TruncationSchedule};
use rand::Rng;

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::output::{num, Csv};

/// Parameters `(n, m, ε, N)` of the streaming counterexamples.
pub const NON_DIMINISHING_SUITE: [(isize, usize, f64, usize); 10] = [
    (-1, 1, 0.05, 8),
    (-1, 2, 0.01, 10),
    (-1, 3, 0.3, 10),
    (0, 1, 0.5, 8),
    (0, 2, 0.1, 9),
    (0, 3, 0.02, 10),
    (1, 1, 0.01, 8),
    (1, 3, 0.2, 12),
    (2, 2, 0.05, 10),
    (3, 2, 0.1, 12),
];

const DIMINISHING_TOL: f64 = 1e-6;
const SUBOPTIMAL_GAP: f64 = 1e-8;

/// Strictly decreasing improvements with random ratios in `[0.2, 0.95)`.
pub fn diminishing_instance(seed: u64, index: u64, horizon: usize) -> Vec<f64> {
    let mut rng = trial_rng(seed, index);
    let mut v = 1.0 + 9.0 * rng.random::<f64>();
    (0..horizon)
        .map(|_| {
            let t = v;
            v *= 0.2 + 0.75 * rng.random::<f64>();
            t
        })
        .collect()
}

struct Case {
    suite: &'static str,
    id: String,
    t: Vec<f64>,
    schedule: TruncationSchedule,
}

enum Verdict {
    Pass,
    Fail(String),
}

pub fn run(config: &ExperimentConfig) -> Result<(), CliError> {
    let horizon = config.oracle_horizon;
    if !(2..=as_krylov::oracle::MAX_HORIZON).contains(&horizon) {
        return Err(CliError::Invalid(format!("oracle_horizon must lie in 2..={}", as_krylov::oracle::MAX_HORIZON)));
    }
    let opts = OracleOptions { restarts: config.oracle_restarts.max(1), seed: config.seed, ..Default::default() };
    let mut cases = Vec::new();
    for i in 0..config.oracle_instances {
        let t = diminishing_instance(config.seed, i as u64, horizon);
        let eta = -1.0 + 1e-3 + trial_rng(config.seed, i as u64 + (1 << 32)).random::<f64>() * (horizon as f64 - 1.002);
        let schedule = as_probabilities_finite(&t, &AsConfig::new(eta)?)?;
        cases.push(Case { suite: "diminishing", id: format!("{i}:eta={eta:.4}"), t, schedule });
    }
    for (n, m, eps, len) in NON_DIMINISHING_SUITE {
        let t = non_diminishing_instance(n, m, eps, len)?;
        let est = Estimator::As(AsConfig::new(n as f64 + 0.5)?);
        let schedule = schedule_from_stream(&t, &est)?;
        cases.push(Case { suite: "non-diminishing", id: format!("n={n};m={m};eps={eps};N={len}"), t, schedule });
    }
    let t = diminishing_instance(config.seed, u64::MAX, horizon);
    let schedule = schedule_from_stream(&t, &Estimator::As(AsConfig::new(horizon as f64)?))?;
    cases.push(Case { suite: "full-cost", id: format!("C=N={horizon}"), t, schedule });

    let mut csv = Csv::new(config.output.join("oracle_check.csv"), "oracle-check", config);
    csv.meta("restarts", opts.restarts);
    csv.header(&["suite", "instance", "horizon", "cost", "as_objective", "oracle_objective", "gap", "rel_gap", "schedule_valid", "status"]);
    println!("{:<12} {:<28} {:>10} {:>14} {:>14} {:>11}  status", "suite", "instance", "cost", "as", "oracle", "rel_gap");
    let mut failures = 0;
    for case in &cases {
        let cost = case.schedule.expected_cost();
        let valid = case.schedule.validate(1e-10).is_ok();
        let inst = OptimizationInstance::new(case.t.clone(), cost)?;
        let as_obj = objective(case.schedule.probs(), &inst)?;
        let (oracle_obj, verdict) = match brute_force_optimum(&inst, &opts) {
            Ok(res) => (res.objective, judge(case.suite, as_obj, res.objective, valid)),
            Err(e) if e.is_numerical() => (f64::NAN, Verdict::Fail(format!("oracle: {e}"))),
            Err(e) => return Err(e.into()),
        };
        let gap = as_obj - oracle_obj;
        let rel = if as_obj > 0.0 { gap / as_obj } else { gap };
        let status = match &verdict {
            Verdict::Pass => "PASS".to_owned(),
            Verdict::Fail(why) => {
                failures += 1;
                format!("FAIL ({why})")
            }
        };
        println!("{:<12} {:<28} {:>10.4} {:>14.6e} {:>14.6e} {:>11.3e}  {status}", case.suite, case.id, cost, as_obj, oracle_obj, rel);
        csv.row(&[
            case.suite.to_owned(),
            case.id.clone(),
            case.t.len().to_string(),
            num(cost),
            num(as_obj),
            num(oracle_obj),
            num(gap),
            num(rel),
            valid.to_string(),
            status.replace(',', ";"),
        ]);
    }
    csv.write()?;
    if failures > 0 {
        return Err(CliError::ChecksFailed(failures));
    }
    Ok(())
}

fn judge(suite: &str, as_obj: f64, oracle_obj: f64, valid: bool) -> Verdict {
    if !valid {
        return Verdict::Fail("invalid AS schedule".into());
    }
    let gap = as_obj - oracle_obj;
    match suite {
        "diminishing" if gap.abs() <= DIMINISHING_TOL * as_obj.max(f64::MIN_POSITIVE) => Verdict::Pass,
        "diminishing" => Verdict::Fail(format!("relative gap {:.3e}", gap / as_obj)),
        "non-diminishing" if gap > SUBOPTIMAL_GAP => Verdict::Pass,
        "non-diminishing" => Verdict::Fail(format!("gap {gap:.3e} not above {SUBOPTIMAL_GAP:e}")),
        _ if gap == 0.0 => Verdict::Pass,
        _ => Verdict::Fail(format!("gap {gap:e} is not exactly 0")),
    }
}
