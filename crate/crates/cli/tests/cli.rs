use std::path::Path;
use std::process::{Command, Output};

fn askrylov(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_askrylov")).args(args).arg("--output").arg(out).output().unwrap()
}

fn data_lines(text: &str) -> Vec<&str> {
    text.lines().filter(|l| !l.starts_with('#')).collect()
}

#[test]
fn zero_density_generates_a_scaled_identity() {
    let dir = tempfile::tempdir().unwrap();
    let o = askrylov(&["gen-matrix", "--n", "4", "--density", "0"], dir.path());
    assert!(o.status.success());
    let mtx = std::fs::read_to_string(dir.path().join("matrix_diag10.mtx")).unwrap();
    let entries: Vec<&str> = mtx.lines().filter(|l| !l.starts_with('%')).collect();
    assert_eq!(entries[0], "4 4 4");
    for (i, l) in entries[1..].iter().enumerate() {
        let f: Vec<&str> = l.split_whitespace().collect();
        assert_eq!((f[0], f[1]), (&*(i + 1).to_string(), &*(i + 1).to_string()));
        assert_eq!(f[2].parse::<f64>().unwrap(), 100.0);
    }
    let sidecar = std::fs::read_to_string(dir.path().join("matrix_diag10.toml")).unwrap();
    assert!(sidecar.contains("density = 0") && sidecar.contains("seed = 0"));
}

#[test]
fn generated_file_feeds_back_into_solve() {
    let dir = tempfile::tempdir().unwrap();
    assert!(askrylov(&["gen-matrix", "--n", "30"], dir.path()).status.success());
    let mtx = dir.path().join("matrix_diag10.mtx");
    let o = askrylov(&["solve", "--matrix", mtx.to_str().unwrap(), "--estimator", "det"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let summary = std::fs::read_to_string(dir.path().join("solve_summary.csv")).unwrap();
    let row: Vec<&str> = data_lines(&summary)[1].split(',').collect();
    assert_eq!(row[0], "file");
    assert!(row[8].parse::<f64>().unwrap() <= 1e-8);
}

#[test]
fn invalid_input_exits_with_1() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(askrylov(&["solve", "--method", "lsqr"], dir.path()).status.code(), Some(1));
    assert_eq!(askrylov(&["tradeoff", "--density", "2"], dir.path()).status.code(), Some(1));
    assert_eq!(askrylov(&["solve", "--set", "nope=1"], dir.path()).status.code(), Some(1));
    assert_eq!(askrylov(&["solve", "--unknown-flag"], dir.path()).status.code(), Some(1));
}

#[test]
fn numerical_failure_exits_with_2() {
    let dir = tempfile::tempdir().unwrap();
    // Symmetric but indefinite: CG meets a non-positive curvature.
    let mtx = dir.path().join("indef.mtx");
    std::fs::write(&mtx, "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1.0\n2 2 -1.0\n").unwrap();
    let o = askrylov(&["solve", "--matrix", mtx.to_str().unwrap(), "--estimator", "det"], dir.path());
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn single_trial_is_flagged() {
    let dir = tempfile::tempdir().unwrap();
    let o = askrylov(&["tradeoff", "--n", "40", "--trials", "1", "--etas", "3", "--rr-min-iters", "2"], dir.path());
    assert!(o.status.success());
    let csv = std::fs::read_to_string(dir.path().join("tradeoff_diag10_as.csv")).unwrap();
    assert!(csv.lines().any(|l| l.starts_with("# warning:")));
    assert_eq!(data_lines(&csv).len(), 2);
}

#[test]
fn tradeoff_rows_are_sorted_by_cost_and_echo_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "experiment = \"tradeoff\"\nn = 60\ntrials = 500\netas = [9, 1, 4]\nrr_lambdas = [0.1]\nrr_min_iters = [6, 0]\n").unwrap();
    let o = askrylov(&["tradeoff", "--config", cfg.to_str().unwrap(), "--diag", "8,13"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for name in ["tradeoff_diag8_as.csv", "tradeoff_diag13_as.csv", "tradeoff_diag8_rr_lambda0.1.csv"] {
        let csv = std::fs::read_to_string(dir.path().join(name)).unwrap();
        assert!(csv.contains("# config: trials = 500"));
        let rows = data_lines(&csv);
        assert_eq!(rows[0], "estimator,param,avg_iters,stderr_iters,metric_mean,metric_stderr,trials,seed,strict_variance,expected_cost");
        let avg: Vec<f64> = rows[1..].iter().map(|r| r.split(',').nth(2).unwrap().parse().unwrap()).collect();
        assert!(avg.windows(2).all(|w| w[0] <= w[1]), "{name}: {avg:?}");
    }
}

#[test]
fn zero_steps_give_a_header_only_trace() {
    let dir = tempfile::tempdir().unwrap();
    let o = askrylov(&["gp-train", "--steps", "0", "--gp-n", "40", "--solvers", "cholesky"], dir.path());
    assert!(o.status.success());
    let csv = std::fs::read_to_string(dir.path().join("gp_train_cholesky.csv")).unwrap();
    assert_eq!(data_lines(&csv), vec!["step,loss,log_gamma,log_l,log_sigma2,avg_solver_iters"]);
}

#[test]
fn oracle_check_reports_every_suite() {
    let dir = tempfile::tempdir().unwrap();
    let o = askrylov(&["oracle-check", "--instances", "2", "--horizon", "5", "--restarts", "5"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    let csv = std::fs::read_to_string(dir.path().join("oracle_check.csv")).unwrap();
    let rows = data_lines(&csv);
    assert_eq!(rows.len(), 1 + 2 + 10 + 1);
    assert!(rows[1..].iter().all(|r| r.ends_with(",PASS")));
    let full: Vec<&str> = rows.last().unwrap().split(',').collect();
    assert_eq!((full[0], full[6]), ("full-cost", "0"));
}
