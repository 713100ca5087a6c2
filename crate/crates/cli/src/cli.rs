use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::ExperimentConfig;

#[derive(Debug, Parser)]
#[command(name = "askrylov", version, about = "Randomized truncation experiments for CG, CR and GMRES")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a random sparse SPD matrix in Matrix Market format.
    GenMatrix {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        problem: ProblemArgs,
    },
    /// One randomized solve of a generated or file-backed system.
    Solve {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        problem: ProblemArgs,
        #[command(flatten)]
        estimator: EstimatorArgs,
    },
    /// Cost versus error curves for AS and each RR rate.
    Tradeoff {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        problem: ProblemArgs,
        #[command(flatten)]
        sweep: SweepArgs,
    },
    /// Compare AS schedules against the brute-force optimum.
    OracleCheck {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        oracle: OracleArgs,
    },
    /// Train GP hyperparameters with exact or Krylov-based gradients.
    GpTrain {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        gp: GpArgs,
    },
    /// Find estimator parameters that hit a target average cost.
    CalibrateCost {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        problem: ProblemArgs,
        #[command(flatten)]
        gp: GpArgs,
        /// `system` for the linear system, `gp` for the kernel matrix.
        #[arg(long)]
        calibrate: Option<String>,
        /// Right-hand sides averaged over in `gp` mode.
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long, value_delimiter = ',')]
        rr_min_iters: Option<Vec<usize>>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::GenMatrix { .. } => "gen-matrix",
            Command::Solve { .. } => "solve",
            Command::Tradeoff { .. } => "tradeoff",
            Command::OracleCheck { .. } => "oracle-check",
            Command::GpTrain { .. } => "gp-train",
            Command::CalibrateCost { .. } => "calibrate-cost",
        }
    }

    pub fn common(&self) -> &Common {
        match self {
            Command::GenMatrix { common, .. }
            | Command::Solve { common, .. }
            | Command::Tradeoff { common, .. }
            | Command::OracleCheck { common, .. }
            | Command::GpTrain { common, .. }
            | Command::CalibrateCost { common, .. } => common,
        }
    }

    /// Writes every flag that was given into `c`.
    pub fn apply(&self, c: &mut ExperimentConfig) {
        self.common().apply(c);
        match self {
            Command::GenMatrix { problem, .. } => problem.apply(c),
            Command::Solve { problem, estimator, .. } => {
                problem.apply(c);
                estimator.apply(c);
            }
            Command::Tradeoff { problem, sweep, .. } => {
                problem.apply(c);
                sweep.apply(c);
            }
            Command::OracleCheck { oracle, .. } => oracle.apply(c),
            Command::GpTrain { gp, .. } => gp.apply(c),
            Command::CalibrateCost { problem, gp, calibrate, samples, rr_min_iters, .. } => {
                problem.apply(c);
                gp.apply(c);
                set(&mut c.calibrate, calibrate);
                set(&mut c.calibration_samples, samples);
                set(&mut c.rr_min_iters, rr_min_iters);
            }
        }
    }
}

fn set<T: Clone>(slot: &mut T, value: &Option<T>) {
    if let Some(v) = value {
        *slot = v.clone();
    }
}

fn set_opt<T: Clone>(slot: &mut Option<T>, value: &Option<T>) {
    if value.is_some() {
        slot.clone_from(value);
    }
}

#[derive(Debug, Args)]
pub struct Common {
    /// Flat `key = value` configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Override any configuration key, e.g. `--set etas=[1,2,4]`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub sets: Vec<String>,
    /// Output directory.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Worker threads; 0 uses every available core. Output does not depend on it.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Seed of the generated matrix (and of the oracle restarts).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Use the full-size defaults (n = 500, 300000 trials).
    #[arg(long)]
    pub paper_scale: bool,
}

impl Common {
    fn apply(&self, c: &mut ExperimentConfig) {
        set(&mut c.output, &self.output);
        set(&mut c.workers, &self.workers);
        set(&mut c.seed, &self.seed);
        c.paper_scale |= self.paper_scale;
    }
}

#[derive(Debug, Args)]
pub struct ProblemArgs {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub density: Option<f64>,
    /// Diagonal of the generating factor; a comma list gives several systems.
    #[arg(long, value_delimiter = ',')]
    pub diag: Option<Vec<f64>>,
    #[arg(long)]
    pub rhs_seed: Option<u64>,
    /// Matrix Market file used instead of a generated matrix.
    #[arg(long)]
    pub matrix: Option<PathBuf>,
    /// Plain-text right-hand side used instead of a Gaussian draw.
    #[arg(long)]
    pub rhs: Option<PathBuf>,
    /// `cg`, `cr` or `gmres`.
    #[arg(long)]
    pub method: Option<String>,
    /// Relative residual tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub maxit: Option<usize>,
}

impl ProblemArgs {
    fn apply(&self, c: &mut ExperimentConfig) {
        set_opt(&mut c.n, &self.n);
        set(&mut c.density, &self.density);
        set(&mut c.diag, &self.diag);
        set(&mut c.rhs_seed, &self.rhs_seed);
        set_opt(&mut c.matrix, &self.matrix);
        set_opt(&mut c.rhs, &self.rhs);
        set(&mut c.method, &self.method);
        set(&mut c.tol, &self.tol);
        set_opt(&mut c.maxit, &self.maxit);
    }
}

#[derive(Debug, Args)]
pub struct EstimatorArgs {
    /// `as`, `rr` or `det`.
    #[arg(long)]
    pub estimator: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub min_iters: Option<usize>,
    #[arg(long)]
    pub trial_seed: Option<u64>,
}

impl EstimatorArgs {
    fn apply(&self, c: &mut ExperimentConfig) {
        set(&mut c.estimator, &self.estimator);
        set(&mut c.eta, &self.eta);
        set(&mut c.lambda, &self.lambda);
        set(&mut c.min_iters, &self.min_iters);
        set(&mut c.trial_seed, &self.trial_seed);
    }
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub trial_seed: Option<u64>,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub etas: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub rr_lambdas: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub rr_min_iters: Option<Vec<usize>>,
    /// Also run AS calibrated to the expected cost of every RR point.
    #[arg(long)]
    pub match_cost: bool,
}

impl SweepArgs {
    fn apply(&self, c: &mut ExperimentConfig) {
        set_opt(&mut c.trials, &self.trials);
        set(&mut c.trial_seed, &self.trial_seed);
        set(&mut c.etas, &self.etas);
        set(&mut c.rr_lambdas, &self.rr_lambdas);
        set(&mut c.rr_min_iters, &self.rr_min_iters);
        c.match_cost |= self.match_cost;
    }
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    /// Random diminishing instances.
    #[arg(long)]
    pub instances: Option<usize>,
    /// Horizon `N` of the diminishing instances.
    #[arg(long)]
    pub horizon: Option<usize>,
    #[arg(long)]
    pub restarts: Option<usize>,
}

impl OracleArgs {
    fn apply(&self, c: &mut ExperimentConfig) {
        set(&mut c.oracle_instances, &self.instances);
        set(&mut c.oracle_horizon, &self.horizon);
        set(&mut c.oracle_restarts, &self.restarts);
    }
}

#[derive(Debug, Args)]
pub struct GpArgs {
    /// Headerless numeric CSV; the synthetic dataset is used when absent.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Zero-based target column of `--data` (default: last).
    #[arg(long)]
    pub target_col: Option<usize>,
    /// Comma list of `cholesky`, `cg`, `as-cg`, `rr-cg`.
    #[arg(long, value_delimiter = ',')]
    pub solvers: Option<Vec<String>>,
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub probes: Option<usize>,
    /// Average CG iterations per solve that the truncated solvers are matched to.
    #[arg(long)]
    pub target_cost: Option<f64>,
    #[arg(long)]
    pub gp_n: Option<usize>,
    #[arg(long)]
    pub data_seed: Option<u64>,
}

impl GpArgs {
    fn apply(&self, c: &mut ExperimentConfig) {
        set_opt(&mut c.data, &self.data);
        set_opt(&mut c.target_col, &self.target_col);
        set(&mut c.solvers, &self.solvers);
        set(&mut c.steps, &self.steps);
        set(&mut c.lr, &self.lr);
        set(&mut c.probes, &self.probes);
        set(&mut c.target_cost, &self.target_cost);
        set(&mut c.gp_n, &self.gp_n);
        set(&mut c.data_seed, &self.data_seed);
    }
}
