//! Flat `key = value` experiment configuration.
//!
//! Values are resolved in order: built-in defaults, the `--config` file,
//! `--set key=value` pairs, then dedicated command-line flags.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Deserializer, Serialize};

use crate::error::CliError;

pub const DESK_N: usize = 200;
pub const DESK_TRIALS: u64 = 20_000;
pub const PAPER_N: usize = 500;
pub const PAPER_TRIALS: u64 = 300_000;
pub const GEN_MATRIX_N: usize = 500;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Optional; when present it must name the subcommand being run.
    pub experiment: Option<String>,
    pub output: PathBuf,
    pub workers: usize,
    pub paper_scale: bool,

    pub n: Option<usize>,
    pub density: f64,
    #[serde(deserialize_with = "one_or_many")]
    pub diag: Vec<f64>,
    pub seed: u64,
    pub rhs_seed: u64,
    pub matrix: Option<PathBuf>,
    pub rhs: Option<PathBuf>,
    pub method: String,
    pub tol: f64,
    pub maxit: Option<usize>,

    pub estimator: String,
    pub eta: f64,
    pub lambda: f64,
    pub min_iters: usize,

    pub trials: Option<u64>,
    pub trial_seed: u64,
    pub etas: Vec<f64>,
    pub rr_lambdas: Vec<f64>,
    pub rr_min_iters: Vec<usize>,
    pub match_cost: bool,

    pub oracle_instances: usize,
    pub oracle_horizon: usize,
    pub oracle_restarts: usize,

    pub data: Option<PathBuf>,
    pub target_col: Option<usize>,
    pub gp_n: usize,
    pub gp_dim: usize,
    pub gp_gamma: f64,
    pub gp_l: f64,
    pub gp_sigma2: f64,
    pub data_seed: u64,
    pub solvers: Vec<String>,
    pub steps: usize,
    pub lr: f64,
    pub milestones: Vec<usize>,
    pub decay: f64,
    pub probes: usize,
    pub warm_start: bool,
    pub independent_bilinear: bool,
    pub gp_tol: f64,
    pub init_log_gamma: f64,
    pub init_log_l: f64,
    pub init_log_sigma2: f64,
    pub rr_gp_min_iters: usize,

    pub target_cost: f64,
    pub calibrate: String,
    pub calibration_samples: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            experiment: None,
            output: PathBuf::from("out"),
            workers: 0,
            paper_scale: false,
            n: None,
            density: 0.16,
            diag: vec![10.0],
            seed: 0,
            rhs_seed: 1,
            matrix: None,
            rhs: None,
            method: "cg".into(),
            tol: 1e-8,
            maxit: None,
            estimator: "as".into(),
            eta: 20.0,
            lambda: 0.05,
            min_iters: 0,
            trials: None,
            trial_seed: 0,
            etas: vec![1.0, 5.0, 10.0, 20.0, 40.0, 60.0, 80.0, 100.0],
            rr_lambdas: vec![0.05, 0.10],
            rr_min_iters: vec![0, 10, 20, 40, 60, 80],
            match_cost: false,
            oracle_instances: 10,
            oracle_horizon: 8,
            oracle_restarts: 50,
            data: None,
            target_col: None,
            gp_n: 300,
            gp_dim: 4,
            gp_gamma: 1.0,
            gp_l: 0.5,
            gp_sigma2: 0.05,
            data_seed: 7,
            solvers: vec!["cholesky".into(), "as-cg".into(), "rr-cg".into(), "cg".into()],
            steps: 100,
            lr: 0.01,
            milestones: vec![55, 90],
            decay: 0.3,
            probes: 30,
            warm_start: true,
            independent_bilinear: true,
            gp_tol: 1e-10,
            init_log_gamma: 0.0,
            init_log_l: 0.0,
            init_log_sigma2: 0.0,
            rr_gp_min_iters: 10,
            target_cost: 35.0,
            calibrate: "system".into(),
            calibration_samples: 5,
        }
    }
}

fn one_or_many<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany {
        One(f64),
        Many(Vec<f64>),
    }
    Ok(match OneOrMany::deserialize(d)? {
        OneOrMany::One(v) => vec![v],
        OneOrMany::Many(v) => v,
    })
}

impl ExperimentConfig {
    /// Defaults overlaid with `path` (if any) and then with `sets`.
    pub fn load(path: Option<&Path>, sets: &[String]) -> Result<Self, CliError> {
        let mut table = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::Invalid(format!("cannot read config {}: {e}", p.display())))?;
                text.parse::<toml::Table>()
                    .map_err(|e| CliError::Invalid(format!("config {}: {e}", p.display())))?
            }
            None => toml::Table::new(),
        };
        for kv in sets {
            let parsed = parse_assignment(kv)?;
            table.extend(parsed);
        }
        if let Some((key, _)) = table.iter().find(|(_, v)| v.is_table()) {
            return Err(CliError::Invalid(format!("config key `{key}`: nested tables are not supported")));
        }
        toml::Value::Table(table).try_into().map_err(|e: toml::de::Error| CliError::Invalid(format!("config: {e}")))
    }

    /// Fills the size and trial defaults that depend on `--paper-scale`.
    pub fn resolve(&mut self, command: &str) -> Result<(), CliError> {
        if let Some(kind) = &self.experiment {
            if kind != command {
                return Err(CliError::Invalid(format!("config is for `{kind}`, not `{command}`")));
            }
        }
        let default_n = match command {
            "gen-matrix" => GEN_MATRIX_N,
            _ if self.paper_scale => PAPER_N,
            _ => DESK_N,
        };
        let n = *self.n.get_or_insert(default_n);
        self.trials.get_or_insert(if self.paper_scale { PAPER_TRIALS } else { DESK_TRIALS });
        self.maxit.get_or_insert(10 * n.max(1));
        self.validate()
    }

    fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Invalid(msg));
        if self.n == Some(0) {
            return bad("n must be positive".into());
        }
        if !(0.0..=1.0).contains(&self.density) {
            return bad(format!("density {} outside [0, 1]", self.density));
        }
        if self.diag.is_empty() || self.diag.iter().any(|d| !d.is_finite()) {
            return bad("diag must list at least one finite value".into());
        }
        if !(self.tol > 0.0) || !(self.gp_tol > 0.0) {
            return bad("tolerances must be positive".into());
        }
        if self.trials == Some(0) {
            return bad("trials must be at least 1".into());
        }
        if !(self.lr > 0.0) || self.probes == 0 {
            return bad("lr and probes must be positive".into());
        }
        if !(self.target_cost > 0.0) {
            return bad(format!("target_cost {} must be positive", self.target_cost));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n.unwrap_or(DESK_N)
    }

    pub fn trials(&self) -> u64 {
        self.trials.unwrap_or(DESK_TRIALS)
    }

    pub fn maxit(&self) -> usize {
        self.maxit.unwrap_or(10 * self.n())
    }

    /// The resolved configuration as `key = value` lines, without the keys
    /// that cannot change results (`output`, `workers`).
    pub fn echo(&self) -> Vec<String> {
        toml::to_string(self)
            .expect("flat config serializes")
            .lines()
            .filter(|l| !l.trim().is_empty() && !l.starts_with("output =") && !l.starts_with("workers ="))
            .map(str::to_owned)
            .collect()
    }
}

fn parse_assignment(kv: &str) -> Result<toml::Table, CliError> {
    let (key, value) =
        kv.split_once('=').ok_or_else(|| CliError::Invalid(format!("--set expects key=value, got `{kv}`")))?;
    let key = key.trim();
    let value = value.trim();
    let line = format!("{key} = {value}");
    line.parse::<toml::Table>()
        .or_else(|_| format!("{key} = {}", toml::Value::String(value.to_owned())).parse::<toml::Table>())
        .map_err(|e| CliError::Invalid(format!("--set {kv}: {e}")))
}
