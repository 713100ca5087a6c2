mod calibrate;
mod gen_matrix;
mod gp_train;
mod oracle_check;
mod solve;
mod tradeoff;

use as_krylov::krylov::Method;
use as_krylov::linop::{
    gaussian_vector, gen_sparse_spd, read_matrix_market, read_vector, CsrMatrix, LinearOperator, SpdGenParams,
};

use crate::config::ExperimentConfig;
use crate::error::CliError;

pub fn dispatch(command: &str, config: &ExperimentConfig) -> Result<(), CliError> {
    match command {
        "gen-matrix" => gen_matrix::run(config),
        "solve" => solve::run(config),
        "tradeoff" => tradeoff::run(config),
        "oracle-check" => oracle_check::run(config),
        "gp-train" => gp_train::run(config),
        "calibrate-cost" => calibrate::run(config),
        other => Err(CliError::Invalid(format!("unknown command `{other}`"))),
    }
}

/// A linear system and the label used in artifact names.
pub struct System {
    pub label: String,
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
}

pub fn gen_params(config: &ExperimentConfig, diag: f64) -> SpdGenParams {
    SpdGenParams { n: config.n(), density: config.density, diag, seed: config.seed }
}

pub fn diag_label(diag: f64) -> String {
    format!("diag{diag}")
}

/// The file-backed system, or one generated system per `diag` entry.
pub fn systems(config: &ExperimentConfig) -> Result<Vec<System>, CliError> {
    let matrices: Vec<(String, CsrMatrix)> = match &config.matrix {
        Some(path) => {
            // A symmetric input is taken to be SPD; CG reports a failure otherwise.
            vec![("file".into(), read_matrix_market(path)?.assume_spd())]
        }
        None => config
            .diag
            .iter()
            .map(|&d| Ok((diag_label(d), gen_sparse_spd(&gen_params(config, d))?)))
            .collect::<Result<_, CliError>>()?,
    };
    matrices
        .into_iter()
        .map(|(label, matrix)| {
            let rhs = match &config.rhs {
                Some(path) => read_vector(path)?,
                None => gaussian_vector(matrix.dim(), config.rhs_seed),
            };
            if rhs.len() != matrix.dim() {
                return Err(CliError::Invalid(format!(
                    "right-hand side has length {}, matrix has dimension {}",
                    rhs.len(),
                    matrix.dim()
                )));
            }
            Ok(System { label, matrix, rhs })
        })
        .collect()
}

pub fn method(config: &ExperimentConfig) -> Result<Method, CliError> {
    Ok(config.method.parse::<Method>()?)
}
