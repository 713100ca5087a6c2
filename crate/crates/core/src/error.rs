use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("operator is not flagged symmetric")]
    NotSymmetric,

    #[error("operator is not positive definite: (Ap, p) = {0:e} at iteration {1}")]
    NotSpd(f64, usize),

    #[error("solver breakdown at iteration {iteration}: {reason}")]
    Breakdown { iteration: usize, reason: &'static str },

    #[error("maximum number of iterations ({0}) exceeded")]
    MaxIterations(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("inconsistent schedule at index {index}: P = {prob:e}, survival = {survival:e}")]
    ScheduleInconsistency { index: usize, prob: f64, survival: f64 },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("Cholesky factorization failed: {0}")]
    Cholesky(String),

    #[error("oracle did not converge: {0}")]
    OracleNonConvergence(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("trial {index}: {source}")]
    Trial {
        index: u64,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NotSpd(..)
                | Error::Breakdown { .. }
                | Error::MaxIterations(_)
                | Error::Degenerate(_)
                | Error::ScheduleInconsistency { .. }
                | Error::Cholesky(_)
                | Error::OracleNonConvergence(_)
                | Error::NonFinite(_)
        ) || matches!(self, Error::Trial { source, .. } if source.is_numerical())
    }
}
