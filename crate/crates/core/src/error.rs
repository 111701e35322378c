use std::io;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The log-log regression could not be carried out.
    #[error("degenerate fit at alpha={alpha}: {reason}")]
    DegenerateFit { alpha: f64, reason: String },

    /// The observed statistic lies outside every calibrated candidate.
    #[error("statistic out of calibrated range: {0}")]
    OutOfRange(String),

    #[error("truncated SVD did not converge after {iterations} Lanczos steps (max residual {residual:e})")]
    Convergence { iterations: usize, residual: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
