use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty arm")]
    EmptyArm,

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("tau beyond data: tau = {tau} exceeds maximum follow-up {max_time}")]
    TauBeyondData { tau: f64, max_time: f64 },

    #[error("variance undefined at exhausted risk set (time {time})")]
    ExhaustedRiskSet { time: f64 },

    #[error("degenerate variance")]
    DegenerateVariance,

    #[error("no events")]
    NoEvents,

    #[error("degenerate: log-rank variance is zero")]
    Degenerate,

    #[error("divergent estimate: partial likelihood is monotone")]
    DivergentEstimate,

    #[error("Newton iteration did not converge in {iterations} iterations (last theta = {last_theta})")]
    NotConverged { iterations: usize, last_theta: f64 },

    #[error("power on boundary: {0}")]
    PowerOnBoundary(f64),

    #[error("{path}: line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("{context}: {failed} of {total} replicates failed (first error: {first})")]
    TooManyFailures {
        context: String,
        failed: usize,
        total: usize,
        first: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
