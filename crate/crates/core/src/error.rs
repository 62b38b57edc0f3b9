use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("singular matrix: {0}")]
    Singular(String),
    #[error("matrix is not positive definite: {0}")]
    NotPositiveDefinite(String),
    #[error("unsupported expression: {0}")]
    Unsupported(String),
    #[error("assembly error: {0}")]
    Assembly(String),
    #[error("unknown geometry `{0}`")]
    UnknownGeometry(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("empty input: {0}")]
    Empty(String),
    #[error("integration failed at t = {t}: {reason}")]
    Integration { t: f64, reason: String },
    #[error("grid is too coarse: {0}")]
    NonCoercive(String),
    #[error("linear solver stagnated after {iterations} iterations (relative residual {residual:e})")]
    Solver { iterations: usize, residual: f64 },
    #[error("failed to converge: {0}")]
    Convergence(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
