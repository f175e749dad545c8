use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("configuration is not collision free: {0}")]
    NotCollisionFree(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("point lies outside the twist domain: {0}")]
    OutsideDomain(String),
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("operator is not globally elliptic: {0}")]
    NotElliptic(String),
    #[error("grid geometry: {0}")]
    Geometry(String),
    #[error("potential is singular at {0}")]
    Singular(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("malformed data: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
