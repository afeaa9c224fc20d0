use thiserror::Error;

/// Errors raised by the library surface.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("index error: {0}")]
    Index(String),

    #[error("overflow: {0}")]
    Overflow(String),

    #[error("accuracy not reached: {0}")]
    Accuracy(String),

    #[error("quadrature did not converge after {subdivisions} subdivisions (value {value:e}, error estimate {error:e}, target {target:e})")]
    Convergence {
        subdivisions: usize,
        value: f64,
        error: f64,
        target: f64,
    },

    #[error("integral diverges: {0}")]
    Divergent(String),

    #[error("unsupported potential: {0}")]
    UnsupportedPotential(String),

    #[error("order mismatch: {0}")]
    OrderMismatch(String),

    #[error("odd order {0} has no even-parity contribution")]
    OddOrder(usize),

    #[error("non-real reduction: {0}")]
    NonReal(String),

    #[error("model mismatch: {0}")]
    ModelMismatch(String),

    #[error("basis too large: dimension {dimension} exceeds cap {cap}")]
    DimensionOverflow { dimension: usize, cap: usize },

    #[error("eigenvalue {index} not converged (change {change:e} > tolerance {tol:e})")]
    NotConverged { index: usize, change: f64, tol: f64 },

    #[error("regime error: {0}")]
    Regime(String),

    #[error("unexpected structure: {0}")]
    Structure(String),

    #[error("format error: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
