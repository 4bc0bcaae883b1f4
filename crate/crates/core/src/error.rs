use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported dimension n = {0}; expected 1, 2 or 3")]
    UnsupportedDimension(usize),
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("degenerate interval [{0}, {1}]")]
    DegenerateInterval(f64, f64),
    #[error("invalid quadrature resolution: {0}")]
    InvalidResolution(String),
    #[error("argument out of range: {0}")]
    OutOfRange(String),
    #[error("{0} did not converge within the iteration budget")]
    Convergence(String),
    #[error("harmonic index out of range: n = {n}, k = {k}, j = {j}")]
    HarmonicIndex { n: usize, k: usize, j: usize },
    #[error("derivative order {got} exceeds the supported maximum {max}")]
    DerivativeOrder { got: usize, max: usize },
    #[error("evaluation at a singular point")]
    SingularPoint,
    #[error("unsupported evaluation point: {0}")]
    UnsupportedPoint(String),
    #[error("matrix is not positive semidefinite: pivot {pivot:e} at step {step}")]
    NotPositiveSemidefinite { pivot: f64, step: usize },
    #[error("rank-deficient system: {0}")]
    RankDeficient(String),
    #[error("whitened span is empty (rank 0)")]
    RankZero,
    #[error("eigenvalue mu_{index} = {mu:e} is below the truncation floor; lower the truncation level")]
    TruncationRequired { index: usize, mu: f64 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
