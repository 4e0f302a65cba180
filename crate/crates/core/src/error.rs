use thiserror::Error;

/// Errors raised anywhere in the discretization and solver pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate triangle {triangle} (signed area {area:e})")]
    DegenerateTriangle { triangle: usize, area: f64 },

    #[error("mesh grading inverted triangle {triangle} (signed area {area:e})")]
    InvertedTriangle { triangle: usize, area: f64 },

    #[error("unsupported quadrature degree {0} (supported: 1..=5)")]
    UnsupportedQuadrature(usize),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("matrix is not symmetric positive definite (pivot {pivot})")]
    NotPositiveDefinite { pivot: usize },

    #[error("sparse factorization failed: {0}")]
    Factorization(String),

    #[error("conjugate gradient did not converge in {iterations} iterations (last relative residual {last:e})")]
    NotConverged {
        iterations: usize,
        last: f64,
        history: Vec<f64>,
    },

    #[error("manufactured case `{case}` does not provide {what}")]
    MissingCallable { case: String, what: &'static str },

    #[error("boundary data has net flux {flux:e} through the boundary (tolerance {tolerance:e})")]
    IncompatibleBoundaryData { flux: f64, tolerance: f64 },

    #[error("dense problem too large: {size} > {limit}")]
    SizeLimit { size: usize, limit: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
