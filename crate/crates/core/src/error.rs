use thiserror::Error;

/// Errors raised by stein-lab operations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("operator is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("operator is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("spectrum leaves [0, 1] (eigenvalue {eigenvalue:e})")]
    NotATest { eigenvalue: f64 },

    #[error("trace is {trace}, expected 1")]
    BadTrace { trace: f64 },

    #[error("probabilities sum to {total}, expected 1")]
    NotNormalized { total: f64 },

    #[error("dimension {requested} exceeds budget {limit}")]
    BudgetExceeded { requested: usize, limit: usize },

    #[error("n = {n} exceeds the symmetric-group budget n <= {limit}")]
    FactorialBudget { n: usize, limit: usize },

    #[error("invalid measurement: {0}")]
    InvalidMeasurement(String),

    #[error("measurement is not projective (deviation {deviation:e})")]
    NotProjective { deviation: f64 },

    #[error("measurements do not commute (principal-angle defect {defect:e})")]
    NonCommuting { defect: f64 },

    #[error("state is singular (min eigenvalue {min_eigenvalue:e})")]
    Singular { min_eigenvalue: f64 },

    #[error("support of the first distribution is not contained in the second")]
    SupportViolation,

    #[error("label sets differ")]
    LabelMismatch,

    #[error("partitions of different sizes: {0} vs {1}")]
    PartitionMismatch(usize, usize),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error in {context}: {message}")]
    Parse { context: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
