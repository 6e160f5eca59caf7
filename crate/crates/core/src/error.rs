use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("matrix is not Hermitian: max |A[i][j] - conj(A[j][i])| = {deviation:e} exceeds {allowed:e}")]
    NotHermitian { deviation: f64, allowed: f64 },

    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal mass {residual:e})")]
    Convergence { sweeps: usize, residual: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("matrix is not positive definite (min eigenvalue {min_eigenvalue:e}): {context}")]
    Positivity { min_eigenvalue: f64, context: String },

    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("unknown identifier `{0}`")]
    UnknownIdentifier(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("non-finite value {value} at x = {x}")]
    NonFinite { x: f64, value: f64 },

    #[error("approximation failed: degree cap {degree_cap} reached with best sup-error {best_delta:e} (target {target:e})")]
    ApproximationFailure {
        degree_cap: usize,
        best_delta: f64,
        target: f64,
    },

    #[error("assumption violated: {0}")]
    Assumption(String),

    #[error("constraint violated: {0}")]
    Constraint(String),

    #[error("configuration error: {0}")]
    Config(String),
}

impl Error {
    /// True for failures of the numerical machinery itself, as opposed to
    /// bad inputs or violated hypotheses.
    pub fn is_numerical_failure(&self) -> bool {
        matches!(self, Error::Convergence { .. })
    }
}
