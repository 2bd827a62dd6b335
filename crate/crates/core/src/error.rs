use thiserror::Error;

/// Errors raised by the harness. Variants map onto the CLI exit-code contract:
/// configuration problems are exit code 2, numerical failures exit code 3.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("grid mismatch: operands live on different grids")]
    GridMismatch,
    #[error("length mismatch: expected {expected} samples, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("parameter out of range: {0}")]
    Parameter(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("unresolvable shell: {0}")]
    Unresolvable(String),
    #[error("Chebyshev degree cap {cap} reached with error {achieved:.3e} > tolerance {tol:.3e}")]
    FilterCap { cap: usize, achieved: f64, tol: f64 },
    #[error("state rejected: {0}")]
    Rejected(String),
    #[error("dense oracle limited to N <= {max}, got {got}")]
    OracleTooLarge { max: usize, got: usize },
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

impl Error {
    /// True for errors that stem from user-provided parameters rather than numerics.
    pub fn is_configuration(&self) -> bool {
        matches!(
            self,
            Error::Config(_)
                | Error::Parameter(_)
                | Error::InvalidGrid(_)
                | Error::Precondition(_)
                | Error::Unresolvable(_)
                | Error::OracleTooLarge { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
