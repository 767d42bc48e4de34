use thiserror::Error;

/// Errors produced by the simulation and detection toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("non-finite input value {0}")]
    NonFinite(f64),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("quadrature failed to converge ({context}): error estimate {error_estimate:e}")]
    Quadrature { context: String, error_estimate: f64 },

    #[error("kernel is not a conditional density: integral over v at u={u} is {integral}")]
    KernelNormalization { u: f64, integral: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Process exit code for the CLI: 1 for usage/config problems, 2 for numeric failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Quadrature { .. } | Error::KernelNormalization { .. } | Error::NonFinite(_) => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
