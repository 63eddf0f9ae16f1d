use thiserror::Error;

/// Errors produced anywhere in the library.
///
/// The CLI maps these onto process exit codes through [`Error::exit_code`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("orbit inconsistent at index {index}: residual {residual:e}")]
    Consistency { index: usize, residual: f64 },

    #[error("internal inconsistency: {0}")]
    Internal(String),

    #[error("backward strategy stuck at depth {depth}")]
    StrategyStuck {
        depth: usize,
        partial: Box<Vec<num_complex::Complex64>>,
    },

    #[error("resolution error: {0}")]
    Resolution(String),

    #[error("fit error: {0}")]
    Fit(String),

    #[error("ray not admissible: critical orbit point f^{index}(c0) = {point} within {distance:e} of the ray")]
    Obstruction {
        index: usize,
        point: num_complex::Complex64,
        distance: f64,
    },

    #[error("derivation error: {0}")]
    Derivation(String),

    #[error("format error at byte {offset}: {reason}")]
    Format { offset: u64, reason: String },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// Process exit code: 2 config, 3 numeric failure, 4 format.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Json(_) => 2,
            Error::Format { .. } => 4,
            Error::Io(_) => 4,
            _ => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
