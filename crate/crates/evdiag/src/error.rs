use thiserror::Error;

/// Errors produced by the diagnostics toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid input data (non-finite values, shape mismatches, broken invariants).
    #[error("validation error: {0}")]
    Validation(String),

    /// A numeric argument is outside its admissible range.
    #[error("range error: {0}")]
    Range(String),

    /// A nondimensionalizing scale is undefined (e.g. no forcing, zero energy).
    #[error("undefined scale: {0}")]
    UndefinedScale(String),

    /// A closure parameterization produced inadmissible fields (negative l or k').
    #[error("closure input error: {0}")]
    ClosureInput(String),

    /// A snapshot file does not conform to the EVDG format.
    #[error("format error at byte {offset}: {msg}")]
    Format { offset: u64, msg: String },

    /// The time stepper hit a fatal condition.
    #[error("solver error at step {step}: {msg}")]
    Solver { step: u64, msg: String },

    /// Manifest or config file could not be parsed.
    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub fn range(msg: impl Into<String>) -> Self {
        Error::Range(msg.into())
    }
}
