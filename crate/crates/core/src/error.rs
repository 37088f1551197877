use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid signal spec: {0}")]
    InvalidSpec(String),

    #[error("signal is empty")]
    EmptySignal,

    #[error("spectrum scale mismatch: expected {expected}, found {found}")]
    ScaleMismatch {
        expected: &'static str,
        found: &'static str,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid measurement set: {0}")]
    InvalidMeasurements(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("sensing operator positions do not match the measurement set")]
    OperatorMismatch,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// The restricted least-squares system lost column rank. `support` is the
    /// set of columns involved when it happened.
    #[error("singular least-squares system on support {support:?}")]
    Singular { support: Vec<usize> },

    #[error("underdetermined system: {unknowns} unknowns from {equations} equations")]
    Underdetermined { unknowns: usize, equations: usize },

    #[error("no component exceeded the detection threshold {threshold}")]
    EmptySupport { threshold: f64 },

    #[error("iteration diverged at step {iteration}: residual {residual:e} vs minimum {min_residual:e}")]
    Diverged {
        iteration: usize,
        residual: f64,
        min_residual: f64,
    },
}

impl Error {
    /// Short machine-readable tag, used in CSV rows and CLI error lines.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidSpec(_) => "invalid_spec",
            Error::EmptySignal => "empty_signal",
            Error::ScaleMismatch { .. } => "scale_mismatch",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::InvalidMeasurements(_) => "invalid_measurements",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::OperatorMismatch => "operator_mismatch",
            Error::InvalidConfig(_) => "invalid_config",
            Error::Singular { .. } => "singular",
            Error::Underdetermined { .. } => "underdetermined",
            Error::EmptySupport { .. } => "empty_support",
            Error::Diverged { .. } => "diverged",
        }
    }
}
