use thiserror::Error;

/// Errors raised by grids, spectral operators, solvers and the analysis layer.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("non-finite value at sample {index}")]
    NonFinite { index: usize },

    /// `∂_x^{-1}` is undefined: the x-mean of row `row` is `mean`.
    #[error("non-zero x-mean {mean:e} on row {row} (antiderivative undefined)")]
    NonZeroXMean { row: usize, mean: f64 },

    #[error("index {index} out of range (len {len})")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("time step {dt:e} too large: dt * max|symbol| = {product:.4} exceeds {limit}")]
    StepTooLarge { dt: f64, product: f64, limit: f64 },

    #[error("solution blew up at t = {t} (max |value| = {max_abs:e})")]
    BlowUp { t: f64, max_abs: f64 },

    #[error("profile not resolved: {0}")]
    UnresolvedProfile(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("snapshot times not aligned: {0}")]
    TimeMisalignment(String),

    #[error("negative input: {0}")]
    NegativeInput(String),

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("validation error at `{path}`: {message}")]
    Validation { path: String, message: String },

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidGrid(_) => "InvalidGrid",
            Error::NonFinite { .. } => "NonFinite",
            Error::NonZeroXMean { .. } => "NonZeroXMean",
            Error::IndexOutOfRange { .. } => "IndexOutOfRange",
            Error::InvalidParameter(_) => "InvalidParameter",
            Error::InvalidConfig(_) => "InvalidConfig",
            Error::StepTooLarge { .. } => "StepTooLarge",
            Error::BlowUp { .. } => "BlowUp",
            Error::UnresolvedProfile(_) => "UnresolvedProfile",
            Error::GridMismatch(_) => "GridMismatch",
            Error::TimeMisalignment(_) => "TimeMisalignment",
            Error::NegativeInput(_) => "NegativeInput",
            Error::EmptyInput(_) => "EmptyInput",
            Error::Parse(_) => "ParseError",
            Error::Validation { .. } => "ValidationError",
            Error::Io(_) => "IoError",
        }
    }

    /// True for configuration and input problems, false for failures that
    /// happen while a valid configuration is being computed.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::Parse(_)
                | Error::Validation { .. }
                | Error::InvalidConfig(_)
                | Error::InvalidGrid(_)
                | Error::InvalidParameter(_)
                | Error::StepTooLarge { .. }
                | Error::UnresolvedProfile(_)
                | Error::Io(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(err: csv::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
