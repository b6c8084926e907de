use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("parameter mismatch between operands")]
    ParamMismatch,

    #[error("algebra or ring mismatch between operands")]
    AlgebraMismatch,

    #[error("axis {axis} out of range for n = {n}")]
    AxisOutOfRange { axis: usize, n: usize },

    #[error("element is not in the span of the basis")]
    NotInSpan,

    #[error("closure failure: {0}")]
    ClosureFailure(String),

    #[error("filtration index {index} out of range [-1, {max}]")]
    FiltrationOutOfRange { index: i32, max: i32 },

    #[error("power {power} out of range [{min}, {max}]")]
    PowerOutOfRange { power: u32, min: u32, max: u32 },

    #[error("zero input where a nonzero polynomial is required")]
    ZeroInput,

    #[error("polynomial is not lambda-homogeneous: {0}")]
    NotHomogeneous(String),

    #[error("operation requires a {expected} algebra, got {found}")]
    WrongKind { expected: String, found: String },

    #[error("malformed document: {0}")]
    Malformed(String),

    #[error("unknown basis label `{0}`")]
    UnknownLabel(String),

    #[error("unsupported format version {found} (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },

    #[error("verification failed: {0}")]
    VerificationFailed(String),

    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Malformed(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
