use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("index {index} lies outside the truncation box {bounds}")]
    Domain { index: String, bounds: String },

    #[error("level {level} is not in 1..={levels}")]
    Level { level: usize, levels: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("input vectors are linearly dependent")]
    Dependent,

    #[error("invalid input: {0}")]
    Input(String),

    #[error("operator {label:?} is zero")]
    ZeroOperator { label: String },

    #[error("no seminorm level is a norm on the range of {label:?}")]
    NoNormLevel { label: String },

    #[error("construction soundness violated: {0}")]
    Soundness(String),

    #[error("certificate failure at level {level}, prefix {prefix}: {detail}")]
    Certificate {
        level: usize,
        prefix: usize,
        detail: String,
    },

    #[error("construction error: {0}")]
    Construction(String),

    #[error("box too small: {0}")]
    BoxTooSmall(String),

    #[error("family of length {len} is too short to assess trends (need at least 3)")]
    InsufficientData { len: usize },

    #[error("unbounded: {0}")]
    Unbounded(String),

    #[error("schema error: {0}")]
    Schema(String),
}

impl Error {
    pub(crate) fn schema(msg: impl Into<String>) -> Self {
        Error::Schema(msg.into())
    }
}
