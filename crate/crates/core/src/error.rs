use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{op}: argument outside its domain ({detail})")]
    Domain { op: &'static str, detail: String },

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("target index {target} out of range for vocabulary of size {vocab}")]
    TargetOutOfRange { target: usize, vocab: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("infeasible (p={p}, entropy={entropy}): attainable entropy interval is [{min}, {max}]")]
    Infeasible {
        p: f64,
        entropy: f64,
        min: f64,
        max: f64,
    },

    #[error("task construction failed: {0}")]
    Build(String),

    #[error("training diverged at step {step}: {detail}")]
    Training { step: usize, detail: String },

    #[error("invalid configuration field `{field}`: {detail}")]
    Config { field: &'static str, detail: String },

    #[error("malformed histogram edges: {0}")]
    BinEdges(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            op,
            detail: detail.into(),
        }
    }
}
