use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A configuration value violates a model invariant.
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("population needs at least 3 users, got {0}")]
    TooFewUsers(usize),

    #[error("provenance has no feasible input: {0}")]
    NoFeasibleInput(String),

    #[error("distribution is not normalized (sum = {0})")]
    Unnormalized(f64),

    #[error("both suspects have zero posterior mass")]
    NoSuspectMass,

    #[error("window [{start}, {end}) exceeds trace of {len} events")]
    WindowOutOfRange { start: usize, end: usize, len: usize },

    #[error("sequence length {0} is not one of 256, 512, 1024, 2048, 4096")]
    BadLength(usize),

    #[error("mask target {target} exceeds sequence length {len}")]
    MaskTooLong { target: usize, len: usize },

    #[error("length mismatch: {0} predictions vs {1} labels")]
    LengthMismatch(usize, usize),

    #[error("insufficient data: {0}")]
    Insufficient(String),

    #[error("route violates anytrust: no honest node on {0:?}")]
    Anytrust(Vec<(usize, usize)>),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
