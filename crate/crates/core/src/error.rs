use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid block `{id}`: {reason}")]
    InvalidBlock { id: String, reason: String },

    #[error("invalid tower state: {0}")]
    InvalidState(String),

    #[error("invalid noise model: {0}")]
    InvalidNoise(String),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unknown block id `{0}`")]
    UnknownBlock(String),

    #[error("cannot place on an empty tower without a support surface")]
    NoSupport,

    #[error("stack_com requires at least one block")]
    EmptyStack,

    #[error("dimension mismatch: expected {expected} blocks, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error(
        "abduction failed: {accepted} of {attempts} attempts reproduced the observed outcome \
         ({requested} requested)"
    )]
    AbductionFailed {
        requested: usize,
        attempts: usize,
        accepted: usize,
    },

    #[error("no counterfactual candidates to score")]
    NoCandidates,

    #[error("worker pool: {0}")]
    Pool(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
