use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}:{line}: {field}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        field: String,
        message: String,
    },

    #[error("duplicate tweet id `{0}`")]
    DuplicateId(String),

    #[error("the NA tag carries no calendar information")]
    NaTag,

    #[error("bag needs {tags} distinct tags but the tweet has only {tokens} tokens")]
    InfeasibleBag { tags: usize, tokens: usize },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("prediction for unknown tweet id `{0}`")]
    UnknownId(String),

    #[error("model file: {0}")]
    ModelFormat(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("exhaustive enumeration refused: {0}")]
    TooLarge(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
