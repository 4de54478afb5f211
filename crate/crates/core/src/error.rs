use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, PupError>;

#[derive(Debug, Error)]
pub enum PupError {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    MalformedRow {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("item {0:?} is referenced by an interaction but missing from the catalog")]
    UnknownItem(String),

    #[error("item {0:?} appears more than once in the catalog")]
    DuplicateCatalogItem(String),

    #[error("price {price} outside category range [{min}, {max}]")]
    PriceOutOfRange { price: f64, min: f64, max: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("user {0} has no training interactions")]
    NoInteractions(usize),

    #[error("user {0} has interacted with every item; no negative available")]
    NoNegative(usize),

    #[error("shape mismatch: expected {expected}, got {actual}")]
    ShapeMismatch { expected: String, actual: String },

    #[error("training diverged at epoch {epoch}: non-finite {what}")]
    Diverged { epoch: usize, what: &'static str },

    #[error("bad checkpoint: {0}")]
    Checkpoint(String),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl PupError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        PupError::Io {
            path: path.into(),
            source,
        }
    }
}
