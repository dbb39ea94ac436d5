//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },
    #[error("feature {feature_id}: dimension {got} does not match established dimension {expected}")]
    FeatureDimension {
        feature_id: u32,
        expected: usize,
        got: usize,
    },
    #[error("config error: {0}")]
    Config(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),
    #[error("node index {index} out of range for {n} nodes")]
    NodeOutOfRange { index: usize, n: usize },
    #[error("node {0} has an empty neighborhood")]
    EmptyNeighborhood(usize),
    #[error("new detections at frame {got} do not follow current frame {current}")]
    FrameRegression { current: i64, got: i64 },
    #[error("size mismatch: {0}")]
    SizeMismatch(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
