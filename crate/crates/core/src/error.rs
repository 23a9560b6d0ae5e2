use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid path: {0}")]
    InvalidPath(String),
    #[error("timestamp {0} is not a grid point of the path")]
    GridMismatch(f64),
    #[error("invalid range [{start}, {end}]")]
    InvalidRange { start: f64, end: f64 },
    #[error("channel {channel} out of range for a {channels}-channel path")]
    BadChannel { channel: usize, channels: usize },
    #[error("non-positive value {0} cannot be log-normalized")]
    NonPositiveValue(f64),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("path is not time-augmented (channel 0 differs from timestamps)")]
    NotAugmented,
    #[error("matrix is not positive definite (pivot {pivot} at row {row})")]
    NotPositiveDefinite { row: usize, pivot: f64 },
    #[error("bad configuration: {0}")]
    BadConfig(String),
    #[error("arm {arm} out of range for {arms} arms")]
    BadArm { arm: usize, arms: usize },
    #[error("geometric Brownian motion became non-positive ({value}) at step {step}")]
    NonPositiveGbm { step: usize, value: f64 },
    #[error("round {round} outside [{first}, {last}]")]
    BadRound {
        round: usize,
        first: usize,
        last: usize,
    },
    #[error("newsvendor reward requires the next-window demand")]
    MissingDemand,
    #[error("replay format error: {0}")]
    ReplayFormat(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Error::ShapeMismatch(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::BadConfig(msg.into())
    }
}
