use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("missing input file {0}")]
    MissingFile(PathBuf),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed JSON in {path} at byte {offset}: {message}")]
    Json {
        path: PathBuf,
        offset: usize,
        message: String,
    },

    #[error("route {route}: {reason}")]
    Validation { route: String, reason: String },

    #[error("stop sets differ: {0}")]
    StopSetMismatch(String),

    #[error("invalid sequence: {0}")]
    InvalidSequence(String),

    #[error("invalid cost matrix: {0}")]
    InvalidCosts(String),

    #[error("brute force supports at most {max} nodes, got {got}")]
    TooLarge { got: usize, max: usize },

    #[error("theta component {index} = {value} outside [{lo}, {hi}]")]
    ThetaOutOfBounds {
        index: usize,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("no stop carries a zone label; enable the single-zone fallback to route such instances")]
    NoZonedStops,

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("Gram matrix is not positive definite even with jitter {jitter:e}")]
    NotPositiveDefinite { jitter: f64 },

    #[error("design matrix is rank deficient; collinear columns: {0:?}")]
    RankDeficient(Vec<String>),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    pub(crate) fn validation(route: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Validation {
            route: route.into(),
            reason: reason.into(),
        }
    }
}
