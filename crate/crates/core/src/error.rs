use std::path::PathBuf;

/// Error type shared across the crate.
///
/// Variants are grouped by how the CLI reports them: configuration problems
/// (bad config/spec files, out-of-range parameters), data problems (unreadable
/// or malformed series/mask/ground-truth files), and everything else.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("empty motif set")]
    EmptyMotifSet,

    #[error("invalid overlap parameter: nu must lie in [0, 1], got {0}")]
    InvalidOverlapParameter(f64),

    #[error("skewness undefined for constant subsequence")]
    DegenerateSkewness,

    #[error("skewness requires a univariate series, got {0} dimensions")]
    MultivariateSkewness(usize),

    #[error("invalid segment: start {start} > end {end}")]
    InvalidSegment { start: usize, end: usize },

    #[error("segment [{start}:{end}] out of bounds for series of length {n}")]
    SegmentOutOfBounds { start: usize, end: usize, n: usize },

    #[error("invalid time series: {0}")]
    InvalidSeries(String),

    #[error("invalid similarity bandwidth: gamma must be positive, got {0}")]
    InvalidGamma(f64),

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("not a motif set: fewer than 2 motifs")]
    NotAMotifSet,

    #[error("invalid mask: {0}")]
    InvalidMask(String),

    #[error("config error at {path}: {msg}")]
    Config { path: String, msg: String },

    #[error("data error in {path}: {msg}")]
    Data { path: PathBuf, msg: String },

    #[error("series length {n} exceeds the cap of {cap} samples (override with MOTIF_FORGE_MAX_N)")]
    SeriesTooLong { n: usize, cap: usize },

    #[error("no ground truth")]
    EmptyGroundTruth,

    #[error("infeasible synthesis spec: {0}")]
    InfeasibleSynth(String),

    #[error("{0}")]
    Internal(String),
}

impl Error {
    pub fn config(path: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Config { path: path.into(), msg: msg.into() }
    }

    pub fn data(path: impl Into<PathBuf>, msg: impl Into<String>) -> Self {
        Error::Data { path: path.into(), msg: msg.into() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
