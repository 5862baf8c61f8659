use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("permutation is empty")]
    Empty,
    #[error("value {0} appears more than once")]
    Duplicate(i64),
    #[error("value {value} is outside 1..={n}")]
    OutOfRange { value: i64, n: usize },
    #[error("cannot parse permutation {0:?}")]
    Parse(String),
    #[error("permutation has index 1; values 1 and 2 are not adjacent")]
    IndexTooLow,
    #[error("length {n} is too short, need at least {min}")]
    TooShort { n: usize, min: usize },
    #[error("{perm} did not become periodic within {bound} applications")]
    InternalBoundExceeded { perm: String, bound: u64 },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("prefix depth {depth} is out of range for n = {n}")]
    DepthOutOfRange { depth: usize, n: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("curve fitting requires positive coordinates, got ({0}, {1})")]
    NonPositiveData(f64, f64),
    #[error("curve fitting requires at least 3 points, got {0}")]
    TooFewPoints(usize),
    #[error("unknown suite {0:?}")]
    UnknownSuite(String),
    #[error("suite {suite} accepts max_n in {min}..={cap} (use --force to raise the cap), got {max_n}")]
    SuiteRange {
        suite: String,
        max_n: usize,
        min: usize,
        cap: usize,
    },
    #[error("n = {0} is too large for brute-force preimage search")]
    TooLargeForBruteForce(usize),
    #[error("malformed checkpoint: {0}")]
    Checkpoint(String),
    #[error("malformed input: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
