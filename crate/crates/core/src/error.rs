use thiserror::Error;

/// Errors raised anywhere in the testing pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid wavelet scale {0}: scales must be negative integers")]
    InvalidScale(i32),

    #[error("series too short: length {len}, need at least {required}")]
    SeriesTooShort { len: usize, required: usize },

    #[error("infeasible configuration: {0}")]
    InfeasibleConfig(String),

    #[error("interval sampling failed: rejection cap of {0} draws exceeded")]
    SamplingFailure(usize),

    #[error("no disjoint interval pairs among the sampled intervals")]
    NoDisjointPairs,

    #[error("intervals [{0}, {1}] and [{2}, {3}] overlap")]
    InvalidPair(usize, usize, usize, usize),

    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("autoregressive order {order} too large for series of length {len}")]
    OrderTooLarge { order: usize, len: usize },

    #[error("series has zero variance")]
    DegenerateSeries,

    #[error("degenerate bootstrap: every scale estimate fell below the floor")]
    DegenerateBootstrap,

    #[error("significance level {0} outside (0, 1)")]
    InvalidLevel(f64),

    #[error("negative spectrum value {value} at scale {scale}, location {location}")]
    InvalidSpectrum {
        scale: i32,
        location: usize,
        value: f64,
    },

    #[error("unknown model '{0}'; valid models are {valid}", valid = crate::simgen::ModelTag::valid_tags())]
    UnknownModel(String),

    #[error("unknown innovation distribution '{0}'; valid tags are normal, gamma91_centred, t5")]
    UnknownInnovation(String),

    #[error("no results to aggregate")]
    EmptyResults,

    #[error("invalid experiment plan: {0}")]
    InvalidPlan(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
