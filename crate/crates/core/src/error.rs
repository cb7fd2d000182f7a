use std::path::PathBuf;

use num::BigRational;

/// Errors produced anywhere in the lab.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("vertex {vertex} exceeds the degree bound {bound}")]
    DegreeBoundViolated { vertex: usize, bound: usize },

    #[error("vertex index {vertex} out of range 1..={n}")]
    BadVertexIndex { vertex: usize, n: usize },

    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),

    #[error("in-neighbor queries are not allowed in the unidirectional model")]
    ModelViolation,

    #[error("oracle does not support {0}")]
    Unsupported(&'static str),

    #[error("pattern has {size} vertices, limit is {limit}")]
    PatternTooLarge { size: usize, limit: usize },

    #[error("pattern is not weakly connected")]
    NotWeaklyConnected,

    #[error("pattern has {0} source component(s), at least 2 are required")]
    TooFewSources(usize),

    #[error("sequence is empty")]
    EmptySequence,

    #[error("sequence values must be positive (position {position})")]
    ZeroValue { position: usize },

    #[error("value {value} occurs more than {cap} times")]
    OccurrenceCapExceeded { value: usize, cap: usize },

    #[error("value {value} at position {position} exceeds the sequence length {n}")]
    ValueOutOfRange { value: usize, position: usize, n: usize },

    #[error("sequence cap {cap} does not match the pattern's {k} source components")]
    CapMismatch { cap: usize, k: usize },

    #[error("no sequence of length {n} realizes the distribution exactly (nearest realizable: {})", fmt_suggestions(.lower, .upper))]
    Unrealizable {
        n: usize,
        lower: Option<usize>,
        upper: usize,
    },

    #[error("moment {j} of the reference distribution is zero")]
    ZeroMoment { j: u32 },

    #[error("distribution is invalid: {0}")]
    InvalidDistribution(String),

    #[error("epsilon must be non-negative, got {0}")]
    NegativeEpsilon(BigRational),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

fn fmt_suggestions(lower: &Option<usize>, upper: &usize) -> String {
    match lower {
        Some(l) => format!("{l} or {upper}"),
        None => upper.to_string(),
    }
}

impl Error {
    pub(crate) fn parse(path: impl Into<String>, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            msg: msg.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
