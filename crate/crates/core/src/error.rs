use std::path::PathBuf;

use thiserror::Error;

/// Broad failure class, used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Malformed, missing, or inconsistent input data.
    Data,
    /// Numerically degenerate input (zero vectors, rank deficiency, zero variance).
    Numeric,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error("empty corpus")]
    EmptyCorpus,

    #[error("disjoint vocabularies")]
    DisjointVocabularies,

    #[error("duplicate term {0:?}")]
    DuplicateTerm(String),

    #[error("unknown term {0:?}")]
    UnknownTerm(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("zero vector for {0}")]
    ZeroVector(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("anchor too small: {found} terms, need at least {required}")]
    AnchorTooSmall { found: usize, required: usize },

    #[error("rank-deficient anchor")]
    RankDeficientAnchor,

    #[error("aligning space {source_index} onto space {target_index}: {inner}")]
    AlignmentPair {
        source_index: usize,
        target_index: usize,
        inner: Box<Error>,
    },

    #[error("term {term:?} absent from all spaces")]
    AbsentEverywhere { term: String },

    #[error("all {0} out of vocabulary")]
    AllOutOfVocabulary(&'static str),

    #[error("degenerate centroid")]
    DegenerateCentroid,

    #[error("empty document {0:?}")]
    EmptyDocument(String),

    #[error("combined support {support} exceeds exact solver cap {cap}; use lc-rwmd for large documents")]
    SupportOverCap { support: usize, cap: usize },

    #[error("unbalanced masses: {0} vs {1}")]
    UnbalancedMass(f64, f64),

    #[error("zero variance")]
    ZeroVariance,

    #[error("missing date for document {0:?}")]
    MissingDate(String),

    #[error("term {0:?} never co-occurs with any other term")]
    IsolatedTerm(String),

    #[error("transport solver did not converge after {0} pivots")]
    NoConvergence(usize),
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::ZeroVector(_)
            | Error::RankDeficientAnchor
            | Error::DegenerateCentroid
            | Error::ZeroVariance
            | Error::IsolatedTerm(_)
            | Error::NoConvergence(_) => ErrorClass::Numeric,
            Error::AlignmentPair { inner, .. } => inner.class(),
            _ => ErrorClass::Data,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            location: location.into(),
            message: message.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
