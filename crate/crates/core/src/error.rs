use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed file {}: line {line}: {reason}", path.display())]
    MalformedFile {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    #[error("corpus contains no A/C/G/T bases")]
    EmptyCorpus,

    #[error("sequence of length {len} is shorter than k = {k}")]
    SequenceTooShort { len: usize, k: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid base {base:?} at position {position}")]
    InvalidBase { base: char, position: usize },

    #[error("oracle corpus holds {len} nt, limit is {limit}")]
    CorpusTooLarge { len: usize, limit: usize },

    #[error("invalid merge table: {0}")]
    InvalidMergeTable(String),

    #[error("invalid vocabulary: {0}")]
    InvalidVocabulary(String),

    #[error("token {0:?} is not in the vocabulary")]
    UnknownToken(String),

    #[error("{region} region contains [UNK] at index {index}; bases cannot be recovered")]
    LossyEncoding { region: &'static str, index: usize },

    #[error("k-mer region has {region} tokens, span needs {span}")]
    RegionTooSmall { region: usize, span: usize },

    #[error("encoding needs {needed} tokens, budget is {budget}")]
    TokenBudgetExceeded { needed: usize, budget: usize },

    #[error("window of {len} nt is shorter than the required {needed} nt")]
    WindowTooShort { len: usize, needed: usize },

    #[error("token stream is empty")]
    EmptyStream,

    #[error("{source_id}:{offset}: {source}")]
    AtSegment {
        source_id: String,
        offset: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn at_segment(self, source_id: &str, offset: usize) -> Self {
        Error::AtSegment {
            source_id: source_id.to_owned(),
            offset,
            source: Box::new(self),
        }
    }

    /// Stable machine-readable name of the error variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Io { source, .. } if source.kind() == std::io::ErrorKind::NotFound => "NotFound",
            Error::Io { .. } => "Io",
            Error::MalformedFile { .. } => "MalformedFile",
            Error::EmptyCorpus => "EmptyCorpus",
            Error::SequenceTooShort { .. } => "SequenceTooShort",
            Error::InvalidParameter { .. } => "InvalidParameter",
            Error::InvalidBase { .. } => "InvalidBase",
            Error::CorpusTooLarge { .. } => "CorpusTooLarge",
            Error::InvalidMergeTable(_) => "InvalidMergeTable",
            Error::InvalidVocabulary(_) => "InvalidVocabulary",
            Error::UnknownToken(_) => "UnknownToken",
            Error::LossyEncoding { .. } => "LossyEncoding",
            Error::RegionTooSmall { .. } => "RegionTooSmall",
            Error::TokenBudgetExceeded { .. } => "TokenBudgetExceeded",
            Error::WindowTooShort { .. } => "WindowTooShort",
            Error::EmptyStream => "EmptyStream",
            Error::AtSegment { source, .. } => source.kind(),
            Error::Invariant(_) => "Invariant",
            Error::Json(_) => "Json",
            Error::Csv(_) => "Csv",
        }
    }

    /// Process exit code: 1 usage error, 2 data error, 3 internal invariant violation.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParameter { .. } => 1,
            Error::AtSegment { source, .. } => source.exit_code(),
            Error::Invariant(_) => 3,
            _ => 2,
        }
    }
}
