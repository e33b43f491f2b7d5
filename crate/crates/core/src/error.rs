use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("input has no tokens")]
    EmptyInput,

    #[error("sequence already ends with the EOS token")]
    EosAlreadyPresent,

    #[error("EOS literal misplaced in `{0}`")]
    EosLiteralMisplaced(String),

    #[error("token contains whitespace: {0:?}")]
    InvalidToken(String),

    #[error("{path}:{line}: {message}")]
    ParseError {
        path: String,
        line: usize,
        message: String,
    },

    #[error("duplicate image_id `{0}`")]
    DuplicateImageId(String),

    #[error("corpus is empty")]
    EmptyCorpus,

    #[error("image `{0}` has no references")]
    EmptyRefs(String),

    #[error("EOS conflict: {0}")]
    EosConflict(String),

    #[error("corpus initialization selected but no corpus was supplied")]
    MissingCorpus,

    #[error("batch initialization selected but a corpus was supplied")]
    UnexpectedCorpus,

    #[error("image `{image_id}`: expected {expected} samples, got {found}")]
    SampleCountMismatch {
        image_id: String,
        expected: usize,
        found: usize,
    },

    #[error("image `{0}`: greedy base requires a base sequence")]
    MissingBase(String),

    #[error("image `{0}`: base sequence supplied but the base mode is not greedy")]
    UnexpectedBase(String),

    #[error("off-diagonal EOS configuration requires allow_mixed")]
    NonStandardMixed,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("malformed signature at byte {position} (`{segment}`): {reason}")]
    MalformedSignature {
        segment: String,
        position: usize,
        reason: String,
    },

    #[error("aborted by user")]
    Aborted,

    #[error("malformed answers: {0}")]
    MalformedAnswers(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Stable variant name, used by front ends that surface errors by name.
    pub fn name(&self) -> &'static str {
        match self {
            Error::EmptyInput => "EmptyInput",
            Error::EosAlreadyPresent => "EosAlreadyPresent",
            Error::EosLiteralMisplaced(_) => "EosLiteralMisplaced",
            Error::InvalidToken(_) => "InvalidToken",
            Error::ParseError { .. } => "ParseError",
            Error::DuplicateImageId(_) => "DuplicateImageId",
            Error::EmptyCorpus => "EmptyCorpus",
            Error::EmptyRefs(_) => "EmptyRefs",
            Error::EosConflict(_) => "EosConflict",
            Error::MissingCorpus => "MissingCorpus",
            Error::UnexpectedCorpus => "UnexpectedCorpus",
            Error::SampleCountMismatch { .. } => "SampleCountMismatch",
            Error::MissingBase(_) => "MissingBase",
            Error::UnexpectedBase(_) => "UnexpectedBase",
            Error::NonStandardMixed => "NonStandardMixed",
            Error::InvalidConfig(_) => "InvalidConfig",
            Error::MalformedSignature { .. } => "MalformedSignature",
            Error::Aborted => "Aborted",
            Error::MalformedAnswers(_) => "MalformedAnswers",
            Error::Io { .. } => "Io",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
