//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by the engine.
#[derive(Debug, Error)]
pub enum Error {
    /// A hyperparameter or spec field failed validation.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParam {
        name: &'static str,
        reason: String,
    },

    /// An input vector does not match the model's literal width.
    #[error("dimension mismatch: expected {expected} literals, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// Clause or literal index out of range.
    #[error("index {index} out of bounds for length {len}")]
    IndexOutOfBounds { index: usize, len: usize },

    /// No document matches the requested target/label combination.
    #[error("no documents in the q={q} pool for target feature {target}")]
    EmptyDocumentPool { target: u32, q: bool },

    /// An embedding run aborted mid-way.
    #[error("embedding aborted at round {round}: {source}")]
    EmbedRound {
        round: usize,
        #[source]
        source: Box<Error>,
    },

    /// The corpus contains no usable tokens or documents.
    #[error("empty corpus")]
    EmptyCorpus,

    /// A token is not present in the vocabulary.
    #[error("unknown token `{0}`")]
    UnknownToken(String),

    /// A text input line could not be parsed.
    #[error("malformed line {line}: {reason}")]
    MalformedLine { line: usize, reason: String },

    /// A persisted file failed structural validation.
    #[error("bad file: {0}")]
    BadFile(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    /// An internal invariant was violated; indicates a bug.
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParam {
            name,
            reason: reason.into(),
        }
    }
}
