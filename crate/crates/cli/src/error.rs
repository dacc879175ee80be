//! Error-to-exit-code mapping.
//!
//! 0 success, 1 usage or configuration, 2 data, 3 internal invariant.

use std::fmt;

#[derive(Debug)]
pub struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }

    pub fn data(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self {
            code: 3,
            message: message.into(),
        }
    }

    pub fn code(&self) -> u8 {
        self.code
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

fn code_of(e: &tm_rbe::Error) -> u8 {
    use tm_rbe::Error::*;
    match e {
        InvalidParam { .. } => 1,
        EmbedRound { source, .. } => code_of(source),
        EmptyDocumentPool { .. } | EmptyCorpus | UnknownToken(_) | MalformedLine { .. }
        | BadFile(_) | Io(_) | Json(_) => 2,
        DimensionMismatch { .. } | IndexOutOfBounds { .. } | Internal(_) => 3,
    }
}

impl From<tm_rbe::Error> for CliError {
    fn from(e: tm_rbe::Error) -> Self {
        Self {
            code: code_of(&e),
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::data(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
