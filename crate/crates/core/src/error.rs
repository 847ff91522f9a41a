use thiserror::Error;

/// Every failure the library can report.
///
/// Variants fall into two families that callers usually want to tell
/// apart: bad inputs or parameters ([`Error::is_parameter_error`]) and
/// data that failed to decode or validate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("unsupported parameters: {0}")]
    Unsupported(String),

    #[error("search budget of {budget} exceeded")]
    BudgetExceeded { budget: u64 },

    #[error("malformed codeword: {0}")]
    Decode(String),

    #[error("ambiguous reconstruction: {0}")]
    Ambiguous(String),

    #[error("incomplete reconstruction: {0}")]
    Incomplete(String),

    #[error("index extraction failed: {0}")]
    IndexExtraction(String),

    #[error("postcondition violated: {0}")]
    Postcondition(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub fn decode(msg: impl Into<String>) -> Self {
        Error::Decode(msg.into())
    }

    /// True for errors caused by the caller's parameters rather than by
    /// the data being processed.
    pub fn is_parameter_error(&self) -> bool {
        matches!(self, Error::Parameter(_) | Error::Unsupported(_) | Error::Parse(_) | Error::BudgetExceeded { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
