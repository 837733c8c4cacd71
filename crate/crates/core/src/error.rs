use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch for {what}: expected {expected}, found {found}")]
    Dimension {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("{what} out of range: {value} is not in [{lo}, {hi}]")]
    Range {
        what: &'static str,
        value: usize,
        lo: usize,
        hi: usize,
    },

    #[error("invalid {what}: {reason}")]
    Invalid { what: &'static str, reason: String },

    /// Instance file problems, with a JSON-style path to the offending field.
    #[error("validation error at `{path}`: {reason}")]
    Validation { path: String, reason: String },

    #[error("precondition not met: {0}")]
    Precondition(String),

    #[error("resource budget exceeded: {what} requires {required}, cap is {cap}")]
    Resource {
        what: &'static str,
        required: u128,
        cap: u128,
    },

    #[error("curve fit failed: {reason} (rmse {rmse:e} after {iterations} iterations)")]
    Fit {
        reason: String,
        rmse: f64,
        iterations: usize,
    },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn invalid(what: &'static str, reason: impl Into<String>) -> Self {
        Error::Invalid {
            what,
            reason: reason.into(),
        }
    }

    pub(crate) fn validation(path: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Validation {
            path: path.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn dimension(what: &'static str, expected: usize, found: usize) -> Self {
        Error::Dimension {
            what,
            expected,
            found,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
