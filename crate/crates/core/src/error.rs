use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter is outside the range where the object is defined.
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    /// An integer index is outside the range where the object is defined.
    #[error("index `{name}` = {value} out of range: {reason}")]
    IndexOutOfRange {
        name: &'static str,
        value: i64,
        reason: &'static str,
    },

    /// A truncated product or series hit its term cap before reaching tolerance.
    #[error("{what} did not converge within {limit} terms ({detail})")]
    NonConvergence {
        what: &'static str,
        limit: usize,
        detail: String,
    },

    /// The argument would overflow the power-series evaluation.
    #[error("argument `{name}` = {value} exceeds the supported range (|{name}| <= {limit})")]
    OutOfRange {
        name: &'static str,
        value: f64,
        limit: f64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(name: &'static str, value: f64, reason: &'static str) -> Self {
        Error::InvalidParameter { name, value, reason }
    }

    /// Name of the offending parameter, if any.
    pub fn parameter(&self) -> Option<&'static str> {
        match self {
            Error::InvalidParameter { name, .. }
            | Error::IndexOutOfRange { name, .. }
            | Error::OutOfRange { name, .. } => Some(name),
            Error::NonConvergence { .. } => None,
        }
    }
}
