use thiserror::Error;

/// Errors raised by the allocation library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("length mismatch for `{name}`: expected {expected}, got {got}")]
    LengthMismatch {
        name: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("no-waste constraint violated: allocation {allocated} exceeds population {population}")]
    NoWaste { allocated: f64, population: f64 },

    #[error("degenerate population split: {0}")]
    DegenerateSplit(&'static str),

    #[error("{what} of size {size} exceeds the limit of {limit}")]
    ScaleLimit {
        what: &'static str,
        size: usize,
        limit: usize,
    },

    #[error("linear program is {0}")]
    LpFailure(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

pub(crate) fn check_len(name: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::LengthMismatch {
            name,
            expected,
            got,
        })
    }
}
