use std::fmt;

use thiserror::Error;

/// Errors raised by the monitoring library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the function (negative Gamma
    /// observation, `x <= 0` for the polygamma functions, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// An information or score-variance matrix is singular or nearly so.
    #[error("singular information matrix (smallest eigenvalue {min_eigenvalue:e}, largest {max_eigenvalue:e})")]
    SingularInformation {
        min_eigenvalue: f64,
        max_eigenvalue: f64,
    },

    /// The data admit no interior maximum-likelihood estimate.
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    /// The weight function makes the chi-squared correction term blow up.
    #[error("degenerate weight: {0}")]
    DegenerateWeight(String),

    /// A window (of a partition, or a trimmed range) contains no grid point.
    #[error("empty window: {window}")]
    EmptyWindow { window: String },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A local alternative pushes the parameter out of its region.
    #[error("alternative out of range: {0}")]
    AlternativeOutOfRange(String),

    #[error("unknown functional: {0}")]
    UnknownFunctional(String),

    #[error("malformed input: {0}")]
    Parse(String),

    #[error("internal failure: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Coarse classification used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Usage,
    Data,
    Numerical,
    Internal,
}

impl fmt::Display for ErrorClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ErrorClass::Usage => "usage",
            ErrorClass::Data => "data",
            ErrorClass::Numerical => "numerical",
            ErrorClass::Internal => "internal",
        })
    }
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::InvalidArgument(_)
            | Error::UnknownFunctional(_)
            | Error::GridMismatch(_)
            | Error::EmptyWindow { .. }
            | Error::AlternativeOutOfRange(_) => ErrorClass::Usage,
            Error::Domain(_) | Error::Parse(_) | Error::Io(_) => ErrorClass::Data,
            Error::SingularInformation { .. }
            | Error::DegenerateFit(_)
            | Error::DegenerateWeight(_) => ErrorClass::Numerical,
            Error::Internal(_) => ErrorClass::Internal,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
