use thiserror::Error;

/// Errors raised by the library. Report-only checkers never produce these for
/// a failed condition; they are reserved for malformed input.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain mismatch: {left} vs {right}")]
    DomainMismatch { left: String, right: String },

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("invalid function: {0}")]
    InvalidFunction(String),

    #[error("metric {metric} requires quadrature weights on the domain")]
    MissingWeights { metric: &'static str },

    #[error("operator produced a non-finite value at point {label} (input {input})")]
    NonFinite { label: String, input: f64 },

    #[error("invalid operator: {0}")]
    InvalidOperator(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("every supplied pair has zero distance; no contraction ratio can be formed")]
    DegeneratePairs,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error in {path}: {message}")]
    Parse { path: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
