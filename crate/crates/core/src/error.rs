//! Error types shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A catalog lookup (kernel family or test function) failed.
    #[error("unknown catalog entry `{0}`")]
    UnknownName(String),

    /// A caller violated an argument precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// An integral did not converge within the evaluation budget. Carries the
    /// partial value and the honest error estimate at the point of giving up.
    #[error("integration of {context} did not converge: value={value:e}, error_estimate={error_estimate:e}, evaluations={evaluations}")]
    Integration {
        context: String,
        value: f64,
        error_estimate: f64,
        evaluations: usize,
    },

    /// Panel estimates diverged under refinement on an unbounded interval.
    #[error("integrand appears non-integrable over the real line: {context}")]
    NonIntegrable { context: String },

    /// One term of the operator sum failed; names the failing power.
    #[error("operator term m={m} failed")]
    OperatorTerm {
        m: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error at {path}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
