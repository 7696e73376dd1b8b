use thiserror::Error;

use crate::mdp::ValidationReport;

/// Errors produced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid MDP: {0}")]
    InvalidMdp(ValidationReport),

    #[error("policy enumeration needs {count} policies, limit is {limit}")]
    TooManyPolicies { count: f64, limit: u64 },

    #[error("matrix is not row-stochastic: row {row} sums to {sum}")]
    NotStochastic { row: usize, sum: f64 },

    #[error("singular linear system in {0}")]
    SingularSystem(&'static str),

    #[error("no candidate bias vector passed verification")]
    NoVerifiedCandidate,

    #[error("{what} out of range: {detail}")]
    OutOfRange { what: &'static str, detail: String },

    #[error("schedule precondition violated: {0}")]
    SchedulePreconditionViolated(String),

    #[error("bad size {n}: need n >= {min}")]
    BadSize { n: usize, min: usize },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
