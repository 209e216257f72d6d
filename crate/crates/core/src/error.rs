use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("parse error (line {line}): {msg}")]
    Parse { line: usize, msg: String },
    #[error("recurrence obstructed: leading coefficient vanishes at m = {0}")]
    Obstructed(i64),
    #[error("no operator of the requested shape annihilates the sequence")]
    NotFound,
    #[error("ambiguous fit: nullspace has dimension {0}")]
    AmbiguousFit(usize, Vec<String>),
    #[error("irregular singular point at {0}")]
    Irregular(String),
    #[error("quadrature did not converge: {0}")]
    NoConvergence(String),
    #[error("internal consistency failure: {0}")]
    Consistency(String),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }
}
