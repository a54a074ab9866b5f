use std::fmt;

use thiserror::Error;

/// Source position of a syntax error (1-based).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,
    #[error("generator failure: {0}")]
    GeneratorFailure(String),
    #[error("syntax error at {pos}: {msg}")]
    Syntax { pos: Pos, msg: String },
    #[error("validation error: {0}")]
    Validation(String),
    #[error("not integrable: {0}")]
    NotIntegrable(String),
    #[error("inconclusive: {0}")]
    Inconclusive(String),
    #[error("unsupported exponent: {0}")]
    UnsupportedExponent(String),
    #[error("missing constant: {0}")]
    MissingConstant(String),
    #[error("resource limit: {0}")]
    ResourceLimit(String),
    #[error("malformed machine program: {0}")]
    MalformedProgram(String),
}

impl Error {
    pub(crate) fn gen(msg: impl Into<String>) -> Self {
        Error::GeneratorFailure(msg.into())
    }

    pub(crate) fn resource(msg: impl Into<String>) -> Self {
        Error::ResourceLimit(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
