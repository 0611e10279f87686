use std::fmt;

use thiserror::Error;

/// A syntax error with a 1-based source position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub file: Option<String>,
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(line: usize, column: usize, message: impl Into<String>) -> Self {
        ParseError {
            file: None,
            line,
            column,
            message: message.into(),
        }
    }

    pub fn in_file(mut self, file: impl Into<String>) -> Self {
        self.file = Some(file.into());
        self
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(file) = &self.file {
            write!(f, "{file}:")?;
        }
        write!(f, "{}:{}: {}", self.line, self.column, self.message)
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at {0}")]
    Parse(#[from] ParseError),

    #[error("variable `{variable}` does not occur in `{monomial}`")]
    VariableAbsent { variable: String, monomial: String },

    #[error("predicate `{predicate}` has arity {expected}, found {found}")]
    ArityMismatch {
        predicate: String,
        expected: usize,
        found: usize,
    },

    #[error("unknown predicate `{0}`")]
    UnknownPredicate(String),

    #[error("monomial `{monomial}` cannot be split over {atoms} atoms")]
    NoFactorization { monomial: String, atoms: usize },

    #[error("target polynomial `{0}` repeats a monomial")]
    DuplicateMonomials(String),

    #[error("{what} exceeded the limit of {limit}")]
    CapExceeded { what: &'static str, limit: usize },

    #[error("query is not standard: {0}")]
    NotStandard(String),

    #[error("{0}")]
    Mode(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("cannot read `{path}`: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
