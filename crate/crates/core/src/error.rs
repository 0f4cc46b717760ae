use std::fmt;

use crate::summands::Index;

/// Position of a parse failure, 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}", self.line, self.col)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("parse error at {pos}: {msg}")]
    Parse { pos: Pos, msg: String },

    #[error("summand {0} is not configured and no default is set")]
    UnknownSummand(Index),

    #[error("invalid element for summand {summand}: {msg}")]
    BadElement { summand: Index, msg: String },

    #[error("invalid group: {0}")]
    InvalidGroup(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("letter from summand {summand} exceeds level {level}")]
    LevelExceeded { summand: Index, level: Index },

    #[error("malformed rule: {0}")]
    MalformedRule(String),

    #[error("summand {0} has no finite alphabet; declare one to enumerate")]
    NotEnumerable(Index),

    #[error("malformed copy: {0}")]
    MalformedCopy(String),

    #[error("word ends in a letter of summand {0}; it is not a non-terminal representative")]
    Terminal(Index),

    #[error("level bound {given} is too small to certify stability (need at least {needed})")]
    BoundTooSmall { given: Index, needed: Index },

    #[error("cannot certify stabilization: {0}")]
    Uncertifiable(String),

    #[error("malformed support: {0}")]
    MalformedSupport(String),

    #[error("incompatible operands: {0}")]
    Mismatch(String),

    #[error("representatives agree through level {0} but are not structurally identical")]
    InconclusiveComparison(Index),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn parse(pos: Pos, msg: impl Into<String>) -> Self {
        Error::Parse {
            pos,
            msg: msg.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
