use thiserror::Error;

use crate::phrase::{Letter, Symbol};

/// Syntax or structural failure while reading a nanophrase or homotopy data file.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl ParseError {
    pub(crate) fn new(line: usize, column: usize, message: impl Into<String>) -> Self {
        Self {
            line,
            column,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PhraseError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("letter {letter} occurs {count} times; every letter must occur exactly twice")]
    Gauss { letter: Letter, count: usize },
    #[error("letter {0} has no projection")]
    MissingProjection(Letter),
    #[error("invalid letter name {0:?}")]
    InvalidLetterName(String),
    #[error("invalid projection token {0:?}")]
    InvalidProjection(String),
    #[error("projection {symbol} of letter {letter} is not in alpha")]
    ProjectionOutsideAlpha { letter: Letter, symbol: Symbol },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DataError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("{map} is not an involution on alpha: {detail}")]
    NotInvolution { map: &'static str, detail: String },
    #[error("triple {0} has more than one empty slot")]
    TooManyEmptySlots(String),
    #[error("symbol {0} is not in alpha")]
    UnknownSymbol(Symbol),
    #[error("invalid symbol name {0:?}")]
    InvalidSymbol(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MoveError {
    #[error("stale move site: {0}")]
    StaleSite(String),
    #[error("fresh letter {0} already exists in the phrase")]
    FreshNameCollision(Letter),
    #[error("insertion site is missing its fresh letters or projection")]
    UnboundInsertion,
    #[error("{0}")]
    Data(#[from] DataError),
    #[error("replay diverged at step {step}: expected hash {expected}, got {actual}")]
    ReplayDiverged {
        step: usize,
        expected: String,
        actual: String,
    },
}

/// Failures of the signed-word / series machinery and the invariants built on it.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InvariantError {
    #[error("expansion stage q={0} is below 2")]
    StageTooSmall(usize),
    #[error("letter {letter} has projection {symbol}, which is not one of a+, a-, b+, b-")]
    NotVirtual { letter: Letter, symbol: Symbol },
    #[error("component index {index} is out of range 1..={n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("unknown letter {0}")]
    UnknownLetter(Letter),
    #[error("letter {0} has no signed occurrence and cannot be expanded")]
    UnsignedLetter(Letter),
    #[error("series constant term is {0}, expected 1")]
    NotInvertible(i64),
    #[error("index sequence needs at least two entries")]
    SequenceTooShort,
    #[error("repeated entries in {0:?}")]
    RepeatedIndices(Vec<usize>),
    #[error(
        "coefficient for {sequence:?} did not stabilize up to q={q_cap}: values by q {values:?}"
    )]
    NotStabilized {
        sequence: Vec<usize>,
        q_cap: usize,
        values: Vec<(usize, i64)>,
    },
    #[error("invalid index sequence {0:?}")]
    InvalidSequence(String),
}
