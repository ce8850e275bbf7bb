//! Error types shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum KbError {
    #[error("unknown vertex id `{0}`")]
    UnknownVertex(String),
    #[error("unknown edge id `{0}`")]
    UnknownEdge(String),
    #[error("paths are not composable: s({0}) != r({1})")]
    NotComposable(String, String),
    #[error("degree mismatch: expected {expected}, got {got}")]
    DegreeMismatch { expected: String, got: String },
    #[error("range mismatch: r({0}) != r({1})")]
    RangeMismatch(String, String),
    #[error("source mismatch: s({0}) != s({1})")]
    SourceMismatch(String, String),
    #[error("missing factorisation square for edge pair ({0}, {1})")]
    MissingSquare(String, String),
    #[error("algebra mismatch: {0}")]
    AlgebraMismatch(String),
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),
    #[error("sections belong to different systems")]
    SystemMismatch,
    #[error("witness partially overlaps term Z({0}, {1}); deepen the witness")]
    AmbiguousWitness(String, String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, KbError>;
