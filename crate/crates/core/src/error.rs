use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid token {text:?}: {reason}")]
    InvalidToken { text: String, reason: &'static str },

    #[error("document {0:?} has no steps or an empty step")]
    EmptyDocument(String),

    #[error("unknown tag {0:?}")]
    UnknownTag(String),

    #[error("unknown edge label {0:?}")]
    UnknownLabel(String),

    #[error("malformed IOB label {0:?}")]
    MalformedIob(String),

    #[error("spans of nodes {first} and {second} overlap")]
    OverlappingSpans { first: usize, second: usize },

    #[error("span of node {node} is invalid: {reason}")]
    InvalidSpan { node: usize, reason: &'static str },

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("unknown node id {0}")]
    UnknownNode(usize),

    #[error("step indices ({i}, {j}) invalid for a document with {steps} steps")]
    InvalidStepPair { i: usize, j: usize, steps: usize },

    #[error("steps {i} and {j} cannot be swapped without breaking a dependency")]
    NotSwappable { i: usize, j: usize },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("record {id:?} failed validation: {message}")]
    InvalidRecord { id: String, message: String },

    #[error("cannot split {docs} documents into {folds} folds")]
    FoldCount { docs: usize, folds: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("gold graph {0:?} is not a complete single-head graph")]
    IncompleteGold(String),

    #[error("empty node list")]
    NoNodes,

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("edge {edge} references a node outside the inventory")]
    DanglingEdge { edge: usize },

    #[error("document mismatch: {0}")]
    DocumentMismatch(String),

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error("empty training split: {0}")]
    EmptySplit(&'static str),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
