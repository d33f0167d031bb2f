use dataflow_core::EngineError;
use thiserror::Error;

/// Errors produced by the application layer.
///
/// Engine failures pass through unchanged; everything else describes a
/// violated precondition of one of the application data structures.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum AppError {
    #[error(transparent)]
    Engine(#[from] EngineError),

    /// A splice would have made a node an ancestor of itself.
    #[error("splice would create a cycle")]
    CycleDetected,

    /// The operation requires a leaf node.
    #[error("node is not a leaf")]
    NotALeaf,

    /// The operation requires an internal (operator) node.
    #[error("node is not an internal node")]
    NotInternal,

    /// The root of an expression tree cannot be detached from itself.
    #[error("cannot delete the root of a tree")]
    RootDeletion,

    /// The node handle does not belong to this structure.
    #[error("node {0} does not belong to this structure")]
    UnknownNode(usize),

    /// The edge is already present; parallel edges are not supported.
    #[error("edge {0} -> {1} already exists")]
    EdgeExists(usize, usize),

    /// The edge addressed by a weight update does not exist.
    #[error("no edge {0} -> {1}")]
    UnknownEdge(usize, usize),

    /// A weight decrease must be strictly positive.
    #[error("weight decrease must be positive")]
    InvalidDecrease,

    /// A vector or column had the wrong length, or an index was out of range.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}
