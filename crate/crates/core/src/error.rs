//! Engine error type.

use thiserror::Error;

use crate::ids::{CellId, ConstraintId};

/// Errors surfaced by engine operations.
///
/// A constraint body returns `Result<(), EngineError>`; an `Err` aborts the
/// running solving session (queue and pending finalizers are dropped) and the
/// error propagates to whichever call triggered the session. The engine
/// itself stays usable afterwards.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    /// The handle does not name a live cell (stale generation or freed slot).
    #[error("{0:?} is not a live cell")]
    InvalidCell(CellId),
    /// The cell was already freed through this same handle.
    #[error("{0:?} was freed twice")]
    DoubleFree(CellId),
    /// The cell holds a value of a different type than the access expects.
    #[error("{0:?} holds a value of a different type")]
    TypeMismatch(CellId),
    /// The handle does not name a live constraint.
    #[error("{0:?} is not a live constraint")]
    InvalidConstraint(ConstraintId),
    /// `end_atomic` without a matching `begin_atomic`, or a constraint body
    /// returned with an atomic block still open.
    #[error("unbalanced atomic block")]
    UnbalancedAtomic,
    /// The scheduling comparator can only change while the queue is empty.
    #[error("schedule queue is not empty")]
    QueueNotEmpty,
    /// The solving session executed more constraint bodies than its budget
    /// allows; the cycle being solved does not converge.
    #[error("solver exceeded its budget of {0} executions")]
    SolverBudgetExceeded(u64),
    /// Structural operations (creating or deleting constraints, freeing
    /// cells, arming finalizers) are rejected inside a fixpoint probe.
    #[error("operation not permitted during a fixpoint probe")]
    InvalidDuringProbe,
    /// The operation needs a quiescent engine (no open atomic block, no
    /// running session).
    #[error("engine is not quiescent")]
    NotQuiescent,
    /// Failure raised by user code running inside a constraint body.
    #[error("constraint body failed: {0}")]
    Callback(String),
}
