//! Generation-checked handles for cells and constraints.
//!
//! Both arenas recycle slots. A handle carries the slot index plus the
//! generation the slot had when the handle was issued, so a handle that
//! outlives its cell or constraint is detected instead of silently aliasing
//! the slot's next occupant.

use std::fmt;

/// Untyped handle to a reactive cell.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellId {
    index: u32,
    gen: u32,
}

impl CellId {
    pub(crate) fn new(index: u32, gen: u32) -> Self {
        CellId { index, gen }
    }

    /// Slot index. Stable for the lifetime of the cell; reused after a free.
    pub fn index(self) -> usize {
        self.index as usize
    }

    pub(crate) fn gen(self) -> u32 {
        self.gen
    }
}

impl fmt::Debug for CellId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "cell {}.{}", self.index, self.gen)
    }
}

/// Handle to a constraint registered with the engine.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ConstraintId {
    index: u32,
    gen: u32,
}

impl ConstraintId {
    pub(crate) fn new(index: u32, gen: u32) -> Self {
        ConstraintId { index, gen }
    }

    /// Slot index. Stable for the lifetime of the constraint.
    pub fn index(self) -> usize {
        self.index as usize
    }

    pub(crate) fn gen(self) -> u32 {
        self.gen
    }
}

impl fmt::Debug for ConstraintId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "cons {}.{}", self.index, self.gen)
    }
}
