//! Typed cell handles.

use std::fmt;
use std::hash::{Hash, Hasher};
use std::marker::PhantomData;

use crate::ids::CellId;

/// Typed handle to a reactive cell holding a `T`.
///
/// A `Cell<T>` is a plain copyable id; the value it points at lives inside
/// the engine. The phantom parameter only records the value type so reads
/// and writes stay statically typed. It uses `fn() -> T` so the handle is
/// `Copy` for every `T`, and so node types can embed handles to themselves
/// (the phantom adds no layout recursion).
pub struct Cell<T> {
    id: CellId,
    _ty: PhantomData<fn() -> T>,
}

// Manual impls: deriving them would put a `T: Clone` (etc.) bound on the
// handle even though it is just an id.
impl<T> Clone for Cell<T> {
    fn clone(&self) -> Self {
        *self
    }
}

impl<T> Copy for Cell<T> {}

impl<T> PartialEq for Cell<T> {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id
    }
}

impl<T> Eq for Cell<T> {}

impl<T> Hash for Cell<T> {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.id.hash(state);
    }
}

impl<T> fmt::Debug for Cell<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.id)
    }
}

impl<T> Cell<T> {
    pub(crate) fn new(id: CellId) -> Self {
        Cell { id, _ty: PhantomData }
    }

    /// The untyped id behind this handle.
    pub fn id(self) -> CellId {
        self.id
    }

    /// Wrap an untyped id. The caller asserts the cell really holds a `T`;
    /// a wrong assertion surfaces as `TypeMismatch` on the next access.
    pub fn from_id(id: CellId) -> Self {
        Cell::new(id)
    }
}
