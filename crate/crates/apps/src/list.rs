//! Linked-list nodes made of cells.
//!
//! A node is a small bundle of cell handles, cheap to copy and safe to store
//! inside other cells. Links are `Cell<Option<N>>`: `None` plays the role of
//! the null pointer. The [`Linked`] trait exposes the successor field so the
//! watcher machinery can traverse any node shape.

use std::any::Any;
use std::fmt;
use std::hash::{Hash, Hasher};

use dataflow_core::{Cell, Engine, EngineError};

/// A node kind the list watcher can follow.
pub trait Linked: Copy + PartialEq + 'static {
    /// The cell holding this node's successor.
    fn next_cell(self) -> Cell<Option<Self>>;
}

/// A singly linked node holding one value.
pub struct ListNode<T> {
    pub val: Cell<T>,
    pub next: Cell<Option<ListNode<T>>>,
}

/// A doubly linked node holding one value.
pub struct DlNode<T> {
    pub val: Cell<T>,
    pub next: Cell<Option<DlNode<T>>>,
    pub prev: Cell<Option<DlNode<T>>>,
}

impl<T: Any + PartialEq + Clone> ListNode<T> {
    /// Allocate a detached node with the given value.
    pub fn alloc(eng: &mut Engine, val: T) -> Self {
        let val = eng.alloc_cell(val);
        let next = eng.alloc_cell(None::<ListNode<T>>);
        ListNode { val, next }
    }

    /// Free both cells of a node that is no longer linked anywhere.
    pub fn free(self, eng: &mut Engine) -> Result<(), EngineError> {
        eng.free_cell(self.val)?;
        eng.free_cell(self.next)
    }
}

impl<T: Any + PartialEq + Clone> DlNode<T> {
    /// Allocate a detached node with the given value.
    pub fn alloc(eng: &mut Engine, val: T) -> Self {
        let val = eng.alloc_cell(val);
        let next = eng.alloc_cell(None::<DlNode<T>>);
        let prev = eng.alloc_cell(None::<DlNode<T>>);
        DlNode { val, next, prev }
    }

    /// Free all three cells of a node that is no longer linked anywhere.
    pub fn free(self, eng: &mut Engine) -> Result<(), EngineError> {
        eng.free_cell(self.val)?;
        eng.free_cell(self.next)?;
        eng.free_cell(self.prev)
    }
}

impl<T: 'static> Linked for ListNode<T> {
    fn next_cell(self) -> Cell<Option<Self>> {
        self.next
    }
}

impl<T: 'static> Linked for DlNode<T> {
    fn next_cell(self) -> Cell<Option<Self>> {
        self.next
    }
}

/// Build a singly linked list from `values`, returning the head cell and the
/// nodes in list order. The head cell is `None` for an empty list.
pub fn build_list<T: Any + PartialEq + Clone>(
    eng: &mut Engine,
    values: &[T],
) -> Result<(Cell<Option<ListNode<T>>>, Vec<ListNode<T>>), EngineError> {
    let head = eng.alloc_cell(None::<ListNode<T>>);
    let mut nodes = Vec::with_capacity(values.len());
    for v in values {
        nodes.push(ListNode::alloc(eng, v.clone()));
    }
    for w in nodes.windows(2) {
        eng.write(w[0].next, Some(w[1]))?;
    }
    if let Some(first) = nodes.first() {
        eng.write(head, Some(*first))?;
    }
    Ok((head, nodes))
}

/// Build a doubly linked list from `values`, returning the head cell and the
/// nodes in list order. Every node's `prev` points at its predecessor; the
/// first node's `prev` is `None`.
pub fn build_dl_list<T: Any + PartialEq + Clone>(
    eng: &mut Engine,
    values: &[T],
) -> Result<(Cell<Option<DlNode<T>>>, Vec<DlNode<T>>), EngineError> {
    let head = eng.alloc_cell(None::<DlNode<T>>);
    let mut nodes = Vec::with_capacity(values.len());
    for v in values {
        nodes.push(DlNode::alloc(eng, v.clone()));
    }
    for w in nodes.windows(2) {
        eng.write(w[0].next, Some(w[1]))?;
        eng.write(w[1].prev, Some(w[0]))?;
    }
    if let Some(first) = nodes.first() {
        eng.write(head, Some(*first))?;
    }
    Ok((head, nodes))
}

/// Collect the values of a list in order by following `next` links.
pub fn collect_values<N, T>(
    eng: &mut Engine,
    head: Cell<Option<N>>,
    val_of: impl Fn(N) -> Cell<T>,
) -> Result<Vec<T>, EngineError>
where
    N: Linked,
    T: Any + PartialEq + Clone,
{
    let mut out = Vec::new();
    let mut cur = eng.read(head)?;
    while let Some(node) = cur {
        out.push(eng.read(val_of(node))?);
        cur = eng.read(node.next_cell())?;
    }
    Ok(out)
}

// The handle types are plain bundles of ids; the manual impls avoid the
// spurious `T: Clone` bounds the derives would add.
impl<T> Clone for ListNode<T> {
    fn clone(&self) -> Self {
        *self
    }
}

impl<T> Copy for ListNode<T> {}

impl<T> PartialEq for ListNode<T> {
    fn eq(&self, other: &Self) -> bool {
        self.val == other.val && self.next == other.next
    }
}

impl<T> Eq for ListNode<T> {}

impl<T> Hash for ListNode<T> {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.val.hash(state);
        self.next.hash(state);
    }
}

impl<T> fmt::Debug for ListNode<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "node({:?})", self.val)
    }
}

impl<T> Clone for DlNode<T> {
    fn clone(&self) -> Self {
        *self
    }
}

impl<T> Copy for DlNode<T> {}

impl<T> PartialEq for DlNode<T> {
    fn eq(&self, other: &Self) -> bool {
        self.val == other.val && self.next == other.next && self.prev == other.prev
    }
}

impl<T> Eq for DlNode<T> {}

impl<T> Hash for DlNode<T> {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.val.hash(state);
        self.next.hash(state);
    }
}

impl<T> fmt::Debug for DlNode<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "dlnode({:?})", self.val)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builds_and_collects_a_singly_linked_list() {
        let mut eng = Engine::new();
        let (head, nodes) = build_list(&mut eng, &[1i64, 2, 3]).unwrap();
        assert_eq!(nodes.len(), 3);
        let vals = collect_values(&mut eng, head, |n: ListNode<i64>| n.val).unwrap();
        assert_eq!(vals, vec![1, 2, 3]);
    }

    #[test]
    fn doubly_linked_list_has_consistent_back_links() {
        let mut eng = Engine::new();
        let (head, nodes) = build_dl_list(&mut eng, &[10i64, 20, 30]).unwrap();
        assert_eq!(eng.read(head).unwrap(), Some(nodes[0]));
        assert_eq!(eng.read(nodes[0].prev).unwrap(), None);
        assert_eq!(eng.read(nodes[1].prev).unwrap(), Some(nodes[0]));
        assert_eq!(eng.read(nodes[2].prev).unwrap(), Some(nodes[1]));
    }

    #[test]
    fn empty_list_has_a_none_head() {
        let mut eng = Engine::new();
        let (head, nodes) = build_list::<i64>(&mut eng, &[]).unwrap();
        assert!(nodes.is_empty());
        assert_eq!(eng.read(head).unwrap(), None);
    }
}
