//! Reactive expression trees.
//!
//! Every node carries a value cell, an operator cell and two child cells;
//! one constraint per node recomputes the value from the children. Updating
//! a leaf therefore re-executes exactly the constraints on the path from
//! that leaf to the root, and nothing else. Structural edits (splicing a
//! subtree, changing an operator) propagate the same way, and several edits
//! inside one atomic block cost a single recomputation wave.

use std::collections::HashMap;

use dataflow_core::{Cell, CellId, ConstraintId, Engine};

use crate::error::AppError;
use crate::scalar::Scalar;

/// Operator of an internal node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Op {
    Sum,
    Prod,
}

/// Which child slot of an internal node a splice replaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// A node handle: the bundle of cells making up one tree node. Leaves have
/// `None` in both child cells and ignore their operator cell.
pub struct ExpNode<T> {
    pub val: Cell<T>,
    pub op: Cell<Op>,
    pub left: Cell<Option<ExpNode<T>>>,
    pub right: Cell<Option<ExpNode<T>>>,
}

/// A plain description of a tree shape, used to build reactive trees.
#[derive(Debug, Clone, PartialEq)]
pub enum TreeSpec<T> {
    Leaf(T),
    Node(Op, Box<TreeSpec<T>>, Box<TreeSpec<T>>),
}

impl<T> TreeSpec<T> {
    pub fn leaf(v: T) -> Self {
        TreeSpec::Leaf(v)
    }

    pub fn node(op: Op, left: TreeSpec<T>, right: TreeSpec<T>) -> Self {
        TreeSpec::Node(op, Box::new(left), Box::new(right))
    }
}

/// A reactive expression tree. The value of every internal node is kept
/// equal to `left.val <op> right.val` by one constraint per node.
pub struct ExpTree<T: Scalar> {
    root: ExpNode<T>,
    /// Every node of the tree (including spliced-out subtrees that have not
    /// been deleted), keyed by the node's value cell.
    nodes: HashMap<CellId, (ConstraintId, ExpNode<T>)>,
}

impl<T: Scalar> ExpTree<T> {
    /// Build a reactive tree from a description. All node values are
    /// computed before this returns.
    pub fn build(eng: &mut Engine, spec: &TreeSpec<T>) -> Result<Self, AppError> {
        let mut nodes = HashMap::new();
        let root = build_rec(eng, spec, &mut nodes)?;
        Ok(ExpTree { root, nodes })
    }

    pub fn root(&self) -> ExpNode<T> {
        self.root
    }

    /// Number of nodes the tree owns, detached subtrees included.
    pub fn size(&self) -> usize {
        self.nodes.len()
    }

    /// The computed value at the root.
    pub fn root_value(&self, eng: &mut Engine) -> Result<T, AppError> {
        Ok(eng.read(self.root.val)?)
    }

    /// The computed value at any node.
    pub fn value(&self, eng: &mut Engine, node: ExpNode<T>) -> Result<T, AppError> {
        self.member(node)?;
        Ok(eng.read(node.val)?)
    }

    /// The children of `node`, or `None` for a leaf.
    pub fn children(
        &self,
        eng: &mut Engine,
        node: ExpNode<T>,
    ) -> Result<Option<(ExpNode<T>, ExpNode<T>)>, AppError> {
        self.member(node)?;
        match (eng.read(node.left)?, eng.read(node.right)?) {
            (Some(l), Some(r)) => Ok(Some((l, r))),
            _ => Ok(None),
        }
    }

    /// The operator of an internal node.
    pub fn op(&self, eng: &mut Engine, node: ExpNode<T>) -> Result<Op, AppError> {
        self.member(node)?;
        Ok(eng.read(node.op)?)
    }

    /// The leaves under the root, left to right.
    pub fn leaves(&self, eng: &mut Engine) -> Result<Vec<ExpNode<T>>, AppError> {
        let mut out = Vec::new();
        let mut stack = vec![self.root];
        while let Some(n) = stack.pop() {
            match (eng.read(n.left)?, eng.read(n.right)?) {
                (Some(l), Some(r)) => {
                    stack.push(r);
                    stack.push(l);
                }
                _ => out.push(n),
            }
        }
        Ok(out)
    }

    /// Overwrite the value of a leaf. The path to the root recomputes.
    pub fn set_leaf(&self, eng: &mut Engine, node: ExpNode<T>, v: T) -> Result<(), AppError> {
        self.member(node)?;
        if eng.read(node.left)?.is_some() && eng.read(node.right)?.is_some() {
            return Err(AppError::NotALeaf);
        }
        eng.write(node.val, v)?;
        Ok(())
    }

    /// Change the operator of an internal node.
    pub fn set_op(&self, eng: &mut Engine, node: ExpNode<T>, op: Op) -> Result<(), AppError> {
        self.member(node)?;
        if eng.read(node.left)?.is_none() {
            return Err(AppError::NotInternal);
        }
        eng.write(node.op, op)?;
        Ok(())
    }

    /// Grow a fresh subtree from a description; it starts out detached.
    /// Attach it with [`ExpTree::splice`].
    pub fn grow(&mut self, eng: &mut Engine, spec: &TreeSpec<T>) -> Result<ExpNode<T>, AppError> {
        build_rec(eng, spec, &mut self.nodes)
    }

    /// Point the `side` child slot of `parent` at `sub`. The previous child
    /// subtree is detached but stays alive; delete it, or splice it back in
    /// somewhere else. Fails with [`AppError::CycleDetected`] if `parent`
    /// sits inside the subtree rooted at `sub`.
    pub fn splice(
        &self,
        eng: &mut Engine,
        parent: ExpNode<T>,
        side: Side,
        sub: ExpNode<T>,
    ) -> Result<(), AppError> {
        self.member(parent)?;
        self.member(sub)?;
        if eng.read(parent.left)?.is_none() {
            return Err(AppError::NotInternal);
        }
        if parent == sub || reaches(eng, sub, parent)? {
            return Err(AppError::CycleDetected);
        }
        let slot = match side {
            Side::Left => parent.left,
            Side::Right => parent.right,
        };
        eng.write(slot, Some(sub))?;
        Ok(())
    }

    /// Delete the subtree rooted at `node`: detach it from its parent if it
    /// has one, then eagerly remove every constraint and free every cell
    /// under it, depth first. Returns the number of nodes reclaimed.
    pub fn delete_subtree(
        &mut self,
        eng: &mut Engine,
        node: ExpNode<T>,
    ) -> Result<usize, AppError> {
        self.member(node)?;
        if node == self.root {
            return Err(AppError::RootDeletion);
        }
        if let Some((parent, side)) = find_parent(eng, self.root, node)? {
            let slot = match side {
                Side::Left => parent.left,
                Side::Right => parent.right,
            };
            eng.write(slot, None::<ExpNode<T>>)?;
        }
        // Collect first, then reclaim: no reads from freed cells.
        let doomed = subtree_nodes(eng, node)?;
        for n in &doomed {
            if let Some((cons, _)) = self.nodes.remove(&n.val.id()) {
                eng.del_constraint(cons)?;
            }
            free_node(eng, *n)?;
        }
        Ok(doomed.len())
    }

    /// Tear the whole tree down, constraints and cells both.
    pub fn destroy(self, eng: &mut Engine) -> Result<(), AppError> {
        for (_, (cons, node)) in self.nodes {
            eng.del_constraint(cons)?;
            free_node(eng, node)?;
        }
        Ok(())
    }

    fn member(&self, node: ExpNode<T>) -> Result<(), AppError> {
        if self.nodes.contains_key(&node.val.id()) {
            Ok(())
        } else {
            Err(AppError::UnknownNode(node.val.id().index()))
        }
    }
}

fn build_rec<T: Scalar>(
    eng: &mut Engine,
    spec: &TreeSpec<T>,
    nodes: &mut HashMap<CellId, (ConstraintId, ExpNode<T>)>,
) -> Result<ExpNode<T>, AppError> {
    match spec {
        TreeSpec::Leaf(v) => alloc_node(eng, *v, Op::Sum, None, None, nodes),
        TreeSpec::Node(op, l, r) => {
            let left = build_rec(eng, l, nodes)?;
            let right = build_rec(eng, r, nodes)?;
            alloc_node(eng, T::zero(), *op, Some(left), Some(right), nodes)
        }
    }
}

fn alloc_node<T: Scalar>(
    eng: &mut Engine,
    v: T,
    op: Op,
    left: Option<ExpNode<T>>,
    right: Option<ExpNode<T>>,
    nodes: &mut HashMap<CellId, (ConstraintId, ExpNode<T>)>,
) -> Result<ExpNode<T>, AppError> {
    let node = ExpNode {
        val: eng.alloc_cell(v),
        op: eng.alloc_cell(op),
        left: eng.alloc_cell(left),
        right: eng.alloc_cell(right),
    };
    let cons = eng.new_constraint((), move |e| {
        let l = e.read(node.left)?;
        let r = e.read(node.right)?;
        // A leaf's value is an input, not a computation.
        let (Some(l), Some(r)) = (l, r) else { return Ok(()) };
        let lv = e.read(l.val)?;
        let rv = e.read(r.val)?;
        let v = match e.read(node.op)? {
            Op::Sum => lv + rv,
            Op::Prod => lv * rv,
        };
        e.write(node.val, v)
    })?;
    nodes.insert(node.val.id(), (cons, node));
    Ok(node)
}

fn free_node<T: Scalar>(eng: &mut Engine, node: ExpNode<T>) -> Result<(), AppError> {
    eng.free_cell(node.val)?;
    eng.free_cell(node.op)?;
    eng.free_cell(node.left)?;
    eng.free_cell(node.right)?;
    Ok(())
}

/// Is `target` inside the subtree rooted at `from`?
fn reaches<T: Scalar>(
    eng: &mut Engine,
    from: ExpNode<T>,
    target: ExpNode<T>,
) -> Result<bool, AppError> {
    for n in subtree_nodes(eng, from)? {
        if n == target {
            return Ok(true);
        }
    }
    Ok(false)
}

fn subtree_nodes<T: Scalar>(
    eng: &mut Engine,
    root: ExpNode<T>,
) -> Result<Vec<ExpNode<T>>, AppError> {
    let mut out = Vec::new();
    let mut stack = vec![root];
    while let Some(n) = stack.pop() {
        out.push(n);
        if let (Some(l), Some(r)) = (eng.read(n.left)?, eng.read(n.right)?) {
            stack.push(l);
            stack.push(r);
        }
    }
    Ok(out)
}

fn find_parent<T: Scalar>(
    eng: &mut Engine,
    root: ExpNode<T>,
    child: ExpNode<T>,
) -> Result<Option<(ExpNode<T>, Side)>, AppError> {
    let mut stack = vec![root];
    while let Some(n) = stack.pop() {
        if let (Some(l), Some(r)) = (eng.read(n.left)?, eng.read(n.right)?) {
            if l == child {
                return Ok(Some((n, Side::Left)));
            }
            if r == child {
                return Ok(Some((n, Side::Right)));
            }
            stack.push(l);
            stack.push(r);
        }
    }
    Ok(None)
}

impl<T> Clone for ExpNode<T> {
    fn clone(&self) -> Self {
        *self
    }
}

impl<T> Copy for ExpNode<T> {}

impl<T> PartialEq for ExpNode<T> {
    fn eq(&self, other: &Self) -> bool {
        self.val == other.val
            && self.op == other.op
            && self.left == other.left
            && self.right == other.right
    }
}

impl<T> Eq for ExpNode<T> {}

impl<T> std::fmt::Debug for ExpNode<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "expnode({:?})", self.val)
    }
}
