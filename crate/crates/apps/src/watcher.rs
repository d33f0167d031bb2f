//! List watchers: a shadow constraint per reachable node.
//!
//! A watcher attaches to the head cell of a linked list and mirrors the
//! list's shape with *shadow* records, one per watched link field. The
//! shadow for a field re-executes whenever that field changes, follows the
//! new pointee, and keeps the shadow population in sync:
//!
//! * a link now reaching an unwatched node spawns a shadow for that node's
//!   own link field (recursively covering the whole list),
//! * a shadow that no longer has any watcher pointing at it arms a
//!   finalizer that reclaims it at the end of the session, so nodes that
//!   are merely re-linked mid-session are not torn down and re-created.
//!
//! Reference counts track how many shadows point at each shadow. The head
//! cell gets a permanent shadow (the *generator*), which counts toward
//! [`Watcher::shadow_count`], so a list of `n` nodes is covered by `n + 1`
//! shadows at rest.
//!
//! User logic plugs in through [`WatchHooks`]: `watch` runs inside the
//! shadow's constraint each time a node is (re)visited, so every cell it
//! reads becomes a dependency and the hook re-runs when any of them change.

use std::cell::RefCell;
use std::collections::HashMap;
use std::rc::Rc;

use dataflow_core::{Cell, CellId, ConstraintId, Engine, EngineError};

use crate::list::{DlNode, Linked};

/// Callbacks a [`Watcher`] drives as the list evolves.
///
/// All three run inside engine constraints (or finalizers, for `detach`),
/// so reads register dependencies and writes propagate normally.
pub trait WatchHooks<N: Linked> {
    /// `node` is reachable and is being visited: it was just linked in, or
    /// one of the cells this hook read for it last time has changed. `prev`
    /// is the node whose link field reaches `node`, or `None` when `node`
    /// is first in the list.
    fn watch(&mut self, eng: &mut Engine, prev: Option<N>, node: N) -> Result<(), EngineError> {
        let _ = (eng, prev, node);
        Ok(())
    }

    /// The first node of the list changed (`None` when the list emptied).
    fn head(&mut self, eng: &mut Engine, first: Option<N>) -> Result<(), EngineError> {
        let _ = (eng, first);
        Ok(())
    }

    /// `node` became unreachable and its shadow is being reclaimed. Runs at
    /// the end of the session, after the list has settled.
    fn detach(&mut self, eng: &mut Engine, node: N) -> Result<(), EngineError> {
        let _ = (eng, node);
        Ok(())
    }
}

struct Shadow<N> {
    cons: ConstraintId,
    /// The node whose link field this shadow watches; `None` for the
    /// generator, which watches the free-standing head cell.
    owner: Option<N>,
    /// Key of the successor shadow this one currently points at.
    next_key: Option<CellId>,
    /// How many shadows point here. The generator holds a permanent count
    /// of one on itself; a drop to zero schedules reclamation.
    refcount: u32,
}

struct Inner<N> {
    shadows: HashMap<CellId, Shadow<N>>,
}

/// A live watcher over one list. Dropping the value does not stop the
/// watching; call [`Watcher::detach`] to remove the shadow constraints.
pub struct Watcher<N: Linked, H: WatchHooks<N> + 'static> {
    inner: Rc<RefCell<Inner<N>>>,
    hooks: Rc<RefCell<H>>,
    head: Cell<Option<N>>,
    generator: ConstraintId,
}

impl<N: Linked, H: WatchHooks<N> + 'static> Watcher<N, H> {
    /// Start watching the list rooted at `head`. The shadow chain for the
    /// current list contents is built before this returns, with `watch`
    /// fired once per reachable node.
    pub fn attach(
        eng: &mut Engine,
        head: Cell<Option<N>>,
        hooks: H,
    ) -> Result<Self, EngineError> {
        let inner = Rc::new(RefCell::new(Inner { shadows: HashMap::new() }));
        let hooks = Rc::new(RefCell::new(hooks));
        // The atomic block defers the generator's first run until its map
        // entry is in place; the run then cascades down the list.
        let generator = eng.atomic(|e| {
            create_shadow::<N, H>(e, &inner, &hooks, head.id(), None, true, 1)
        })?;
        Ok(Watcher { inner, hooks, head, generator })
    }

    /// Number of live shadows: one per reachable node plus the generator.
    pub fn shadow_count(&self) -> usize {
        self.inner.borrow().shadows.len()
    }

    /// The cell this watcher is rooted at.
    pub fn head(&self) -> Cell<Option<N>> {
        self.head
    }

    /// The generator's constraint id.
    pub fn generator(&self) -> ConstraintId {
        self.generator
    }

    /// Shared handle to the hook state.
    pub fn hooks(&self) -> Rc<RefCell<H>> {
        self.hooks.clone()
    }

    /// Stop watching: delete every shadow constraint. The list itself and
    /// any hook-owned state are left untouched.
    pub fn detach(self, eng: &mut Engine) -> Result<(), EngineError> {
        let ids: Vec<ConstraintId> =
            self.inner.borrow().shadows.values().map(|s| s.cons).collect();
        for id in ids {
            eng.del_constraint(id)?;
        }
        self.inner.borrow_mut().shadows.clear();
        Ok(())
    }
}

/// Register a shadow for the link field `key` and insert its record. Must
/// run in a deferred-execution context (atomic block, constraint body or
/// finalizer) so the record exists before the body first runs.
fn create_shadow<N: Linked, H: WatchHooks<N> + 'static>(
    eng: &mut Engine,
    inner: &Rc<RefCell<Inner<N>>>,
    hooks: &Rc<RefCell<H>>,
    key: CellId,
    owner: Option<N>,
    is_head: bool,
    refcount: u32,
) -> Result<ConstraintId, EngineError> {
    let body_inner = inner.clone();
    let body_hooks = hooks.clone();
    let cons = eng.new_constraint((), move |e| {
        shadow_body::<N, H>(e, &body_inner, &body_hooks, key, is_head)
    })?;
    inner
        .borrow_mut()
        .shadows
        .insert(key, Shadow { cons, owner, next_key: None, refcount });
    Ok(cons)
}

fn shadow_body<N: Linked, H: WatchHooks<N> + 'static>(
    e: &mut Engine,
    inner: &Rc<RefCell<Inner<N>>>,
    hooks: &Rc<RefCell<H>>,
    key: CellId,
    is_head: bool,
) -> Result<(), EngineError> {
    let field: Cell<Option<N>> = Cell::from_id(key);
    let cur = e.read(field)?;

    // Make sure the pointee's own link field is shadowed.
    let succ_key = cur.map(|n| n.next_cell().id());
    if let Some(sk) = succ_key {
        let missing = !inner.borrow().shadows.contains_key(&sk);
        if missing {
            create_shadow::<N, H>(e, inner, hooks, sk, cur, false, 0)?;
        }
    }

    // Re-point our successor reference, adjusting reference counts. The
    // new successor is retained before the old one is released so a shared
    // successor never sees a transient zero.
    let old_key = {
        let mut b = inner.borrow_mut();
        let me = b.shadows.get_mut(&key).expect("shadow record of a running shadow");
        std::mem::replace(&mut me.next_key, succ_key)
    };
    if old_key != succ_key {
        if let Some(nk) = succ_key {
            retain::<N>(e, inner, nk)?;
        }
        if let Some(ok) = old_key {
            release::<N, H>(e, inner, hooks, ok)?;
        }
    }

    if is_head {
        hooks.borrow_mut().head(e, cur)?;
    }
    if let Some(node) = cur {
        let prev = inner.borrow().shadows.get(&key).and_then(|s| s.owner);
        hooks.borrow_mut().watch(e, prev, node)?;
    }
    Ok(())
}

fn retain<N: Linked>(
    e: &mut Engine,
    inner: &Rc<RefCell<Inner<N>>>,
    key: CellId,
) -> Result<(), EngineError> {
    let revived = {
        let mut b = inner.borrow_mut();
        let s = b.shadows.get_mut(&key).expect("retained shadow exists");
        s.refcount += 1;
        if s.refcount == 1 { Some(s.cons) } else { None }
    };
    if let Some(cons) = revived {
        // Back from zero within the session: cancel the pending teardown.
        e.disarm_final(cons)?;
    }
    Ok(())
}

fn release<N: Linked, H: WatchHooks<N> + 'static>(
    e: &mut Engine,
    inner: &Rc<RefCell<Inner<N>>>,
    hooks: &Rc<RefCell<H>>,
    key: CellId,
) -> Result<(), EngineError> {
    let orphaned = {
        let mut b = inner.borrow_mut();
        let s = b.shadows.get_mut(&key).expect("released shadow exists");
        s.refcount -= 1;
        if s.refcount == 0 { Some(s.cons) } else { None }
    };
    if let Some(cons) = orphaned {
        // Tear down only once the session has settled; a re-link before
        // then retains the shadow and disarms this handler.
        let f_inner = inner.clone();
        let f_hooks = hooks.clone();
        e.arm_final(cons, move |e2| delete_shadow::<N, H>(e2, &f_inner, &f_hooks, key))?;
    }
    Ok(())
}

fn delete_shadow<N: Linked, H: WatchHooks<N> + 'static>(
    e: &mut Engine,
    inner: &Rc<RefCell<Inner<N>>>,
    hooks: &Rc<RefCell<H>>,
    key: CellId,
) -> Result<(), EngineError> {
    let shadow = {
        let mut b = inner.borrow_mut();
        match b.shadows.get(&key) {
            Some(s) if s.refcount == 0 => b.shadows.remove(&key),
            _ => None,
        }
    };
    let Some(shadow) = shadow else { return Ok(()) };
    e.del_constraint(shadow.cons)?;
    if let Some(owner) = shadow.owner {
        hooks.borrow_mut().detach(e, owner)?;
    }
    if let Some(nk) = shadow.next_key {
        // Cascade: the next finals batch picks up any teardown this arms.
        release::<N, H>(e, inner, hooks, nk)?;
    }
    Ok(())
}

/// Hooks that keep a doubly linked list consistent: after every session,
/// `x.next.prev == x` for each reachable node `x`.
///
/// Corrupting a `prev` cell through a reactive write re-runs the shadow
/// that read it, which restores the back link. Re-linking `next` fields
/// updates the affected back links the same way.
pub struct Repairer;

impl<T: 'static> WatchHooks<DlNode<T>> for Repairer {
    fn watch(
        &mut self,
        eng: &mut Engine,
        _prev: Option<DlNode<T>>,
        node: DlNode<T>,
    ) -> Result<(), EngineError> {
        if let Some(succ) = eng.read(node.next)? {
            if eng.read(succ.prev)? != Some(node) {
                eng.write(succ.prev, Some(node))?;
            }
        }
        Ok(())
    }
}
