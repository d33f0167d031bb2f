//! The constraint engine: reactive cells, constraints, and the solver.
//!
//! # Model
//!
//! Cells are typed storage locations. A constraint is a closure over the
//! engine that reads some cells and writes others. While a constraint body
//! runs, every cell it reads is recorded as a dependency of that execution;
//! writing a cell whose value actually changes schedules the constraints
//! that depended on it. The solver keeps picking scheduled constraints and
//! re-executing them until the queue drains: a solving session. At
//! quiescence the store is a fixpoint of all live constraints, provided the
//! constraint system converges (a budget guards against systems that do
//! not).
//!
//! Dependencies are per-execution: each re-execution starts from an empty
//! dependency set, so a constraint that reads different cells on different
//! branches only ever depends on the cells its latest execution touched.
//! Outdated dependency records are discarded lazily: writes skim them off
//! while scheduling, and [`Engine::collect_stale`] sweeps incrementally.
//!
//! # Writes and modes
//!
//! - In normal mode, a write that changes the value triggers a session
//!   immediately; a write of an equal value is absorbed.
//! - Inside an atomic block ([`Engine::begin_atomic`] / [`Engine::end_atomic`])
//!   writes only store. When the outermost block ends, every written cell is
//!   compared against its pre-block value and one session propagates all
//!   actual changes, so intermediate states are never observed.
//! - Inside a constraint body, writes store immediately but propagation is
//!   deferred to the end of that execution, with change detection against
//!   the value the cell had when the body first wrote it.
//!
//! # Final handlers
//!
//! A constraint may arm a finalizer for the current session. Once the queue
//! drains, armed finalizers run in arming order, in a mode where reads log
//! no dependencies and writes behave like one atomic block around the batch.
//! Arming is per-session: handlers run once and must be re-armed to run
//! again. Finalizers may arm further finalizers; the session keeps
//! alternating queue drains and finalizer batches until both are empty.

use std::any::Any;
use std::cmp::Ordering;
use std::mem;

use crate::cell::Cell;
use crate::error::EngineError;
use crate::ids::{CellId, ConstraintId};
use crate::schedule::{Comparator, QueueEntry, ScheduleQueue};
use crate::stats::ExecStats;
use crate::value::Value;

/// Signature of constraint bodies and final handlers.
pub type BodyFn = dyn FnMut(&mut Engine) -> Result<(), EngineError>;

/// Default per-session execution budget.
pub const DEFAULT_SOLVER_BUDGET: u64 = 10_000_000;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Mode {
    /// No constraint running; writes propagate (unless inside an atomic block).
    Normal,
    /// A constraint body is running: reads log dependencies, writes defer.
    Constraint,
    /// A finalizer batch is running: reads unlogged, writes defer to batch end.
    Finals,
    /// A fixpoint probe: reads unlogged, writes rolled back, no scheduling.
    Probe,
}

/// One dependency record: `cons` read the owning cell during the execution
/// that began at `stamp`. The record is current while `stamp` still equals
/// the constraint's latest execution stamp.
struct DepNode {
    cons: ConstraintId,
    stamp: u64,
}

struct CellSlot {
    gen: u32,
    /// `None` marks a freed slot awaiting reuse.
    value: Option<Box<dyn Value>>,
    deps: Vec<DepNode>,
    /// Stamp of the execution that last read this cell; deduplicates
    /// dependency records within one execution.
    last_access: u64,
    in_wlog: bool,
    in_blog: bool,
    in_plog: bool,
}

struct ConsSlot {
    gen: u32,
    alive: bool,
    /// Taken out while the body is on the stack.
    body: Option<Box<BodyFn>>,
    param: Box<dyn Any>,
    /// Stamp of the latest execution; 0 if never executed.
    last_exec: u64,
    last_session: u64,
    /// Dependency records created by the latest execution and still current.
    dep_count: u64,
    final_handler: Option<Box<BodyFn>>,
    final_armed: bool,
}

/// Single-threaded dataflow constraint engine. See the module docs for the
/// execution model.
pub struct Engine {
    cells: Vec<CellSlot>,
    free_cells: Vec<u32>,
    constraints: Vec<ConsSlot>,
    free_cons: Vec<u32>,
    queue: ScheduleQueue,
    comparator: Comparator,
    mode: Mode,
    atomic_depth: u32,
    in_session: bool,
    current: Option<ConstraintId>,
    /// Bumped once per constraint execution; doubles as the read-dedup clock.
    global_stamp: u64,
    /// Writes of the currently executing constraint: (cell, value before the
    /// first change this execution).
    wlog: Vec<(CellId, Box<dyn Value>)>,
    /// Writes of the current atomic block or finalizer batch: (cell, value
    /// before the first change in the block).
    blog: Vec<(CellId, Box<dyn Value>)>,
    /// Writes of the current fixpoint probe, for rollback.
    plog: Vec<(CellId, Box<dyn Value>)>,
    probe_dirty: bool,
    /// Constraints with an armed finalizer, in arming order.
    finals: Vec<ConstraintId>,
    budget_limit: u64,
    budget_left: u64,
    session_id: u64,
    session_distinct: u64,
    gc_cursor: usize,
    stats: ExecStats,
    trace: Option<Vec<ConstraintId>>,
    live_cells: usize,
    live_constraints: usize,
}

impl Default for Engine {
    fn default() -> Self {
        Engine::new()
    }
}

fn node_is_current(constraints: &[ConsSlot], node: &DepNode) -> bool {
    constraints
        .get(node.cons.index())
        .map_or(false, |r| r.gen == node.cons.gen() && r.alive && r.last_exec == node.stamp)
}

fn live_param(constraints: &[ConsSlot], id: ConstraintId) -> Option<&dyn Any> {
    constraints
        .get(id.index())
        .filter(|r| r.gen == id.gen() && r.alive)
        .map(|r| r.param.as_ref())
}

fn entry_cmp(cmp: &Comparator, constraints: &[ConsSlot], a: &QueueEntry, b: &QueueEntry) -> Ordering {
    match cmp {
        Comparator::LeastRecentlyExecuted => a.stamp.cmp(&b.stamp).then_with(|| a.id.cmp(&b.id)),
        // Sequence numbers are unique, no tie-break needed.
        Comparator::Lifo => b.seq.cmp(&a.seq),
        Comparator::UserParam(f) => {
            let ord = match (live_param(constraints, a.id), live_param(constraints, b.id)) {
                (Some(x), Some(y)) => f(x, y),
                // A queued constraint can die before its entry is skimmed
                // off; order those arbitrarily but consistently.
                _ => Ordering::Equal,
            };
            ord.then_with(|| a.id.cmp(&b.id))
        }
    }
}

impl Engine {
    pub fn new() -> Self {
        Engine {
            cells: Vec::new(),
            free_cells: Vec::new(),
            constraints: Vec::new(),
            free_cons: Vec::new(),
            queue: ScheduleQueue::new(),
            comparator: Comparator::default(),
            mode: Mode::Normal,
            atomic_depth: 0,
            in_session: false,
            current: None,
            global_stamp: 0,
            wlog: Vec::new(),
            blog: Vec::new(),
            plog: Vec::new(),
            probe_dirty: false,
            finals: Vec::new(),
            budget_limit: DEFAULT_SOLVER_BUDGET,
            budget_left: DEFAULT_SOLVER_BUDGET,
            session_id: 0,
            session_distinct: 0,
            gc_cursor: 0,
            stats: ExecStats::default(),
            trace: None,
            live_cells: 0,
            live_constraints: 0,
        }
    }

    // ------------------------------------------------------------------
    // Cells
    // ------------------------------------------------------------------

    /// Allocate a reactive cell holding `init`.
    pub fn alloc_cell<T: Any + PartialEq + Clone>(&mut self, init: T) -> Cell<T> {
        let boxed: Box<dyn Value> = Box::new(init);
        let id = match self.free_cells.pop() {
            Some(raw) => {
                let index = raw as usize;
                let slot = &mut self.cells[index];
                slot.gen = slot.gen.wrapping_add(1);
                slot.value = Some(boxed);
                slot.deps.clear();
                slot.last_access = 0;
                slot.in_wlog = false;
                slot.in_blog = false;
                slot.in_plog = false;
                CellId::new(raw, slot.gen)
            }
            None => {
                let index = self.cells.len() as u32;
                self.cells.push(CellSlot {
                    gen: 0,
                    value: Some(boxed),
                    deps: Vec::new(),
                    last_access: 0,
                    in_wlog: false,
                    in_blog: false,
                    in_plog: false,
                });
                CellId::new(index, 0)
            }
        };
        self.live_cells += 1;
        Cell::new(id)
    }

    /// Free a cell. Dependency records pointing at it are discarded; the
    /// constraints that held them are not rescheduled.
    pub fn free_cell<T>(&mut self, cell: Cell<T>) -> Result<(), EngineError> {
        self.free_cell_raw(cell.id())
    }

    /// Untyped [`Engine::free_cell`].
    pub fn free_cell_raw(&mut self, id: CellId) -> Result<(), EngineError> {
        if self.mode == Mode::Probe {
            return Err(EngineError::InvalidDuringProbe);
        }
        let index = id.index();
        let deps = {
            let slot = self.cells.get_mut(index).ok_or(EngineError::InvalidCell(id))?;
            if slot.gen != id.gen() {
                return Err(EngineError::InvalidCell(id));
            }
            if slot.value.is_none() {
                return Err(EngineError::DoubleFree(id));
            }
            slot.value = None;
            slot.last_access = 0;
            mem::take(&mut slot.deps)
        };
        let mut dropped_live = 0u64;
        let mut dropped_stale = 0u64;
        for node in &deps {
            if node_is_current(&self.constraints, node) {
                self.constraints[node.cons.index()].dep_count -= 1;
                dropped_live += 1;
            } else {
                dropped_stale += 1;
            }
        }
        self.stats.dependencies_live -= dropped_live;
        self.stats.stale_collected += dropped_stale;
        self.free_cells.push(index as u32);
        self.live_cells -= 1;
        Ok(())
    }

    /// Read a cell. Inside a constraint body this records a dependency of
    /// the running constraint on the cell; elsewhere it is a plain read.
    pub fn read<T: Any + PartialEq + Clone>(&mut self, cell: Cell<T>) -> Result<T, EngineError> {
        let id = cell.id();
        let index = id.index();
        {
            let slot = self.cells.get(index).ok_or(EngineError::InvalidCell(id))?;
            if slot.gen != id.gen() || slot.value.is_none() {
                return Err(EngineError::InvalidCell(id));
            }
        }
        if self.mode == Mode::Constraint {
            let cons = self.current.expect("constraint mode without a running constraint");
            let stamp = self.global_stamp;
            let slot = &mut self.cells[index];
            if slot.last_access < stamp {
                slot.last_access = stamp;
                slot.deps.push(DepNode { cons, stamp });
                self.constraints[cons.index()].dep_count += 1;
                self.stats.dependencies_live += 1;
            }
        }
        let value = self.cells[index].value.as_ref().expect("validated above");
        value
            .as_any()
            .downcast_ref::<T>()
            .cloned()
            .ok_or(EngineError::TypeMismatch(id))
    }

    /// Write a cell. Equal values are absorbed. A changing write propagates
    /// according to the current mode: immediately in normal mode, at block
    /// end inside an atomic block, at execution end inside a constraint.
    pub fn write<T: Any + PartialEq + Clone>(&mut self, cell: Cell<T>, value: T) -> Result<(), EngineError> {
        let id = cell.id();
        let index = id.index();
        {
            let slot = self.cells.get(index).ok_or(EngineError::InvalidCell(id))?;
            if slot.gen != id.gen() {
                return Err(EngineError::InvalidCell(id));
            }
            let cur = slot.value.as_ref().ok_or(EngineError::InvalidCell(id))?;
            let cur = cur.as_any().downcast_ref::<T>().ok_or(EngineError::TypeMismatch(id))?;
            if *cur == value {
                return Ok(());
            }
        }
        let boxed: Box<dyn Value> = Box::new(value);
        match self.mode {
            Mode::Probe => {
                let slot = &mut self.cells[index];
                let pre = slot.value.replace(boxed).expect("validated above");
                let first = !slot.in_plog;
                slot.in_plog = true;
                if first {
                    self.plog.push((id, pre));
                }
                self.probe_dirty = true;
            }
            Mode::Constraint => {
                let slot = &mut self.cells[index];
                let pre = slot.value.replace(boxed).expect("validated above");
                let first = !slot.in_wlog;
                slot.in_wlog = true;
                if first {
                    self.wlog.push((id, pre));
                }
            }
            Mode::Normal | Mode::Finals => {
                if self.mode == Mode::Finals || self.atomic_depth > 0 {
                    let slot = &mut self.cells[index];
                    let pre = slot.value.replace(boxed).expect("validated above");
                    let first = !slot.in_blog;
                    slot.in_blog = true;
                    if first {
                        self.blog.push((id, pre));
                    }
                } else {
                    self.cells[index].value = Some(boxed);
                    self.schedule_dependents(index);
                    self.run_session()?;
                }
            }
        }
        Ok(())
    }

    // ------------------------------------------------------------------
    // Constraints
    // ------------------------------------------------------------------

    /// Register a constraint and execute it.
    ///
    /// In normal quiescent mode the first execution (and everything it
    /// cascades into) happens before this returns. Inside an atomic block,
    /// a constraint body, or a finalizer the first execution joins the
    /// pending session instead.
    ///
    /// `param` is an arbitrary user value; a [`Comparator::UserParam`]
    /// scheduler orders queued constraints by it.
    pub fn new_constraint<P, F>(&mut self, param: P, body: F) -> Result<ConstraintId, EngineError>
    where
        P: Any,
        F: FnMut(&mut Engine) -> Result<(), EngineError> + 'static,
    {
        if self.mode == Mode::Probe {
            return Err(EngineError::InvalidDuringProbe);
        }
        let boxed_param: Box<dyn Any> = Box::new(param);
        let boxed_body: Box<BodyFn> = Box::new(body);
        let id = match self.free_cons.pop() {
            Some(raw) => {
                let index = raw as usize;
                let rec = &mut self.constraints[index];
                rec.gen = rec.gen.wrapping_add(1);
                rec.alive = true;
                rec.body = Some(boxed_body);
                rec.param = boxed_param;
                rec.last_exec = 0;
                rec.last_session = 0;
                rec.dep_count = 0;
                rec.final_handler = None;
                rec.final_armed = false;
                ConstraintId::new(raw, rec.gen)
            }
            None => {
                let index = self.constraints.len() as u32;
                self.constraints.push(ConsSlot {
                    gen: 0,
                    alive: true,
                    body: Some(boxed_body),
                    param: boxed_param,
                    last_exec: 0,
                    last_session: 0,
                    dep_count: 0,
                    final_handler: None,
                    final_armed: false,
                });
                ConstraintId::new(index, 0)
            }
        };
        self.live_constraints += 1;
        self.enqueue(id);
        if self.mode == Mode::Normal && self.atomic_depth == 0 && !self.in_session {
            // The constraint exists even if the session fails; the error
            // describes the failed propagation, not a failed registration.
            self.run_session()?;
        }
        Ok(id)
    }

    /// Delete a constraint: its queue entry, dependency records, parameter
    /// and finalizer all go away. Values it wrote remain. Deleting the
    /// currently executing constraint is allowed; the removal completes when
    /// its body returns, and writes of that final execution still propagate.
    pub fn del_constraint(&mut self, id: ConstraintId) -> Result<(), EngineError> {
        if self.mode == Mode::Probe {
            return Err(EngineError::InvalidDuringProbe);
        }
        let running = self.current == Some(id);
        {
            let rec = self.constraints.get_mut(id.index()).ok_or(EngineError::InvalidConstraint(id))?;
            if rec.gen != id.gen() || !rec.alive {
                return Err(EngineError::InvalidConstraint(id));
            }
            rec.alive = false;
            if !running {
                rec.body = None;
            }
        }
        if !running {
            self.finish_teardown(id);
        }
        Ok(())
    }

    /// Arm `handler` to run once this session's queue drains. Outside a
    /// session the handler batch runs immediately. Re-arm to run again in a
    /// later session; [`Engine::disarm_final`] cancels a pending handler.
    pub fn arm_final<F>(&mut self, id: ConstraintId, handler: F) -> Result<(), EngineError>
    where
        F: FnMut(&mut Engine) -> Result<(), EngineError> + 'static,
    {
        if self.mode == Mode::Probe {
            return Err(EngineError::InvalidDuringProbe);
        }
        {
            let rec = self.constraints.get_mut(id.index()).ok_or(EngineError::InvalidConstraint(id))?;
            if rec.gen != id.gen() || !rec.alive {
                return Err(EngineError::InvalidConstraint(id));
            }
            rec.final_handler = Some(Box::new(handler));
            if !rec.final_armed {
                rec.final_armed = true;
                self.finals.push(id);
            }
        }
        if self.mode == Mode::Normal && self.atomic_depth == 0 && !self.in_session {
            self.run_session()?;
        }
        Ok(())
    }

    /// Cancel a pending finalizer armed for this session, if any.
    pub fn disarm_final(&mut self, id: ConstraintId) -> Result<(), EngineError> {
        if self.mode == Mode::Probe {
            return Err(EngineError::InvalidDuringProbe);
        }
        let rec = self.constraints.get_mut(id.index()).ok_or(EngineError::InvalidConstraint(id))?;
        if rec.gen != id.gen() || !rec.alive {
            return Err(EngineError::InvalidConstraint(id));
        }
        rec.final_armed = false;
        rec.final_handler = None;
        Ok(())
    }

    // ------------------------------------------------------------------
    // Atomic blocks
    // ------------------------------------------------------------------

    /// Open an atomic block: writes defer until the matching `end_atomic`.
    /// Blocks nest; only the outermost end propagates.
    pub fn begin_atomic(&mut self) -> Result<(), EngineError> {
        if self.mode == Mode::Probe {
            return Err(EngineError::InvalidDuringProbe);
        }
        self.atomic_depth += 1;
        Ok(())
    }

    /// Close an atomic block. Closing the outermost block compares every
    /// written cell against its pre-block value and runs one session over
    /// the actual changes.
    pub fn end_atomic(&mut self) -> Result<(), EngineError> {
        if self.mode == Mode::Probe {
            return Err(EngineError::InvalidDuringProbe);
        }
        if self.atomic_depth == 0 {
            return Err(EngineError::UnbalancedAtomic);
        }
        self.atomic_depth -= 1;
        if self.atomic_depth == 0 && self.mode == Mode::Normal && !self.in_session {
            self.flush_block_log();
            self.run_session()?;
        }
        Ok(())
    }

    /// Run `f` inside an atomic block. The block is closed (and deferred
    /// writes propagate) whether or not `f` succeeds; an error from `f`
    /// takes precedence over an error from the closing propagation.
    pub fn atomic<R>(&mut self, f: impl FnOnce(&mut Self) -> Result<R, EngineError>) -> Result<R, EngineError> {
        self.begin_atomic()?;
        let result = f(self);
        let closed = self.end_atomic();
        match (result, closed) {
            (Ok(v), Ok(())) => Ok(v),
            (Err(e), _) => Err(e),
            (Ok(_), Err(e)) => Err(e),
        }
    }

    // ------------------------------------------------------------------
    // Scheduling and solving
    // ------------------------------------------------------------------

    /// Install the scheduling policy. Only allowed while the engine is
    /// quiescent and the queue is empty.
    pub fn set_comparator(&mut self, comparator: Comparator) -> Result<(), EngineError> {
        if self.mode != Mode::Normal || self.in_session || self.atomic_depth != 0 || !self.queue.is_empty() {
            return Err(EngineError::QueueNotEmpty);
        }
        self.comparator = comparator;
        Ok(())
    }

    /// Per-session execution budget guarding against divergent systems.
    pub fn set_solver_budget(&mut self, budget: u64) {
        self.budget_limit = budget;
    }

    pub fn solver_budget(&self) -> u64 {
        self.budget_limit
    }

    /// Number of constraints currently awaiting execution.
    pub fn queue_len(&self) -> usize {
        self.queue.len()
    }

    /// True when no session is running, no atomic block is open, and the
    /// queue is empty.
    pub fn is_quiescent(&self) -> bool {
        self.mode == Mode::Normal && !self.in_session && self.atomic_depth == 0 && self.queue.is_empty()
    }

    /// The constraint whose body or finalizer is currently on the stack.
    pub fn current_constraint(&self) -> Option<ConstraintId> {
        self.current
    }

    pub fn stats(&self) -> ExecStats {
        self.stats
    }

    pub fn live_cells(&self) -> usize {
        self.live_cells
    }

    pub fn live_constraints(&self) -> usize {
        self.live_constraints
    }

    pub fn is_live_cell(&self, id: CellId) -> bool {
        self.cells
            .get(id.index())
            .map_or(false, |s| s.gen == id.gen() && s.value.is_some())
    }

    pub fn is_live_constraint(&self, id: ConstraintId) -> bool {
        self.constraints
            .get(id.index())
            .map_or(false, |r| r.gen == id.gen() && r.alive)
    }

    /// Constraints whose latest execution read this cell.
    pub fn dependents_of(&self, id: CellId) -> Vec<ConstraintId> {
        match self.cells.get(id.index()) {
            Some(slot) if slot.gen == id.gen() && slot.value.is_some() => slot
                .deps
                .iter()
                .filter(|n| node_is_current(&self.constraints, n))
                .map(|n| n.cons)
                .collect(),
            _ => Vec::new(),
        }
    }

    /// Record executed constraint ids until [`Engine::take_trace`].
    pub fn set_trace(&mut self, enabled: bool) {
        if enabled {
            if self.trace.is_none() {
                self.trace = Some(Vec::new());
            }
        } else {
            self.trace = None;
        }
    }

    /// Drain the execution trace recorded since tracing was enabled.
    pub fn take_trace(&mut self) -> Vec<ConstraintId> {
        match self.trace.as_mut() {
            Some(t) => mem::take(t),
            None => Vec::new(),
        }
    }

    /// Incrementally sweep outdated dependency records. Examines roughly
    /// `limit` records starting where the previous sweep stopped and returns
    /// how many it removed.
    pub fn collect_stale(&mut self, limit: usize) -> usize {
        if self.mode == Mode::Probe {
            return 0;
        }
        let total_cells = self.cells.len();
        if total_cells == 0 || limit == 0 {
            return 0;
        }
        let mut examined = 0usize;
        let mut collected = 0usize;
        let mut visited = 0usize;
        while examined < limit && visited < total_cells {
            if self.gc_cursor >= total_cells {
                self.gc_cursor = 0;
            }
            let index = self.gc_cursor;
            self.gc_cursor += 1;
            visited += 1;
            let Engine { cells, constraints, .. } = self;
            let slot = &mut cells[index];
            if slot.value.is_none() || slot.deps.is_empty() {
                continue;
            }
            examined += slot.deps.len();
            let before = slot.deps.len();
            slot.deps.retain(|n| node_is_current(constraints, n));
            collected += before - slot.deps.len();
        }
        self.stats.stale_collected += collected as u64;
        collected
    }

    /// Re-run every live constraint with all side effects suppressed and
    /// report whether the store is a fixpoint (`true` = no cell would
    /// change).
    ///
    /// Reads log nothing; writes are applied for the duration of the probe
    /// and rolled back before returning; nothing is scheduled and no
    /// statistics move. Structural operations are rejected inside the probe,
    /// so bodies that create or delete constraints when they observe
    /// topology changes must be at their own fixpoint too, which is exactly
    /// the property being checked. Cells allocated by probed bodies are not
    /// reclaimed.
    ///
    /// Captured non-cell state mutated by bodies (caches, mirrors) is not
    /// rolled back either: at a true fixpoint such mutations rewrite the
    /// values already present.
    pub fn check_fixpoint(&mut self) -> Result<bool, EngineError> {
        if self.mode != Mode::Normal || self.in_session || self.atomic_depth != 0 || !self.queue.is_empty() {
            return Err(EngineError::NotQuiescent);
        }
        self.mode = Mode::Probe;
        self.probe_dirty = false;
        let ids: Vec<ConstraintId> = self
            .constraints
            .iter()
            .enumerate()
            .filter(|(_, r)| r.alive)
            .map(|(i, r)| ConstraintId::new(i as u32, r.gen))
            .collect();
        let mut failure = None;
        for id in ids {
            let index = id.index();
            let Some(mut body) = self.constraints[index].body.take() else {
                continue;
            };
            self.current = Some(id);
            let result = body(self);
            self.current = None;
            // The probe rejects structural operations, so the slot is intact.
            self.constraints[index].body = Some(body);
            if let Err(e) = result {
                failure = Some(e);
                break;
            }
        }
        for (id, pre) in mem::take(&mut self.plog) {
            let slot = &mut self.cells[id.index()];
            slot.in_plog = false;
            if slot.gen == id.gen() && slot.value.is_some() {
                slot.value = Some(pre);
            }
        }
        let dirty = self.probe_dirty;
        self.probe_dirty = false;
        self.mode = Mode::Normal;
        match failure {
            Some(e) => Err(e),
            None => Ok(!dirty),
        }
    }

    // ------------------------------------------------------------------
    // Internals
    // ------------------------------------------------------------------

    fn enqueue(&mut self, id: ConstraintId) -> bool {
        let Engine { queue, constraints, comparator, .. } = self;
        let cons: &[ConsSlot] = constraints;
        let stamp = match cons.get(id.index()) {
            Some(r) if r.gen == id.gen() && r.alive => r.last_exec,
            _ => return false,
        };
        let cmp: &Comparator = comparator;
        let mut less = |a: &QueueEntry, b: &QueueEntry| entry_cmp(cmp, cons, a, b) == Ordering::Less;
        queue.enqueue(id, stamp, &mut less)
    }

    fn queue_pop(&mut self) -> Option<ConstraintId> {
        let Engine { queue, constraints, comparator, .. } = self;
        let cons: &[ConsSlot] = constraints;
        let cmp: &Comparator = comparator;
        let mut less = |a: &QueueEntry, b: &QueueEntry| entry_cmp(cmp, cons, a, b) == Ordering::Less;
        queue.pop(&mut less)
    }

    /// Enqueue every constraint whose latest execution read this cell,
    /// discarding outdated dependency records along the way.
    fn schedule_dependents(&mut self, index: usize) {
        let mut to_run: Vec<ConstraintId> = Vec::new();
        let mut collected = 0u64;
        {
            let Engine { cells, constraints, .. } = self;
            let slot = &mut cells[index];
            slot.deps.retain(|node| {
                if node_is_current(constraints, node) {
                    to_run.push(node.cons);
                    true
                } else {
                    collected += 1;
                    false
                }
            });
        }
        self.stats.stale_collected += collected;
        for id in to_run {
            self.enqueue(id);
        }
    }

    /// Drop the remains of a dead constraint and recycle its slot. The
    /// record must already be marked dead and its body dropped.
    fn finish_teardown(&mut self, id: ConstraintId) {
        let index = id.index();
        let freed = {
            let rec = &mut self.constraints[index];
            debug_assert!(!rec.alive);
            let d = rec.dep_count;
            rec.dep_count = 0;
            rec.body = None;
            rec.param = Box::new(());
            rec.final_handler = None;
            rec.final_armed = false;
            d
        };
        self.stats.dependencies_live -= freed;
        self.queue.remove(id);
        self.free_cons.push(index as u32);
        self.live_constraints -= 1;
    }

    /// Compare block-deferred writes against their pre-block values and
    /// schedule the dependents of every cell that actually changed.
    fn flush_block_log(&mut self) {
        for (id, pre) in mem::take(&mut self.blog) {
            let index = id.index();
            let Some(slot) = self.cells.get_mut(index) else { continue };
            slot.in_blog = false;
            let changed = slot.gen == id.gen()
                && slot.value.as_ref().map_or(false, |v| !v.eq_value(pre.as_ref()));
            if changed {
                self.schedule_dependents(index);
            }
        }
    }

    fn run_session(&mut self) -> Result<(), EngineError> {
        if self.in_session {
            return Ok(());
        }
        if self.queue.is_empty() && self.finals.is_empty() {
            return Ok(());
        }
        self.in_session = true;
        self.stats.sessions += 1;
        self.session_id = self.stats.sessions;
        self.session_distinct = 0;
        self.budget_left = self.budget_limit;
        match self.session_loop() {
            Ok(()) => {
                self.stats.distinct_constraints_last_session = self.session_distinct;
                self.in_session = false;
                debug_assert!(self.queue.is_empty() && self.finals.is_empty());
                Ok(())
            }
            Err(e) => {
                self.abort_session();
                Err(e)
            }
        }
    }

    fn session_loop(&mut self) -> Result<(), EngineError> {
        loop {
            while let Some(id) = self.queue_pop() {
                self.execute_one(id)?;
            }
            if self.finals.is_empty() {
                return Ok(());
            }
            self.run_finals_batch()?;
        }
    }

    fn execute_one(&mut self, id: ConstraintId) -> Result<(), EngineError> {
        if self.budget_left == 0 {
            return Err(EngineError::SolverBudgetExceeded(self.budget_limit));
        }
        self.budget_left -= 1;
        self.global_stamp += 1;
        let stamp = self.global_stamp;
        let index = id.index();
        debug_assert!(self.wlog.is_empty());
        let (mut body, old_deps) = {
            let Engine { constraints, session_id, session_distinct, .. } = self;
            let rec = &mut constraints[index];
            debug_assert!(rec.gen == id.gen() && rec.alive);
            let old = rec.dep_count;
            rec.dep_count = 0;
            // Older dependency records now carry a stamp before this one and
            // fall out lazily.
            rec.last_exec = stamp;
            if rec.last_session != *session_id {
                rec.last_session = *session_id;
                *session_distinct += 1;
            }
            (rec.body.take().expect("constraint body missing"), old)
        };
        self.stats.dependencies_live -= old_deps;
        self.stats.constraints_executed += 1;
        if let Some(t) = self.trace.as_mut() {
            t.push(id);
        }
        let saved_depth = self.atomic_depth;
        self.mode = Mode::Constraint;
        self.current = Some(id);
        let result = body(self);
        self.mode = Mode::Normal;
        self.current = None;
        let alive_after = match self.constraints.get_mut(index) {
            Some(rec) if rec.gen == id.gen() => {
                if rec.alive {
                    rec.body = Some(body);
                    true
                } else {
                    false
                }
            }
            _ => false,
        };
        if !alive_after {
            self.finish_teardown(id);
        }
        result?;
        if self.atomic_depth != saved_depth {
            return Err(EngineError::UnbalancedAtomic);
        }
        // Propagate this execution's writes: schedule dependents of every
        // cell whose value differs from when the body first changed it. A
        // self-read cell re-schedules the writer itself.
        for (cid, initial) in mem::take(&mut self.wlog) {
            let cidx = cid.index();
            let Some(slot) = self.cells.get_mut(cidx) else { continue };
            slot.in_wlog = false;
            let changed = slot.gen == cid.gen()
                && slot.value.as_ref().map_or(false, |v| !v.eq_value(initial.as_ref()));
            if changed {
                self.schedule_dependents(cidx);
            }
        }
        Ok(())
    }

    fn run_finals_batch(&mut self) -> Result<(), EngineError> {
        let batch = mem::take(&mut self.finals);
        self.mode = Mode::Finals;
        for id in batch {
            let index = id.index();
            let handler = {
                let Some(rec) = self.constraints.get_mut(index) else { continue };
                if rec.gen != id.gen() || !rec.alive || !rec.final_armed {
                    continue;
                }
                rec.final_armed = false;
                match rec.final_handler.take() {
                    Some(h) => h,
                    None => continue,
                }
            };
            if self.budget_left == 0 {
                self.mode = Mode::Normal;
                return Err(EngineError::SolverBudgetExceeded(self.budget_limit));
            }
            self.budget_left -= 1;
            let saved_depth = self.atomic_depth;
            self.current = Some(id);
            let mut handler = handler;
            let result = handler(self);
            self.current = None;
            let alive_after = match self.constraints.get_mut(index) {
                Some(rec) if rec.gen == id.gen() => {
                    if rec.alive {
                        // Keep the handler for re-arming unless the handler
                        // itself installed a replacement.
                        if rec.final_handler.is_none() {
                            rec.final_handler = Some(handler);
                        }
                        true
                    } else {
                        false
                    }
                }
                _ => false,
            };
            if !alive_after {
                self.finish_teardown(id);
            }
            if let Err(e) = result {
                self.mode = Mode::Normal;
                return Err(e);
            }
            if self.atomic_depth != saved_depth {
                self.mode = Mode::Normal;
                return Err(EngineError::UnbalancedAtomic);
            }
        }
        self.mode = Mode::Normal;
        self.flush_block_log();
        Ok(())
    }

    fn abort_session(&mut self) {
        self.queue.clear();
        for id in mem::take(&mut self.finals) {
            if let Some(rec) = self.constraints.get_mut(id.index()) {
                if rec.gen == id.gen() && rec.alive {
                    rec.final_armed = false;
                }
            }
        }
        for (id, _) in mem::take(&mut self.wlog) {
            if let Some(slot) = self.cells.get_mut(id.index()) {
                slot.in_wlog = false;
            }
        }
        for (id, _) in mem::take(&mut self.blog) {
            if let Some(slot) = self.cells.get_mut(id.index()) {
                slot.in_blog = false;
            }
        }
        self.mode = Mode::Normal;
        self.current = None;
        self.atomic_depth = 0;
        self.stats.distinct_constraints_last_session = self.session_distinct;
        self.in_session = false;
    }
}
