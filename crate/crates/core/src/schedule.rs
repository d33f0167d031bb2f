//! The deduplicating schedule queue and its pick policies.
//!
//! The queue holds constraints awaiting (re-)execution. Membership is
//! deduplicated: enqueueing an id already present is a no-op. Priorities are
//! decided by a caller-supplied ordering at every heap operation, which lets
//! the engine plug in different policies without rebuilding the queue.
//!
//! Removal is lazy: `remove` only drops the id from the membership set, and
//! `pop` skips heap entries whose id is no longer a member. With a
//! user-supplied ordering whose inputs mutate while entries sit in the heap,
//! the heap property can go stale; `pop` then returns a best-effort minimum.
//! Correctness of the engine never depends on pop order, only completeness.

use std::any::Any;
use std::cmp::Ordering;
use std::collections::HashSet;
use std::fmt;
use std::rc::Rc;

use crate::ids::ConstraintId;

/// Ordering used by [`ScheduleQueue::pop`] to pick the next constraint.
#[derive(Clone, Default)]
pub enum Comparator {
    /// Run the least recently executed constraint first; never-executed
    /// constraints come before everything else. This is the default.
    #[default]
    LeastRecentlyExecuted,
    /// Run the most recently enqueued constraint first (stack discipline).
    Lifo,
    /// Order by the constraints' user parameters. The function receives the
    /// parameters of two queued constraints and decides which runs first
    /// (`Less` means higher priority). Ties fall back to ascending id.
    UserParam(Rc<dyn Fn(&dyn Any, &dyn Any) -> Ordering>),
}

impl fmt::Debug for Comparator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Comparator::LeastRecentlyExecuted => f.write_str("LeastRecentlyExecuted"),
            Comparator::Lifo => f.write_str("Lifo"),
            Comparator::UserParam(_) => f.write_str("UserParam(..)"),
        }
    }
}

/// Snapshot stored per queued constraint.
#[derive(Clone, Copy, Debug)]
pub struct QueueEntry {
    /// The queued constraint.
    pub id: ConstraintId,
    /// The constraint's last-execution stamp at enqueue time (0 if it has
    /// never run). Frozen while queued: a queued constraint cannot execute.
    pub stamp: u64,
    /// Monotonic enqueue sequence number, unique per entry.
    pub seq: u64,
}

/// Binary-heap priority queue over constraints with membership dedup.
#[derive(Default)]
pub struct ScheduleQueue {
    heap: Vec<QueueEntry>,
    members: HashSet<ConstraintId>,
    next_seq: u64,
}

/// Ordering callback: `true` when `a` should pop before `b`.
pub type Less<'a> = dyn FnMut(&QueueEntry, &QueueEntry) -> bool + 'a;

impl ScheduleQueue {
    pub fn new() -> Self {
        Self::default()
    }

    /// Number of queued (live) constraints.
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, id: ConstraintId) -> bool {
        self.members.contains(&id)
    }

    /// Insert `id` unless already queued. Returns true if newly inserted.
    pub fn enqueue(&mut self, id: ConstraintId, stamp: u64, less: &mut Less<'_>) -> bool {
        if !self.members.insert(id) {
            return false;
        }
        let entry = QueueEntry { id, stamp, seq: self.next_seq };
        self.next_seq += 1;
        self.heap.push(entry);
        self.sift_up(self.heap.len() - 1, less);
        true
    }

    /// Remove the minimal member under `less`, skipping entries removed
    /// since they were pushed.
    pub fn pop(&mut self, less: &mut Less<'_>) -> Option<ConstraintId> {
        while !self.heap.is_empty() {
            let entry = self.heap.swap_remove(0);
            if !self.heap.is_empty() {
                self.sift_down(0, less);
            }
            if self.members.remove(&entry.id) {
                return Some(entry.id);
            }
        }
        None
    }

    /// Drop `id` from the queue. The heap entry is discarded lazily on a
    /// later pop. Returns true if it was queued.
    pub fn remove(&mut self, id: ConstraintId) -> bool {
        self.members.remove(&id)
    }

    pub fn clear(&mut self) {
        self.heap.clear();
        self.members.clear();
    }

    fn sift_up(&mut self, mut i: usize, less: &mut Less<'_>) {
        while i > 0 {
            let parent = (i - 1) / 2;
            if less(&self.heap[i], &self.heap[parent]) {
                self.heap.swap(i, parent);
                i = parent;
            } else {
                break;
            }
        }
    }

    fn sift_down(&mut self, mut i: usize, less: &mut Less<'_>) {
        let len = self.heap.len();
        loop {
            let left = 2 * i + 1;
            let right = left + 1;
            let mut min = i;
            if left < len && less(&self.heap[left], &self.heap[min]) {
                min = left;
            }
            if right < len && less(&self.heap[right], &self.heap[min]) {
                min = right;
            }
            if min == i {
                break;
            }
            self.heap.swap(i, min);
            i = min;
        }
    }
}
