//! Reactive list workloads.
//!
//! Every list benchmark watches one (or, for the merger, two) linked lists
//! of `i64` values and maintains a derived output while the driver applies
//! value changes, insertions and removals at uniformly random positions.
//! Outputs are kept per node where the computation allows it, so a single
//! value change touches a constant number of constraints:
//!
//! * `adder` keeps a per-node last-seen value and adjusts one shared
//!   accumulator cell by the difference,
//! * `mapper`, `filter`, `halver` and `splitter` keep one output cell per
//!   input node (absent values are tombstoned as `None`),
//! * `reverser` maintains a second linked list in reversed order,
//! * `merger` re-merges two sorted lists with a single constraint,
//! * `msorter` parks each node's value in a slot cell and sorts the slots
//!   through a balanced merge tree of list-merge constraints.

use std::collections::HashMap;
use std::rc::Rc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use dataflow_apps::{build_list, collect_values, ListNode, WatchHooks, Watcher};
use dataflow_core::{Cell, Comparator, Engine, EngineError};

use crate::driver::Workload;
use crate::oracle;
use crate::report::{BenchError, BenchName, Scheduler, UpdateMix};

type Node = ListNode<i64>;

const VAL_RANGE: std::ops::RangeInclusive<i64> = -1_000_000..=1_000_000;

/// One watched input list plus host-side bookkeeping used only to pick
/// update positions; verification always walks the reactive cells.
struct InputList {
    head: Cell<Option<Node>>,
    nodes: Vec<Node>,
    vals: Vec<i64>,
}

enum Op {
    Value { pos: usize, val: i64 },
    Insert { pos: usize, val: i64 },
    Remove { pos: usize },
}

fn apply_op(
    eng: &mut Engine,
    list: &mut InputList,
    op: Op,
    doomed: &mut Vec<Node>,
) -> Result<(), EngineError> {
    match op {
        Op::Value { pos, val } => {
            eng.write(list.nodes[pos].val, val)?;
            list.vals[pos] = val;
        }
        Op::Insert { pos, val } => {
            let node = Node::alloc(eng, val);
            eng.write(node.next, list.nodes.get(pos).copied())?;
            if pos == 0 {
                eng.write(list.head, Some(node))?;
            } else {
                eng.write(list.nodes[pos - 1].next, Some(node))?;
            }
            list.nodes.insert(pos, node);
            list.vals.insert(pos, val);
        }
        Op::Remove { pos } => {
            let node = list.nodes.remove(pos);
            list.vals.remove(pos);
            let succ = list.nodes.get(pos).copied();
            if pos == 0 {
                eng.write(list.head, succ)?;
            } else {
                eng.write(list.nodes[pos - 1].next, succ)?;
            }
            doomed.push(node);
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Hooks
// ---------------------------------------------------------------------------

#[derive(Default)]
struct MapperHooks {
    outs: HashMap<Node, Cell<i64>>,
}

impl WatchHooks<Node> for MapperHooks {
    fn watch(&mut self, e: &mut Engine, _prev: Option<Node>, node: Node) -> Result<(), EngineError> {
        let v = e.read(node.val)?;
        let out = *self.outs.entry(node).or_insert_with(|| e.alloc_cell(0i64));
        e.write(out, oracle::map_fn(v))
    }

    fn detach(&mut self, e: &mut Engine, node: Node) -> Result<(), EngineError> {
        match self.outs.remove(&node) {
            Some(out) => e.free_cell(out),
            None => Ok(()),
        }
    }
}

#[derive(Default)]
struct FilterHooks {
    outs: HashMap<Node, Cell<Option<i64>>>,
}

impl WatchHooks<Node> for FilterHooks {
    fn watch(&mut self, e: &mut Engine, _prev: Option<Node>, node: Node) -> Result<(), EngineError> {
        let v = e.read(node.val)?;
        let out = *self.outs.entry(node).or_insert_with(|| e.alloc_cell(None));
        e.write(out, oracle::filter_keep(v).then_some(v))
    }

    fn detach(&mut self, e: &mut Engine, node: Node) -> Result<(), EngineError> {
        match self.outs.remove(&node) {
            Some(out) => e.free_cell(out),
            None => Ok(()),
        }
    }
}

#[derive(Default)]
struct SplitterHooks {
    kept: HashMap<Node, Cell<Option<i64>>>,
    dropped: HashMap<Node, Cell<Option<i64>>>,
}

impl WatchHooks<Node> for SplitterHooks {
    fn watch(&mut self, e: &mut Engine, _prev: Option<Node>, node: Node) -> Result<(), EngineError> {
        let v = e.read(node.val)?;
        let keep = oracle::split_keep(v);
        let a = *self.kept.entry(node).or_insert_with(|| e.alloc_cell(None));
        let b = *self.dropped.entry(node).or_insert_with(|| e.alloc_cell(None));
        e.write(a, keep.then_some(v))?;
        e.write(b, (!keep).then_some(v))
    }

    fn detach(&mut self, e: &mut Engine, node: Node) -> Result<(), EngineError> {
        if let Some(out) = self.kept.remove(&node) {
            e.free_cell(out)?;
        }
        match self.dropped.remove(&node) {
            Some(out) => e.free_cell(out),
            None => Ok(()),
        }
    }
}

/// Keep every other node. Each node carries a reactive parity bit derived
/// from its predecessor's, so structural edits re-settle exactly the
/// suffix whose parity actually flips.
#[derive(Default)]
struct HalverHooks {
    parity: HashMap<Node, Cell<bool>>,
    outs: HashMap<Node, Cell<Option<i64>>>,
}

impl WatchHooks<Node> for HalverHooks {
    fn watch(&mut self, e: &mut Engine, prev: Option<Node>, node: Node) -> Result<(), EngineError> {
        let v = e.read(node.val)?;
        let keep = match prev {
            None => true,
            Some(p) => {
                let pc = *self.parity.get(&p).expect("predecessor parity exists");
                !e.read(pc)?
            }
        };
        let pc = *self.parity.entry(node).or_insert_with(|| e.alloc_cell(true));
        e.write(pc, keep)?;
        let out = *self.outs.entry(node).or_insert_with(|| e.alloc_cell(None));
        e.write(out, keep.then_some(v))
    }

    fn detach(&mut self, e: &mut Engine, node: Node) -> Result<(), EngineError> {
        if let Some(c) = self.parity.remove(&node) {
            e.free_cell(c)?;
        }
        match self.outs.remove(&node) {
            Some(out) => e.free_cell(out),
            None => Ok(()),
        }
    }
}

/// Running sum with one delta constraint per node: each visit adjusts the
/// shared accumulator by `new - old`, without ever reading it.
struct AdderHooks {
    acc: Cell<i64>,
    total: i64,
    last: HashMap<Node, i64>,
}

impl WatchHooks<Node> for AdderHooks {
    fn watch(&mut self, e: &mut Engine, _prev: Option<Node>, node: Node) -> Result<(), EngineError> {
        let v = e.read(node.val)?;
        let last = self.last.entry(node).or_insert(0);
        if v != *last {
            self.total += v - *last;
            *last = v;
            e.write(self.acc, self.total)?;
        }
        Ok(())
    }

    fn detach(&mut self, e: &mut Engine, node: Node) -> Result<(), EngineError> {
        if let Some(old) = self.last.remove(&node) {
            if old != 0 {
                self.total -= old;
                e.write(self.acc, self.total)?;
            }
        }
        Ok(())
    }
}

/// Maintain a second list holding the input in reverse: each input node
/// owns an output node whose `next` points at the *predecessor's* output,
/// and the input's last node publishes the output head.
struct ReverserHooks {
    outs: HashMap<Node, Node>,
    out_head: Cell<Option<Node>>,
}

impl WatchHooks<Node> for ReverserHooks {
    fn watch(&mut self, e: &mut Engine, prev: Option<Node>, node: Node) -> Result<(), EngineError> {
        let v = e.read(node.val)?;
        let out = *self.outs.entry(node).or_insert_with(|| Node::alloc(e, 0));
        e.write(out.val, v)?;
        let rev_next = prev.map(|p| *self.outs.get(&p).expect("predecessor output exists"));
        e.write(out.next, rev_next)?;
        if e.read(node.next)?.is_none() {
            e.write(self.out_head, Some(out))?;
        }
        Ok(())
    }

    fn head(&mut self, e: &mut Engine, first: Option<Node>) -> Result<(), EngineError> {
        if first.is_none() {
            e.write(self.out_head, None::<Node>)?;
        }
        Ok(())
    }

    fn detach(&mut self, e: &mut Engine, node: Node) -> Result<(), EngineError> {
        match self.outs.remove(&node) {
            Some(out) => out.free(e),
            None => Ok(()),
        }
    }
}

/// Park each node's value in a slot cell feeding the msorter's merge tree.
/// Slot order is irrelevant; the tree sorts whatever is present.
struct SlotHooks {
    slots: Rc<Vec<Cell<Option<i64>>>>,
    slot_of: HashMap<Node, usize>,
    free: Vec<usize>,
}

impl WatchHooks<Node> for SlotHooks {
    fn watch(&mut self, e: &mut Engine, _prev: Option<Node>, node: Node) -> Result<(), EngineError> {
        let v = e.read(node.val)?;
        let idx = match self.slot_of.get(&node) {
            Some(&idx) => idx,
            None => {
                let idx = self.free.pop().expect("slot capacity covers all inserts");
                self.slot_of.insert(node, idx);
                idx
            }
        };
        e.write(self.slots[idx], Some(v))
    }

    fn detach(&mut self, e: &mut Engine, node: Node) -> Result<(), EngineError> {
        if let Some(idx) = self.slot_of.remove(&node) {
            self.free.push(idx);
            e.write(self.slots[idx], None)?;
        }
        Ok(())
    }
}

fn merge_sorted(a: &[i64], b: &[i64]) -> Vec<i64> {
    oracle::merge_oracle(a, b)
}

/// Balanced merge tree over the slot cells; returns the root output cell.
/// `slots.len()` must be a power of two.
fn build_merge_tree(
    eng: &mut Engine,
    slots: &[Cell<Option<i64>>],
) -> Result<Cell<Vec<i64>>, EngineError> {
    let mut level: Vec<Cell<Vec<i64>>> = Vec::with_capacity(slots.len() / 2);
    for pair in slots.chunks(2) {
        let (a, b) = (pair[0], pair[1]);
        let out = eng.alloc_cell(Vec::<i64>::new());
        eng.new_constraint((), move |e| {
            let mut v = Vec::with_capacity(2);
            if let Some(x) = e.read(a)? {
                v.push(x);
            }
            if let Some(y) = e.read(b)? {
                v.push(y);
            }
            if v.len() == 2 && v[0] > v[1] {
                v.swap(0, 1);
            }
            e.write(out, v)
        })?;
        level.push(out);
    }
    while level.len() > 1 {
        let mut next = Vec::with_capacity(level.len() / 2);
        for pair in level.chunks(2) {
            let (a, b) = (pair[0], pair[1]);
            let out = eng.alloc_cell(Vec::<i64>::new());
            eng.new_constraint((), move |e| {
                let av = e.read(a)?;
                let bv = e.read(b)?;
                e.write(out, merge_sorted(&av, &bv))
            })?;
            next.push(out);
        }
        level = next;
    }
    Ok(level[0])
}

// ---------------------------------------------------------------------------
// Harness
// ---------------------------------------------------------------------------

enum App {
    Adder { w: Watcher<Node, AdderHooks>, acc: Cell<i64> },
    Filter { w: Watcher<Node, FilterHooks> },
    Halver { w: Watcher<Node, HalverHooks> },
    Mapper { w: Watcher<Node, MapperHooks> },
    Merger { out: Cell<Vec<i64>> },
    Msorter { w: Watcher<Node, SlotHooks>, root: Cell<Vec<i64>> },
    Reverser { w: Watcher<Node, ReverserHooks>, out_head: Cell<Option<Node>> },
    Splitter { w: Watcher<Node, SplitterHooks> },
}

impl App {
    /// Live shadow count of the attached watcher; the merger has none.
    fn shadow_count(&self) -> Option<usize> {
        match self {
            App::Adder { w, .. } => Some(w.shadow_count()),
            App::Filter { w } => Some(w.shadow_count()),
            App::Halver { w } => Some(w.shadow_count()),
            App::Mapper { w } => Some(w.shadow_count()),
            App::Merger { .. } => None,
            App::Msorter { w, .. } => Some(w.shadow_count()),
            App::Reverser { w, .. } => Some(w.shadow_count()),
            App::Splitter { w } => Some(w.shadow_count()),
        }
    }
}

pub struct ListHarness {
    eng: Engine,
    inputs: Vec<InputList>,
    app: App,
    mix: UpdateMix,
}

impl ListHarness {
    /// Build the benchmark over `n` random input values (split across two
    /// sorted lists for the merger). `updates` sizes the msorter's slot
    /// pool; other benchmarks ignore it.
    pub fn build(
        kind: BenchName,
        n: usize,
        updates: usize,
        scheduler: Scheduler,
        mix: UpdateMix,
        rng: &mut ChaCha8Rng,
    ) -> Result<Self, BenchError> {
        let mut eng = Engine::new();
        let comparator = match scheduler {
            Scheduler::Lru => Comparator::LeastRecentlyExecuted,
            Scheduler::Lifo => Comparator::Lifo,
            Scheduler::MinDist => {
                return Err(BenchError::InvalidSpec(
                    "the min-dist scheduler only applies to the sp benchmark".into(),
                ))
            }
        };
        eng.set_comparator(comparator)?;

        let mut make_input = |eng: &mut Engine, count: usize, sorted: bool| {
            let mut vals: Vec<i64> = (0..count).map(|_| rng.gen_range(VAL_RANGE)).collect();
            if sorted {
                vals.sort_unstable();
            }
            build_list(eng, &vals).map(|(head, nodes)| InputList { head, nodes, vals })
        };

        let (inputs, app) = match kind {
            BenchName::Merger => {
                let first = make_input(&mut eng, n / 2, true)?;
                let second = make_input(&mut eng, n - n / 2, true)?;
                let out = eng.alloc_cell(Vec::<i64>::new());
                let (h1, h2) = (first.head, second.head);
                eng.new_constraint((), move |e| {
                    let a = read_list(e, h1)?;
                    let b = read_list(e, h2)?;
                    e.write(out, merge_sorted(&a, &b))
                })?;
                (vec![first, second], App::Merger { out })
            }
            BenchName::Msorter => {
                let input = make_input(&mut eng, n, false)?;
                let cap = (n + updates + 1).next_power_of_two().max(2);
                let slots: Rc<Vec<Cell<Option<i64>>>> = Rc::new(
                    (0..cap)
                        .map(|i| eng.alloc_cell(input.vals.get(i).copied()))
                        .collect(),
                );
                let root = build_merge_tree(&mut eng, &slots)?;
                let slot_of = input
                    .nodes
                    .iter()
                    .enumerate()
                    .map(|(i, &node)| (node, i))
                    .collect();
                let free = (n..cap).rev().collect();
                let hooks = SlotHooks { slots: slots.clone(), slot_of, free };
                let w = Watcher::attach(&mut eng, input.head, hooks)?;
                (vec![input], App::Msorter { w, root })
            }
            other => {
                let input = make_input(&mut eng, n, false)?;
                let head = input.head;
                let app = match other {
                    BenchName::Adder => {
                        let acc = eng.alloc_cell(0i64);
                        let hooks = AdderHooks { acc, total: 0, last: HashMap::new() };
                        App::Adder { w: Watcher::attach(&mut eng, head, hooks)?, acc }
                    }
                    BenchName::Filter => App::Filter {
                        w: Watcher::attach(&mut eng, head, FilterHooks::default())?,
                    },
                    BenchName::Halver => App::Halver {
                        w: Watcher::attach(&mut eng, head, HalverHooks::default())?,
                    },
                    BenchName::Mapper => App::Mapper {
                        w: Watcher::attach(&mut eng, head, MapperHooks::default())?,
                    },
                    BenchName::Reverser => {
                        let out_head = eng.alloc_cell(None::<Node>);
                        let hooks = ReverserHooks { outs: HashMap::new(), out_head };
                        App::Reverser { w: Watcher::attach(&mut eng, head, hooks)?, out_head }
                    }
                    BenchName::Splitter => App::Splitter {
                        w: Watcher::attach(&mut eng, head, SplitterHooks::default())?,
                    },
                    _ => {
                        return Err(BenchError::InvalidSpec(format!(
                            "{} is not a list benchmark",
                            other.as_str()
                        )))
                    }
                };
                (vec![input], app)
            }
        };
        Ok(ListHarness { eng, inputs, app, mix })
    }

    /// The current values of each input list, in list order.
    pub fn input_snapshot(&mut self) -> Result<Vec<Vec<i64>>, BenchError> {
        self.inputs
            .iter()
            .map(|l| Ok(collect_values(&mut self.eng, l.head, |n: Node| n.val)?))
            .collect()
    }

    /// The maintained output as one flat sequence: the mapped, filtered,
    /// halved, merged, sorted, or reversed values, the adder's single sum,
    /// or the splitter's kept values followed by its dropped values.
    pub fn output_snapshot(&mut self) -> Result<Vec<i64>, BenchError> {
        let nodes = list_nodes(&mut self.eng, self.inputs[0].head)?;
        let eng = &mut self.eng;
        match &self.app {
            App::Adder { acc, .. } => Ok(vec![eng.read(*acc)?]),
            App::Filter { w } => {
                let hooks = w.hooks();
                let guard = hooks.borrow();
                collect_present(eng, &nodes, &guard.outs)
            }
            App::Halver { w } => {
                let hooks = w.hooks();
                let guard = hooks.borrow();
                collect_present(eng, &nodes, &guard.outs)
            }
            App::Mapper { w } => {
                let hooks = w.hooks();
                let guard = hooks.borrow();
                nodes
                    .iter()
                    .map(|node| {
                        let cell = *guard.outs.get(node).expect("watcher lost an output cell");
                        Ok(eng.read(cell)?)
                    })
                    .collect()
            }
            App::Merger { out } => Ok(eng.read(*out)?),
            App::Msorter { root, .. } => Ok(eng.read(*root)?),
            App::Reverser { out_head, .. } => {
                Ok(collect_values(eng, *out_head, |n: Node| n.val)?)
            }
            App::Splitter { w } => {
                let hooks = w.hooks();
                let guard = hooks.borrow();
                let mut kept = collect_present(eng, &nodes, &guard.kept)?;
                kept.extend(collect_present(eng, &nodes, &guard.dropped)?);
                Ok(kept)
            }
        }
    }

    fn verify_inner(&mut self) -> Result<(), String> {
        let err = |e: BenchError| format!("engine error during verification: {e}");
        let inputs = self.input_snapshot().map_err(err)?;
        let nodes = list_nodes(&mut self.eng, self.inputs[0].head)
            .map_err(|e| format!("engine error during verification: {e}"))?;
        if let Some(count) = self.app.shadow_count() {
            check_shadows(count, nodes.len())?;
        }
        let expected = match &self.app {
            App::Adder { .. } => vec![oracle::sum_oracle(&inputs[0])],
            App::Filter { .. } => oracle::filter_oracle(&inputs[0]),
            App::Halver { .. } => oracle::halve_oracle(&inputs[0]),
            App::Mapper { .. } => oracle::map_oracle(&inputs[0]),
            App::Merger { .. } => oracle::merge_oracle(&inputs[0], &inputs[1]),
            App::Msorter { .. } => oracle::sort_oracle(&inputs[0]),
            App::Reverser { .. } => oracle::reverse_oracle(&inputs[0]),
            App::Splitter { .. } => {
                let (mut kept, dropped) = oracle::split_oracle(&inputs[0]);
                kept.extend(dropped);
                kept
            }
        };
        let actual = self.output_snapshot().map_err(err)?;
        diff(&expected, &actual)
    }
}

/// Read the live (non-tombstoned) outputs for `nodes`, in list order.
fn collect_present(
    eng: &mut Engine,
    nodes: &[Node],
    outs: &HashMap<Node, Cell<Option<i64>>>,
) -> Result<Vec<i64>, BenchError> {
    let mut values = Vec::new();
    for node in nodes {
        let cell = *outs.get(node).expect("watcher lost an output cell");
        if let Some(v) = eng.read(cell)? {
            values.push(v);
        }
    }
    Ok(values)
}

impl Workload for ListHarness {
    fn engine(&mut self) -> &mut Engine {
        &mut self.eng
    }

    fn apply_batch(&mut self, count: usize, rng: &mut ChaCha8Rng) -> Result<(), BenchError> {
        let mut doomed = Vec::new();
        // Pre-draw distinct positions (and deltas guaranteeing a change)
        // when the mix calls for them; the list length is stable then.
        let planned: Option<Vec<Op>> = match self.mix {
            UpdateMix::ValueOnlyDistinct => {
                let list = &self.inputs[0];
                let len = list.vals.len();
                let picks = rand::seq::index::sample(rng, len, count.min(len));
                Some(
                    picks
                        .iter()
                        .map(|pos| Op::Value {
                            pos,
                            val: list.vals[pos] + 1 + rng.gen_range(0..1_000),
                        })
                        .collect(),
                )
            }
            _ => None,
        };
        let ops_left = planned.as_ref().map_or(count, |p| p.len());
        let mut planned = planned.map(Vec::into_iter);

        let inputs = &mut self.inputs;
        let app = &self.app;
        let mix = self.mix;
        self.eng.atomic(|e| {
            for _ in 0..ops_left {
                let (li, op) = match planned.as_mut().and_then(Iterator::next) {
                    Some(op) => (0, op),
                    None => gen_op_for(inputs, app, mix, rng),
                };
                apply_op(e, &mut inputs[li], op, &mut doomed)?;
            }
            Ok(())
        })?;
        for node in doomed {
            node.free(&mut self.eng)?;
        }
        Ok(())
    }

    fn verify(&mut self) -> Result<(), String> {
        self.verify_inner()
    }
}

/// Free-function twin of [`ListHarness::gen_op`] usable while the engine is
/// mutably borrowed by an atomic block.
fn gen_op_for(
    inputs: &[InputList],
    app: &App,
    mix: UpdateMix,
    rng: &mut ChaCha8Rng,
) -> (usize, Op) {
    let li = if inputs.len() == 2 { rng.gen_range(0..2) } else { 0 };
    let sorted = matches!(app, App::Merger { .. });
    let vals = &inputs[li].vals;
    let len = vals.len();
    if len == 0 {
        return (li, Op::Insert { pos: 0, val: rng.gen_range(VAL_RANGE) });
    }
    let structural = mix == UpdateMix::Mixed && rng.gen_bool(0.5);
    let op = if structural {
        if rng.gen_bool(0.5) {
            let pos = rng.gen_range(0..=len);
            let val = if sorted {
                let lo = if pos > 0 { vals[pos - 1] } else { vals[0] - 1_000 };
                let hi = if pos < len { vals[pos] } else { lo + 1_000 };
                rng.gen_range(lo..=hi)
            } else {
                rng.gen_range(VAL_RANGE)
            };
            Op::Insert { pos, val }
        } else {
            Op::Remove { pos: rng.gen_range(0..len) }
        }
    } else {
        let pos = rng.gen_range(0..len);
        let val = if sorted {
            let lo = if pos > 0 { vals[pos - 1] } else { vals[pos] - 1_000 };
            let hi = if pos + 1 < len { vals[pos + 1] } else { vals[pos] + 1_000 };
            rng.gen_range(lo..=hi)
        } else {
            rng.gen_range(VAL_RANGE)
        };
        Op::Value { pos, val }
    };
    (li, op)
}

fn list_nodes(eng: &mut Engine, head: Cell<Option<Node>>) -> Result<Vec<Node>, EngineError> {
    let mut out = Vec::new();
    let mut cur = eng.read(head)?;
    while let Some(n) = cur {
        out.push(n);
        cur = eng.read(n.next)?;
    }
    Ok(out)
}

fn read_list(e: &mut Engine, head: Cell<Option<Node>>) -> Result<Vec<i64>, EngineError> {
    let mut out = Vec::new();
    let mut cur = e.read(head)?;
    while let Some(n) = cur {
        out.push(e.read(n.val)?);
        cur = e.read(n.next)?;
    }
    Ok(out)
}

fn check_shadows(shadow_count: usize, node_count: usize) -> Result<(), String> {
    if shadow_count != node_count + 1 {
        return Err(format!(
            "expected {} shadows for {node_count} nodes, found {shadow_count}",
            node_count + 1
        ));
    }
    Ok(())
}

/// Compare against the oracle, reporting the first mismatching index.
fn diff(expected: &[i64], actual: &[i64]) -> Result<(), String> {
    let common = expected.len().min(actual.len());
    for i in 0..common {
        if expected[i] != actual[i] {
            return Err(format!(
                "index {i}: expected {}, got {}",
                expected[i], actual[i]
            ));
        }
    }
    if expected.len() != actual.len() {
        return Err(format!(
            "index {common}: expected length {}, got length {}",
            expected.len(),
            actual.len()
        ));
    }
    Ok(())
}
