//! Randomized end-to-end checks for the application gallery. Every result
//! is validated against an independent from-scratch computation: recursive
//! re-evaluation for trees, Bellman-Ford for shortest paths, a plain
//! product for the vector-matrix structure, and mirrored host containers
//! for the list hooks.

use std::collections::HashMap;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use dataflow_apps::{
    build_dl_list, build_list, AppError, ExpNode, ExpTree, ListNode, Op, Repairer, Side, SpGraph,
    SpVariant, TreeSpec, VecMatProduct, WatchHooks, Watcher,
};
use dataflow_core::{Cell, Comparator, Engine, EngineError};

// ---------------------------------------------------------------------
// Expression trees
// ---------------------------------------------------------------------

fn random_spec(rng: &mut ChaCha8Rng, depth: usize) -> TreeSpec<i64> {
    if depth == 0 {
        TreeSpec::leaf(rng.gen_range(-3..=3))
    } else {
        let op = if rng.gen_bool(0.5) { Op::Sum } else { Op::Prod };
        TreeSpec::node(op, random_spec(rng, depth - 1), random_spec(rng, depth - 1))
    }
}

/// Re-evaluate from the leaves up, reading only leaf value cells and the
/// tree shape; cached internal values are never consulted.
fn eval_node(eng: &mut Engine, tree: &ExpTree<i64>, node: ExpNode<i64>) -> i64 {
    match tree.children(eng, node).unwrap() {
        None => tree.value(eng, node).unwrap(),
        Some((l, r)) => {
            let lv = eval_node(eng, tree, l);
            let rv = eval_node(eng, tree, r);
            match tree.op(eng, node).unwrap() {
                Op::Sum => lv + rv,
                Op::Prod => lv * rv,
            }
        }
    }
}

fn internal_nodes(eng: &mut Engine, tree: &ExpTree<i64>) -> Vec<ExpNode<i64>> {
    let mut out = Vec::new();
    let mut stack = vec![tree.root()];
    while let Some(n) = stack.pop() {
        if let Some((l, r)) = tree.children(eng, n).unwrap() {
            out.push(n);
            stack.push(l);
            stack.push(r);
        }
    }
    out
}

#[test]
fn exptree_random_edits_match_reevaluation() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut eng = Engine::new();
    let mut tree = ExpTree::build(&mut eng, &random_spec(&mut rng, 5)).unwrap();
    assert_eq!(
        tree.root_value(&mut eng).unwrap(),
        eval_node(&mut eng, &tree, tree.root())
    );

    for _ in 0..60 {
        let roll: f64 = rng.gen();
        if roll < 0.5 {
            let leaves = tree.leaves(&mut eng).unwrap();
            let leaf = leaves[rng.gen_range(0..leaves.len())];
            tree.set_leaf(&mut eng, leaf, rng.gen_range(-3..=3)).unwrap();
        } else if roll < 0.8 {
            let internals = internal_nodes(&mut eng, &tree);
            let node = internals[rng.gen_range(0..internals.len())];
            let op = if rng.gen_bool(0.5) { Op::Sum } else { Op::Prod };
            tree.set_op(&mut eng, node, op).unwrap();
        } else {
            // Replace a random child with a fresh subtree, then reclaim
            // the detached old child.
            let internals = internal_nodes(&mut eng, &tree);
            let parent = internals[rng.gen_range(0..internals.len())];
            let side = if rng.gen_bool(0.5) { Side::Left } else { Side::Right };
            let (l, r) = tree.children(&mut eng, parent).unwrap().unwrap();
            let old = match side {
                Side::Left => l,
                Side::Right => r,
            };
            let sub = tree.grow(&mut eng, &random_spec(&mut rng, 2)).unwrap();
            tree.splice(&mut eng, parent, side, sub).unwrap();
            tree.delete_subtree(&mut eng, old).unwrap();
        }
        assert!(eng.is_quiescent());
        assert_eq!(
            tree.root_value(&mut eng).unwrap(),
            eval_node(&mut eng, &tree, tree.root())
        );
    }
    assert!(eng.check_fixpoint().unwrap());
}

// ---------------------------------------------------------------------
// Shortest paths
// ---------------------------------------------------------------------

fn bellman_ford(n: usize, source: usize, edges: &[(usize, usize, i64)]) -> Vec<i64> {
    let mut d = vec![i64::MAX; n];
    d[source] = 0;
    loop {
        let mut changed = false;
        for &(u, v, w) in edges {
            if d[u] != i64::MAX && d[u] + w < d[v] {
                d[v] = d[u] + w;
                changed = true;
            }
        }
        if !changed {
            return d;
        }
    }
}

fn random_edge_list(rng: &mut ChaCha8Rng, n: usize, m: usize) -> Vec<(usize, usize, i64)> {
    let mut seen = std::collections::HashSet::new();
    let mut edges = Vec::with_capacity(m);
    while edges.len() < m {
        let u = rng.gen_range(0..n);
        let v = rng.gen_range(0..n);
        if u == v || !seen.insert((u, v)) {
            continue;
        }
        edges.push((u, v, rng.gen_range(1..=100i64)));
    }
    edges
}

#[test]
fn sp_decreases_match_bellman_ford_and_count_changed_nodes() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let n = 50;
    let edges = random_edge_list(&mut rng, n, 200);

    let mut eng = Engine::new();
    let mut g = SpGraph::<i64>::new(&mut eng, n, 0).unwrap();
    let mut weights: HashMap<(usize, usize), i64> = HashMap::new();
    for &(u, v, w) in &edges {
        g.insert(&mut eng, u, v, w).unwrap();
        weights.insert((u, v), w);
    }

    let current = |weights: &HashMap<(usize, usize), i64>| {
        weights.iter().map(|(&(u, v), &w)| (u, v, w)).collect::<Vec<_>>()
    };
    assert_eq!(g.distances(&mut eng).unwrap(), bellman_ford(n, 0, &current(&weights)));

    for _ in 0..40 {
        let (&(u, v), &w) = weights.iter().choose(&mut rng).unwrap();
        if w < 2 {
            continue;
        }
        let delta = rng.gen_range(1..w);
        let before = g.distances(&mut eng).unwrap();
        let executed_before = eng.stats().constraints_executed;

        g.decrease(&mut eng, u, v, delta).unwrap();
        weights.insert((u, v), w - delta);

        let after = g.distances(&mut eng).unwrap();
        assert_eq!(after, bellman_ford(n, 0, &current(&weights)));
        assert!(eng.is_quiescent());

        let changed = before.iter().zip(&after).filter(|(b, a)| b != a).count();
        if changed == 0 {
            assert_eq!(eng.stats().constraints_executed, executed_before);
        } else {
            assert_eq!(
                eng.stats().distinct_constraints_last_session as usize,
                changed
            );
        }
    }
    assert!(eng.check_fixpoint().unwrap());
}

#[test]
fn sp_distances_agree_across_layouts_and_schedulers() {
    let mut rng = ChaCha8Rng::seed_from_u64(37);
    let n = 40;
    let edges = random_edge_list(&mut rng, n, 160);
    let updates: Vec<usize> = (0..25).map(|_| rng.gen_range(0..edges.len())).collect();

    // Run the same scenario under four setups and collect the distance
    // history of each.
    let mut histories: Vec<Vec<Vec<i64>>> = Vec::new();
    for setup in 0..4 {
        let mut eng = Engine::new();
        let variant = if setup == 3 { SpVariant::PerEdge } else { SpVariant::PerNode };
        let mut g = SpGraph::<i64>::with_variant(&mut eng, n, 0, variant).unwrap();
        match setup {
            1 => eng.set_comparator(Comparator::Lifo).unwrap(),
            2 => eng.set_comparator(g.min_dist_comparator()).unwrap(),
            _ => {}
        }
        let mut weights: HashMap<(usize, usize), i64> = HashMap::new();
        for &(u, v, w) in &edges {
            g.insert(&mut eng, u, v, w).unwrap();
            weights.insert((u, v), w);
        }
        let mut history = Vec::new();
        history.push(g.distances(&mut eng).unwrap());
        for &e in &updates {
            let (u, v, _) = edges[e];
            let w = weights[&(u, v)];
            if w < 2 {
                continue;
            }
            let delta = 1 + (w / 3);
            g.decrease(&mut eng, u, v, delta).unwrap();
            weights.insert((u, v), w - delta);
            history.push(g.distances(&mut eng).unwrap());
        }
        histories.push(history);
    }
    assert_eq!(histories[0], histories[1]);
    assert_eq!(histories[0], histories[2]);
    assert_eq!(histories[0], histories[3]);
}

// ---------------------------------------------------------------------
// List watchers
// ---------------------------------------------------------------------

/// A mapper: every watched node gets an output cell holding `10 * value`.
#[derive(Default)]
struct MapHook {
    outs: HashMap<ListNode<i64>, Cell<i64>>,
    detaches: usize,
}

impl WatchHooks<ListNode<i64>> for MapHook {
    fn watch(
        &mut self,
        e: &mut Engine,
        _prev: Option<ListNode<i64>>,
        node: ListNode<i64>,
    ) -> Result<(), EngineError> {
        let v = e.read(node.val)?;
        let out = *self.outs.entry(node).or_insert_with(|| e.alloc_cell(0i64));
        e.write(out, v * 10)
    }

    fn detach(&mut self, e: &mut Engine, node: ListNode<i64>) -> Result<(), EngineError> {
        self.detaches += 1;
        if let Some(c) = self.outs.remove(&node) {
            e.free_cell(c)?;
        }
        Ok(())
    }
}

fn mapped_outputs(
    eng: &mut Engine,
    head: Cell<Option<ListNode<i64>>>,
    outs: &HashMap<ListNode<i64>, Cell<i64>>,
) -> Vec<i64> {
    let mut got = Vec::new();
    let mut cur = eng.read(head).unwrap();
    while let Some(node) = cur {
        got.push(eng.read(outs[&node]).unwrap());
        cur = eng.read(node.next).unwrap();
    }
    got
}

#[test]
fn watcher_mapper_tracks_values_and_structure() {
    let mut eng = Engine::new();
    let (head, mut nodes) = build_list(&mut eng, &[1i64, 2, 3, 4, 5]).unwrap();
    let w = Watcher::attach(&mut eng, head, MapHook::default()).unwrap();
    let hooks = w.hooks();

    let expect = |nodes: &Vec<ListNode<i64>>, eng: &mut Engine| {
        nodes
            .iter()
            .map(|n| eng.read(n.val).unwrap() * 10)
            .collect::<Vec<_>>()
    };

    assert_eq!(w.shadow_count(), 6);
    let want = expect(&nodes, &mut eng);
    assert_eq!(mapped_outputs(&mut eng, head, &hooks.borrow().outs), want);

    // Value update.
    eng.write(nodes[2].val, 30).unwrap();
    let want = expect(&nodes, &mut eng);
    assert_eq!(mapped_outputs(&mut eng, head, &hooks.borrow().outs), want);

    // Unlink a node: its output cell is reclaimed.
    let gone = nodes.remove(1);
    eng.write(nodes[0].next, Some(nodes[1])).unwrap();
    assert_eq!(w.shadow_count(), 5);
    assert_eq!(hooks.borrow().detaches, 1);
    assert!(!hooks.borrow().outs.contains_key(&gone));
    let want = expect(&nodes, &mut eng);
    assert_eq!(mapped_outputs(&mut eng, head, &hooks.borrow().outs), want);

    // Insert a fresh node after the head.
    let new = ListNode::alloc(&mut eng, 99);
    let succ = eng.read(nodes[0].next).unwrap();
    eng.write(new.next, succ).unwrap();
    eng.write(nodes[0].next, Some(new)).unwrap();
    nodes.insert(1, new);
    assert_eq!(w.shadow_count(), 6);
    let want = expect(&nodes, &mut eng);
    assert_eq!(mapped_outputs(&mut eng, head, &hooks.borrow().outs), want);

    // Reverse the list in one atomic step: everything stays reachable, so
    // no shadow is torn down and no output cell is reallocated.
    let detaches_before = hooks.borrow().detaches;
    eng.atomic(|e| {
        e.write(head, Some(*nodes.last().unwrap()))?;
        for pair in nodes.windows(2) {
            e.write(pair[1].next, Some(pair[0]))?;
        }
        e.write(nodes[0].next, None::<ListNode<i64>>)
    })
    .unwrap();
    nodes.reverse();
    assert_eq!(w.shadow_count(), 6);
    assert_eq!(hooks.borrow().detaches, detaches_before);
    let want = expect(&nodes, &mut eng);
    assert_eq!(mapped_outputs(&mut eng, head, &hooks.borrow().outs), want);

    assert!(eng.is_quiescent());
    assert!(eng.check_fixpoint().unwrap());
}

#[test]
fn repairer_withstands_random_corruption() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let mut eng = Engine::new();
    let values: Vec<i64> = (0..30).collect();
    let (head, mut nodes) = build_dl_list(&mut eng, &values).unwrap();
    let w = Watcher::attach(&mut eng, head, Repairer).unwrap();
    assert_eq!(w.shadow_count(), nodes.len() + 1);

    for step in 0..50 {
        if step % 10 == 9 && nodes.len() > 2 {
            // Occasionally unlink a node; back links must follow suit.
            let i = rng.gen_range(1..nodes.len() - 1);
            let gone = nodes.remove(i);
            eng.write(nodes[i - 1].next, Some(nodes[i])).unwrap();
            let _ = gone;
        } else {
            // Corrupt a random back link with a random wrong value.
            let i = rng.gen_range(1..nodes.len());
            let junk = if rng.gen_bool(0.3) {
                None
            } else {
                Some(nodes[rng.gen_range(0..nodes.len())])
            };
            if junk == Some(nodes[i - 1]) {
                continue;
            }
            eng.write(nodes[i].prev, junk).unwrap();
        }

        assert!(eng.is_quiescent());
        assert_eq!(w.shadow_count(), nodes.len() + 1);
        for x in &nodes {
            if let Some(succ) = eng.read(x.next).unwrap() {
                assert_eq!(eng.read(succ.prev).unwrap(), Some(*x));
            }
        }
    }
    assert!(eng.check_fixpoint().unwrap());
}

// ---------------------------------------------------------------------
// Vector-matrix product
// ---------------------------------------------------------------------

#[test]
fn vecmat_random_updates_match_plain_product() {
    let mut rng = ChaCha8Rng::seed_from_u64(53);
    let n = 12;
    for block in [1usize, 3, 12] {
        let mut v: Vec<i64> = (0..n).map(|_| rng.gen_range(-9..=9)).collect();
        let mut m: Vec<Vec<i64>> = (0..n)
            .map(|_| (0..n).map(|_| rng.gen_range(-9..=9)).collect())
            .collect();

        let mut eng = Engine::new();
        let p = VecMatProduct::build(&mut eng, &v, &m, block).unwrap();

        let product = |v: &Vec<i64>, m: &Vec<Vec<i64>>| {
            (0..n)
                .map(|j| (0..n).map(|i| v[i] * m[i][j]).sum::<i64>())
                .collect::<Vec<i64>>()
        };
        assert_eq!(p.output(&mut eng).unwrap(), product(&v, &m));

        for _ in 0..60 {
            let roll: f64 = rng.gen();
            let executed_before = eng.stats().constraints_executed;
            if roll < 0.6 {
                let (i, j) = (rng.gen_range(0..n), rng.gen_range(0..n));
                let val = m[i][j] + rng.gen_range(1..=5);
                p.set_cell(&mut eng, i, j, val).unwrap();
                m[i][j] = val;
                assert_eq!(eng.stats().constraints_executed - executed_before, 1);
            } else if roll < 0.8 {
                let i = rng.gen_range(0..n);
                let val = v[i] + rng.gen_range(1..=5);
                p.set_vec(&mut eng, i, val).unwrap();
                v[i] = val;
                assert_eq!(eng.stats().constraints_executed - executed_before, n as u64);
            } else {
                let j = rng.gen_range(0..n);
                let col: Vec<i64> = (0..n).map(|i| m[i][j] + rng.gen_range(1..=5)).collect();
                p.set_column(&mut eng, j, &col).unwrap();
                for i in 0..n {
                    m[i][j] = col[i];
                }
                assert_eq!(
                    eng.stats().constraints_executed - executed_before,
                    p.blocks_per_column() as u64
                );
            }
            assert_eq!(p.output(&mut eng).unwrap(), product(&v, &m));
            assert!(eng.is_quiescent());
        }
        assert!(eng.check_fixpoint().unwrap());
    }
}

// ---------------------------------------------------------------------
// Error surface
// ---------------------------------------------------------------------

#[test]
fn engine_errors_pass_through_app_error() {
    let mut eng = Engine::new();
    let g = SpGraph::<i64>::new(&mut eng, 2, 0).unwrap();
    let err = g.dist(&mut eng, 5).unwrap_err();
    assert_eq!(err, AppError::UnknownNode(5));

    let cell = eng.alloc_cell(1i64);
    eng.free_cell(cell).unwrap();
    let tree = ExpTree::build(&mut eng, &TreeSpec::leaf(1i64)).unwrap();
    let bogus: ExpNode<i64> = tree.root();
    drop(tree);
    // Reading through a freed cell surfaces the engine error unchanged.
    let res: Result<i64, EngineError> = eng.read(cell);
    assert!(matches!(res, Err(EngineError::InvalidCell(_))));
    let _ = bogus;
}
