//! Incremental single-source shortest paths.
//!
//! Distances live in one cell per node. In the default *per-node* layout a
//! single constraint per node reads its own distance cell and relaxes the
//! node's outgoing edges, consulting a plain adjacency table and a plain
//! distance mirror for everything else. Because each constraint depends on
//! exactly one cell, a session re-executes precisely the constraints of the
//! nodes whose distance actually changed: the engine does the work of a
//! hand-written worklist algorithm.
//!
//! The *per-edge* layout keeps one constraint per edge that reads the tail
//! distance, the weight cell and the head distance. It is the textbook
//! formulation and handy for semantics tests, but a distance change wakes
//! every incident edge constraint, so it does strictly more work.
//!
//! Inserting an edge or decreasing a weight performs one direct relaxation;
//! the resulting session ripples the improvement through the graph. Weight
//! increases are not supported, and the caller must not introduce negative
//! cycles.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::collections::HashMap;
use std::rc::Rc;

use dataflow_core::{Cell, Comparator, ConstraintId, Engine};

use crate::error::AppError;
use crate::scalar::Weight;

/// Constraint layout of an [`SpGraph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SpVariant {
    /// One constraint per node; scheduling is driven by distance changes
    /// only. The default.
    #[default]
    PerNode,
    /// One constraint per edge, each reading both endpoint distances.
    PerEdge,
}

/// A directed graph with reactive shortest-path distances from a fixed
/// source. Node count and source are fixed at construction; edges arrive
/// through [`SpGraph::insert`] and get cheaper through [`SpGraph::decrease`].
pub struct SpGraph<W: Weight> {
    variant: SpVariant,
    source: usize,
    dist: Rc<Vec<Cell<W>>>,
    /// Per-node constraints (per-node layout only), indexed by node.
    cons: Vec<ConstraintId>,
    weight_cells: HashMap<(usize, usize), Cell<W>>,
    edge_cons: HashMap<(usize, usize), ConstraintId>,
    adj: Rc<RefCell<Vec<Vec<(usize, W)>>>>,
    mirror: Rc<RefCell<Vec<W>>>,
}

impl<W: Weight> SpGraph<W> {
    /// A graph of `n` nodes and no edges, with the default per-node layout.
    pub fn new(eng: &mut Engine, n: usize, source: usize) -> Result<Self, AppError> {
        Self::with_variant(eng, n, source, SpVariant::PerNode)
    }

    pub fn with_variant(
        eng: &mut Engine,
        n: usize,
        source: usize,
        variant: SpVariant,
    ) -> Result<Self, AppError> {
        if source >= n {
            return Err(AppError::UnknownNode(source));
        }
        let mut init = vec![W::infinity(); n];
        init[source] = W::zero();
        let dist: Rc<Vec<Cell<W>>> =
            Rc::new(init.iter().map(|d| eng.alloc_cell(*d)).collect());
        let mirror = Rc::new(RefCell::new(init));
        let adj = Rc::new(RefCell::new(vec![Vec::new(); n]));

        let mut cons = Vec::new();
        if variant == SpVariant::PerNode {
            cons.reserve(n);
            for v in 0..n {
                let dist = dist.clone();
                let adj = adj.clone();
                let mirror = mirror.clone();
                let id = eng.new_constraint(v, move |e| {
                    let dv = e.read(dist[v])?;
                    let degree = adj.borrow()[v].len();
                    for i in 0..degree {
                        let (x, w) = adj.borrow()[v][i];
                        let t = dv.add_weight(w);
                        if t < mirror.borrow()[x] {
                            mirror.borrow_mut()[x] = t;
                            e.write(dist[x], t)?;
                        }
                    }
                    Ok(())
                })?;
                cons.push(id);
            }
        }

        Ok(SpGraph {
            variant,
            source,
            dist,
            cons,
            weight_cells: HashMap::new(),
            edge_cons: HashMap::new(),
            adj,
            mirror,
        })
    }

    pub fn n(&self) -> usize {
        self.dist.len()
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn variant(&self) -> SpVariant {
        self.variant
    }

    pub fn edge_count(&self) -> usize {
        self.weight_cells.len()
    }

    /// All edges as `(from, to, weight)`, in insertion order per node.
    pub fn edges(&self) -> Vec<(usize, usize, W)> {
        let adj = self.adj.borrow();
        let mut out = Vec::with_capacity(self.weight_cells.len());
        for (u, row) in adj.iter().enumerate() {
            for &(v, w) in row {
                out.push((u, v, w));
            }
        }
        out
    }

    /// The current distance of `v` from the source.
    pub fn dist(&self, eng: &mut Engine, v: usize) -> Result<W, AppError> {
        self.check_node(v)?;
        Ok(eng.read(self.dist[v])?)
    }

    /// All current distances, indexed by node.
    pub fn distances(&self, eng: &mut Engine) -> Result<Vec<W>, AppError> {
        (0..self.n()).map(|v| Ok(eng.read(self.dist[v])?)).collect()
    }

    /// The constraint responsible for node `v` (per-node layout).
    pub fn node_constraint(&self, v: usize) -> Option<ConstraintId> {
        self.cons.get(v).copied()
    }

    /// Add the edge `u -> v` with weight `w` and propagate any improvement.
    /// Parallel edges are not supported.
    pub fn insert(&mut self, eng: &mut Engine, u: usize, v: usize, w: W) -> Result<(), AppError> {
        self.check_node(u)?;
        self.check_node(v)?;
        if self.weight_cells.contains_key(&(u, v)) {
            return Err(AppError::EdgeExists(u, v));
        }
        let wcell = eng.alloc_cell(w);
        self.weight_cells.insert((u, v), wcell);
        self.adj.borrow_mut()[u].push((v, w));

        match self.variant {
            SpVariant::PerNode => self.relax(eng, u, v, w),
            SpVariant::PerEdge => {
                let du_cell = self.dist[u];
                let dv_cell = self.dist[v];
                let mirror = self.mirror.clone();
                let id = eng.new_constraint((u, v), move |e| {
                    let du = e.read(du_cell)?;
                    let w = e.read(wcell)?;
                    let dv = e.read(dv_cell)?;
                    let t = du.add_weight(w);
                    if t < dv {
                        mirror.borrow_mut()[v] = t;
                        e.write(dv_cell, t)?;
                    }
                    Ok(())
                })?;
                self.edge_cons.insert((u, v), id);
                Ok(())
            }
        }
    }

    /// Make the edge `u -> v` cheaper by `delta` and propagate.
    pub fn decrease(
        &mut self,
        eng: &mut Engine,
        u: usize,
        v: usize,
        delta: W,
    ) -> Result<(), AppError> {
        if !(delta > W::zero()) {
            return Err(AppError::InvalidDecrease);
        }
        let &wcell = self
            .weight_cells
            .get(&(u, v))
            .ok_or(AppError::UnknownEdge(u, v))?;
        let old = eng.read(wcell)?;
        let new = old - delta;
        for entry in self.adj.borrow_mut()[u].iter_mut() {
            if entry.0 == v {
                entry.1 = new;
            }
        }
        // In the per-edge layout this write re-runs the edge constraint,
        // which relaxes on its own; per-node needs the nudge below.
        eng.write(wcell, new)?;
        match self.variant {
            SpVariant::PerNode => self.relax(eng, u, v, new),
            SpVariant::PerEdge => Ok(()),
        }
    }

    /// A scheduling policy that pops the node with the smallest tentative
    /// distance first, like Dijkstra's algorithm. Meaningful for the
    /// per-node layout, whose constraint parameters are node indexes.
    pub fn min_dist_comparator(&self) -> Comparator {
        let mirror = self.mirror.clone();
        Comparator::UserParam(Rc::new(move |a, b| {
            let (Some(&x), Some(&y)) = (a.downcast_ref::<usize>(), b.downcast_ref::<usize>())
            else {
                return Ordering::Equal;
            };
            let m = mirror.borrow();
            m[x].partial_cmp(&m[y]).unwrap_or(Ordering::Equal)
        }))
    }

    /// One direct relaxation of `u -> v` with weight `w`; any improvement
    /// is written to the distance cell, which starts a session.
    fn relax(&self, eng: &mut Engine, u: usize, v: usize, w: W) -> Result<(), AppError> {
        let du = self.mirror.borrow()[u];
        let t = du.add_weight(w);
        if t < self.mirror.borrow()[v] {
            self.mirror.borrow_mut()[v] = t;
            eng.write(self.dist[v], t)?;
        }
        Ok(())
    }

    fn check_node(&self, v: usize) -> Result<(), AppError> {
        if v < self.n() {
            Ok(())
        } else {
            Err(AppError::UnknownNode(v))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const INF: i64 = i64::MAX;

    fn example(variant: SpVariant) -> (Engine, SpGraph<i64>) {
        let mut eng = Engine::new();
        let mut g = SpGraph::with_variant(&mut eng, 3, 0, variant).unwrap();
        g.insert(&mut eng, 0, 1, 5).unwrap();
        g.insert(&mut eng, 0, 2, 10).unwrap();
        g.insert(&mut eng, 1, 2, 2).unwrap();
        (eng, g)
    }

    #[test]
    fn inserts_propagate_improvements() {
        for variant in [SpVariant::PerNode, SpVariant::PerEdge] {
            let (mut eng, g) = example(variant);
            assert_eq!(g.distances(&mut eng).unwrap(), vec![0, 5, 7]);
        }
    }

    #[test]
    fn decrease_updates_exactly_the_affected_nodes() {
        let (mut eng, mut g) = example(SpVariant::PerNode);
        eng.set_trace(true);
        eng.take_trace();

        g.decrease(&mut eng, 0, 1, 4).unwrap();
        assert_eq!(g.distances(&mut eng).unwrap(), vec![0, 1, 3]);

        // Nodes 1 and 2 changed; only their constraints ran.
        let trace = eng.take_trace();
        let mut nodes: Vec<usize> = trace
            .iter()
            .map(|c| g.cons.iter().position(|k| k == c).unwrap())
            .collect();
        nodes.sort_unstable();
        assert_eq!(nodes, vec![1, 2]);
        assert_eq!(eng.stats().distinct_constraints_last_session, 2);
    }

    #[test]
    fn unreachable_nodes_stay_at_infinity() {
        let mut eng = Engine::new();
        let mut g = SpGraph::<i64>::new(&mut eng, 4, 0).unwrap();
        g.insert(&mut eng, 0, 1, 3).unwrap();
        g.insert(&mut eng, 2, 3, 1).unwrap();
        assert_eq!(g.distances(&mut eng).unwrap(), vec![0, 3, INF, INF]);
    }

    #[test]
    fn ineffective_decreases_run_nothing() {
        let (mut eng, mut g) = example(SpVariant::PerNode);
        let executed = eng.stats().constraints_executed;
        // 0 -> 2 costs 10 but the best path is 7; trimming it to 9 is moot.
        g.decrease(&mut eng, 0, 2, 1).unwrap();
        assert_eq!(g.distances(&mut eng).unwrap(), vec![0, 5, 7]);
        assert_eq!(eng.stats().constraints_executed, executed);
    }

    #[test]
    fn parallel_edges_are_rejected() {
        let (mut eng, mut g) = example(SpVariant::PerNode);
        assert_eq!(
            g.insert(&mut eng, 0, 1, 9).unwrap_err(),
            AppError::EdgeExists(0, 1)
        );
        assert_eq!(
            g.insert(&mut eng, 0, 7, 1).unwrap_err(),
            AppError::UnknownNode(7)
        );
        assert_eq!(
            g.decrease(&mut eng, 2, 0, 1).unwrap_err(),
            AppError::UnknownEdge(2, 0)
        );
        assert_eq!(
            g.decrease(&mut eng, 0, 1, 0).unwrap_err(),
            AppError::InvalidDecrease
        );
    }

    #[test]
    fn both_layouts_agree_and_pass_the_fixpoint_probe() {
        let (mut eng_a, mut a) = example(SpVariant::PerNode);
        let (mut eng_b, mut b) = example(SpVariant::PerEdge);
        a.decrease(&mut eng_a, 0, 1, 4).unwrap();
        b.decrease(&mut eng_b, 0, 1, 4).unwrap();
        assert_eq!(
            a.distances(&mut eng_a).unwrap(),
            b.distances(&mut eng_b).unwrap()
        );
        assert!(eng_a.check_fixpoint().unwrap());
        assert!(eng_b.check_fixpoint().unwrap());
    }

    #[test]
    fn min_dist_comparator_pops_closest_nodes_first() {
        let mut eng = Engine::new();
        let mut g = SpGraph::<i64>::new(&mut eng, 5, 0).unwrap();
        eng.set_comparator(g.min_dist_comparator()).unwrap();
        // A diamond: 0 -> {1, 2} -> 3 -> 4, plus a shortcut 0 -> 3.
        g.insert(&mut eng, 0, 1, 2).unwrap();
        g.insert(&mut eng, 0, 2, 8).unwrap();
        g.insert(&mut eng, 1, 3, 3).unwrap();
        g.insert(&mut eng, 2, 3, 1).unwrap();
        g.insert(&mut eng, 0, 3, 9).unwrap();
        g.insert(&mut eng, 3, 4, 1).unwrap();
        assert_eq!(g.distances(&mut eng).unwrap(), vec![0, 2, 8, 5, 6]);

        eng.set_trace(true);
        g.decrease(&mut eng, 0, 2, 7).unwrap();
        assert_eq!(g.distances(&mut eng).unwrap(), vec![0, 2, 1, 2, 3]);
        let trace = eng.take_trace();
        let nodes: Vec<usize> = trace
            .iter()
            .map(|c| g.cons.iter().position(|k| k == c).unwrap())
            .collect();
        // Each affected node settles once, nearest first.
        assert_eq!(nodes, vec![2, 3, 4]);
    }

    #[test]
    fn float_weights_work() {
        let mut eng = Engine::new();
        let mut g = SpGraph::<f64>::new(&mut eng, 3, 0).unwrap();
        g.insert(&mut eng, 0, 1, 1.5).unwrap();
        g.insert(&mut eng, 1, 2, 2.25).unwrap();
        assert_eq!(g.dist(&mut eng, 2).unwrap(), 3.75);
    }
}
