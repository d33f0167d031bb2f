//! Shortest-path workload: weight decreases against a fresh Dijkstra run.
//!
//! The harness mirrors every applied edge operation in plain host memory,
//! so verification recomputes distances from first principles and also
//! checks the quiescence invariants: no edge can relax further and every
//! finite distance is witnessed by an incoming edge. Under the min-dist
//! scheduler it additionally checks that each session executes exactly the
//! constraints of nodes whose distance actually changed.

use std::collections::HashSet;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use dataflow_apps::SpGraph;
use dataflow_core::{Comparator, Engine};

use crate::driver::Workload;
use crate::oracle;
use crate::report::{BenchError, Scheduler};

pub struct SpHarness {
    eng: Engine,
    graph: SpGraph<i64>,
    /// Host-side truth for the oracle: every live edge with its current
    /// weight.
    edges: Vec<(usize, usize, i64)>,
    source: usize,
    /// Compare per-session distinct executions with changed distances.
    check_counts: bool,
    count_failure: Option<String>,
}

impl SpHarness {
    /// Random graph: `n` nodes, `10 * n` distinct directed edges with
    /// weights in `1..=1000`, rooted at node 0.
    pub fn random(n: usize, scheduler: Scheduler, rng: &mut ChaCha8Rng) -> Result<Self, BenchError> {
        if n < 2 {
            return Err(BenchError::InvalidSpec("sp needs at least two nodes".into()));
        }
        let target = (10 * n).min(n * (n - 1));
        let mut seen = HashSet::with_capacity(target);
        let mut edges = Vec::with_capacity(target);
        while edges.len() < target {
            let u = rng.gen_range(0..n);
            let v = rng.gen_range(0..n);
            if u != v && seen.insert((u, v)) {
                edges.push((u, v, rng.gen_range(1..=1_000i64)));
            }
        }
        Self::from_edges(n, &edges, 0, scheduler)
    }

    /// Build from an explicit edge list (for example a parsed DIMACS file).
    pub fn from_edges(
        n: usize,
        edges: &[(usize, usize, i64)],
        source: usize,
        scheduler: Scheduler,
    ) -> Result<Self, BenchError> {
        let mut eng = Engine::new();
        let mut graph = SpGraph::new(&mut eng, n, source)?;
        let comparator = match scheduler {
            Scheduler::Lru => Comparator::LeastRecentlyExecuted,
            Scheduler::Lifo => Comparator::Lifo,
            Scheduler::MinDist => graph.min_dist_comparator(),
        };
        eng.set_comparator(comparator)?;
        for &(u, v, w) in edges {
            graph.insert(&mut eng, u, v, w)?;
        }
        Ok(SpHarness {
            eng,
            graph,
            edges: edges.to_vec(),
            source,
            check_counts: scheduler == Scheduler::MinDist,
            count_failure: None,
        })
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn distances(&mut self) -> Result<Vec<i64>, BenchError> {
        let g = &self.graph;
        Ok(g.distances(&mut self.eng)?)
    }

    /// Decrease one random edge's weight (keeping it positive) and return
    /// how many distances changed. Edges already at weight 1 are left
    /// alone, so some updates may be no-ops on saturated graphs.
    pub fn decrease_random(&mut self, rng: &mut ChaCha8Rng) -> Result<usize, BenchError> {
        let pick = (0..16)
            .map(|_| rng.gen_range(0..self.edges.len()))
            .find(|&i| self.edges[i].2 >= 2);
        let Some(idx) = pick else { return Ok(0) };
        let (u, v, w) = self.edges[idx];
        let delta = rng.gen_range(1..w);

        let before = self.graph.distances(&mut self.eng)?;
        let executed_before = self.eng.stats().constraints_executed;
        self.graph.decrease(&mut self.eng, u, v, delta)?;
        self.edges[idx].2 = w - delta;
        let after = self.graph.distances(&mut self.eng)?;
        let changed = before.iter().zip(&after).filter(|(a, b)| a != b).count();

        if self.check_counts && self.count_failure.is_none() {
            // An ineffective decrease runs no session at all, so the
            // last-session stat would be leftovers; check the execution
            // counter instead.
            let executed = (self.eng.stats().constraints_executed - executed_before) as usize;
            let distinct = self.eng.stats().distinct_constraints_last_session as usize;
            if changed == 0 && executed != 0 {
                self.count_failure = Some(format!(
                    "decrease of edge {u} -> {v}: no distance changed but \
                     {executed} constraints executed"
                ));
            } else if changed > 0 && distinct != changed {
                self.count_failure = Some(format!(
                    "decrease of edge {u} -> {v}: {changed} distances changed but \
                     {distinct} distinct constraints executed"
                ));
            }
        }
        Ok(changed)
    }
}

impl Workload for SpHarness {
    fn engine(&mut self) -> &mut Engine {
        &mut self.eng
    }

    fn apply_batch(&mut self, count: usize, rng: &mut ChaCha8Rng) -> Result<(), BenchError> {
        for _ in 0..count {
            self.decrease_random(rng)?;
        }
        Ok(())
    }

    fn verify(&mut self) -> Result<(), String> {
        let dist = self
            .distances()
            .map_err(|e| format!("engine error during verification: {e}"))?;
        let expected = oracle::dijkstra(self.n(), &self.edges, self.source);
        let n = self.n();
        for v in 0..n {
            if dist[v] != expected[v] {
                return Err(format!("index {v}: expected {}, got {}", expected[v], dist[v]));
            }
        }
        oracle::check_shortest_path_invariants(n, &self.edges, self.source, &dist)?;
        match self.count_failure.take() {
            Some(detail) => Err(detail),
            None => Ok(()),
        }
    }
}
