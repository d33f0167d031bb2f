//! From-scratch oracles for every benchmark.
//!
//! Each function recomputes the expected output directly from plain input
//! values, without touching the reactive engine, so the incremental results
//! can be checked against an independent implementation.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

/// The mapper's per-element function.
pub fn map_fn(x: i64) -> i64 {
    3 * x + 1
}

/// The filter's keep predicate.
pub fn filter_keep(x: i64) -> bool {
    x % 2 == 0
}

/// The splitter's routing predicate: `true` goes to the first output.
pub fn split_keep(x: i64) -> bool {
    x >= 0
}

pub fn map_oracle(xs: &[i64]) -> Vec<i64> {
    xs.iter().map(|&x| map_fn(x)).collect()
}

pub fn filter_oracle(xs: &[i64]) -> Vec<i64> {
    xs.iter().copied().filter(|&x| filter_keep(x)).collect()
}

/// Every other element, starting with the first.
pub fn halve_oracle(xs: &[i64]) -> Vec<i64> {
    xs.iter().copied().step_by(2).collect()
}

pub fn split_oracle(xs: &[i64]) -> (Vec<i64>, Vec<i64>) {
    xs.iter().copied().partition(|&x| split_keep(x))
}

pub fn reverse_oracle(xs: &[i64]) -> Vec<i64> {
    xs.iter().rev().copied().collect()
}

pub fn sum_oracle(xs: &[i64]) -> i64 {
    xs.iter().sum()
}

/// Stable two-pointer merge of two sorted slices.
pub fn merge_oracle(a: &[i64], b: &[i64]) -> Vec<i64> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        if a[i] <= b[j] {
            out.push(a[i]);
            i += 1;
        } else {
            out.push(b[j]);
            j += 1;
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

pub fn sort_oracle(xs: &[i64]) -> Vec<i64> {
    let mut out = xs.to_vec();
    out.sort_unstable();
    out
}

/// Plain vector-matrix product: `out[j] = sum_i vec[i] * mat[i][j]` where
/// `mat` is row-major `dim x dim`.
pub fn vecmat_oracle(vec: &[i64], mat: &[i64], dim: usize) -> Vec<i64> {
    let mut out = vec![0i64; dim];
    for (i, &v) in vec.iter().enumerate() {
        for (j, slot) in out.iter_mut().enumerate() {
            *slot += v * mat[i * dim + j];
        }
    }
    out
}

/// Single-source shortest path distances by Dijkstra's algorithm with a
/// binary heap. Unreachable nodes get `i64::MAX`. Weights must be
/// non-negative.
pub fn dijkstra(nodes: usize, edges: &[(usize, usize, i64)], source: usize) -> Vec<i64> {
    let mut adj = vec![Vec::new(); nodes];
    for &(u, v, w) in edges {
        adj[u].push((v, w));
    }
    let mut dist = vec![i64::MAX; nodes];
    dist[source] = 0;
    let mut heap = BinaryHeap::new();
    heap.push(Reverse((0i64, source)));
    while let Some(Reverse((d, u))) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        for &(v, w) in &adj[u] {
            let candidate = d + w;
            if candidate < dist[v] {
                dist[v] = candidate;
                heap.push(Reverse((candidate, v)));
            }
        }
    }
    dist
}

/// Check the two quiescence conditions of a shortest-path solution:
/// no edge can relax any further, and every finite distance other than the
/// source's is witnessed by an incoming edge that realizes it.
pub fn check_shortest_path_invariants(
    nodes: usize,
    edges: &[(usize, usize, i64)],
    source: usize,
    dist: &[i64],
) -> Result<(), String> {
    if dist.len() != nodes {
        return Err(format!("expected {nodes} distances, got {}", dist.len()));
    }
    if dist[source] != 0 {
        return Err(format!("source distance is {}, not 0", dist[source]));
    }
    for &(u, v, w) in edges {
        if dist[u] != i64::MAX && dist[u] + w < dist[v] {
            return Err(format!(
                "edge {u} -> {v} (weight {w}) relaxes {} below {}",
                dist[u] + w,
                dist[v]
            ));
        }
    }
    let mut witnessed = vec![false; nodes];
    witnessed[source] = true;
    for &(u, v, w) in edges {
        if dist[u] != i64::MAX && dist[v] != i64::MAX && dist[u] + w == dist[v] {
            witnessed[v] = true;
        }
    }
    for (v, &d) in dist.iter().enumerate() {
        if d != i64::MAX && !witnessed[v] {
            return Err(format!("distance {d} at node {v} is realized by no path"));
        }
    }
    Ok(())
}
