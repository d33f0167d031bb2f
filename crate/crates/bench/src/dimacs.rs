//! Loader for shortest-path graphs in DIMACS format.
//!
//! The format is line oriented: `c ...` lines are comments, a single
//! `p sp <nodes> <arcs>` line declares the problem size, and each
//! `a <from> <to> <weight>` line adds one directed arc with 1-based node ids.

use std::path::Path;

use crate::report::BenchError;

/// A parsed graph with 0-based node ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DimacsGraph {
    pub nodes: usize,
    /// Directed arcs `(from, to, weight)`; parallel arcs are collapsed to the
    /// lightest one.
    pub edges: Vec<(usize, usize, i64)>,
    /// Human-readable notes about accepted-but-unusual input.
    pub warnings: Vec<String>,
}

/// Parse DIMACS text. Errors carry the 1-based line number.
///
/// Non-positive weights are accepted with a warning. Parallel arcs keep the
/// smallest weight, which leaves shortest-path distances unchanged.
pub fn parse_dimacs(text: &str) -> Result<DimacsGraph, BenchError> {
    let err = |line: usize, msg: String| BenchError::Parse { line, msg };
    let mut nodes: Option<usize> = None;
    let mut declared_arcs = 0usize;
    let mut edges: Vec<(usize, usize, i64)> = Vec::new();
    let mut warnings = Vec::new();
    let mut seen = std::collections::HashMap::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let mut fields = raw.split_whitespace();
        let Some(tag) = fields.next() else { continue };
        match tag {
            "c" => continue,
            "p" => {
                if nodes.is_some() {
                    return Err(err(line, "duplicate problem line".into()));
                }
                if fields.next() != Some("sp") {
                    return Err(err(line, "expected `p sp <nodes> <arcs>`".into()));
                }
                let n: usize = fields
                    .next()
                    .and_then(|f| f.parse().ok())
                    .ok_or_else(|| err(line, "bad node count".into()))?;
                declared_arcs = fields
                    .next()
                    .and_then(|f| f.parse().ok())
                    .ok_or_else(|| err(line, "bad arc count".into()))?;
                if fields.next().is_some() {
                    return Err(err(line, "trailing fields on problem line".into()));
                }
                if n == 0 {
                    return Err(err(line, "graph must have at least one node".into()));
                }
                nodes = Some(n);
            }
            "a" => {
                let n = nodes.ok_or_else(|| err(line, "arc before problem line".into()))?;
                let mut field = |name: &str| -> Result<i64, BenchError> {
                    fields
                        .next()
                        .and_then(|f| f.parse().ok())
                        .ok_or_else(|| err(line, format!("bad {name}")))
                };
                let from = field("arc source")?;
                let to = field("arc target")?;
                let weight = field("arc weight")?;
                if fields.next().is_some() {
                    return Err(err(line, "trailing fields on arc line".into()));
                }
                for (name, id) in [("source", from), ("target", to)] {
                    if id < 1 || id as usize > n {
                        return Err(err(line, format!("arc {name} {id} out of range 1..={n}")));
                    }
                }
                if weight <= 0 {
                    warnings.push(format!(
                        "line {line}: non-positive weight {weight} on arc {from} -> {to}"
                    ));
                }
                let key = (from as usize - 1, to as usize - 1);
                match seen.entry(key) {
                    std::collections::hash_map::Entry::Vacant(slot) => {
                        slot.insert(edges.len());
                        edges.push((key.0, key.1, weight));
                    }
                    std::collections::hash_map::Entry::Occupied(slot) => {
                        let existing = &mut edges[*slot.get()];
                        if weight < existing.2 {
                            existing.2 = weight;
                        }
                        warnings.push(format!(
                            "line {line}: parallel arc {from} -> {to} collapsed to min weight"
                        ));
                    }
                }
            }
            other => return Err(err(line, format!("unknown line tag `{other}`"))),
        }
    }

    let nodes = nodes.ok_or_else(|| err(text.lines().count().max(1), "missing problem line".into()))?;
    if edges.len() != declared_arcs {
        warnings.push(format!(
            "problem line declared {declared_arcs} arcs but {} were kept",
            edges.len()
        ));
    }
    Ok(DimacsGraph { nodes, edges, warnings })
}

/// Read and parse a DIMACS file from disk.
pub fn load_dimacs(path: &Path) -> Result<DimacsGraph, BenchError> {
    let text = std::fs::read_to_string(path)?;
    parse_dimacs(&text)
}
