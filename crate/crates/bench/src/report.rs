//! Benchmark descriptions and result reporting.

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use dataflow_apps::AppError;
use dataflow_core::EngineError;

/// The workloads the harness knows how to drive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum BenchName {
    /// Running sum of a list, one delta constraint per node.
    Adder,
    /// Keep the even values of a list.
    Filter,
    /// Keep every other node of a list.
    Halver,
    /// Apply `3x + 1` to every value of a list.
    Mapper,
    /// Merge two sorted lists into one sorted sequence.
    Merger,
    /// Mergesort a list through a balanced merge tree.
    Msorter,
    /// Maintain the reversal of a list as a second list.
    Reverser,
    /// Partition a list by sign into two sequences.
    Splitter,
    /// Evaluate an expression tree of sums and products.
    Exptrees,
    /// Single-source shortest paths under weight decreases.
    Sp,
    /// Vector-matrix product maintained blockwise.
    Vecmat,
}

impl BenchName {
    pub fn as_str(self) -> &'static str {
        match self {
            BenchName::Adder => "adder",
            BenchName::Filter => "filter",
            BenchName::Halver => "halver",
            BenchName::Mapper => "mapper",
            BenchName::Merger => "merger",
            BenchName::Msorter => "msorter",
            BenchName::Reverser => "reverser",
            BenchName::Splitter => "splitter",
            BenchName::Exptrees => "exptrees",
            BenchName::Sp => "sp",
            BenchName::Vecmat => "vecmat",
        }
    }
}

/// Queue policy used while draining constraint sessions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Scheduler {
    /// Least recently executed constraint first (the default).
    Lru,
    /// Most recently enqueued constraint first.
    Lifo,
    /// Smallest tentative distance first; only meaningful for `sp`.
    MinDist,
}

impl Scheduler {
    pub fn as_str(self) -> &'static str {
        match self {
            Scheduler::Lru => "lru",
            Scheduler::Lifo => "lifo",
            Scheduler::MinDist => "min-dist",
        }
    }
}

/// How updates are drawn while driving a benchmark.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum UpdateMix {
    /// Half value changes, half structural changes, uniform positions.
    #[default]
    Mixed,
    /// Value changes only, uniform positions.
    ValueOnly,
    /// Value changes only, distinct positions within each batch, and every
    /// write is guaranteed to change the stored value.
    ValueOnlyDistinct,
}

/// Everything needed to reproduce one benchmark run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkSpec {
    pub name: BenchName,
    /// Input size: list length, tree node count, graph node count, or total
    /// matrix entries for `vecmat`.
    pub n: usize,
    /// Number of updates to apply after the initial build.
    pub updates: usize,
    /// Updates grouped per atomic block; 1 means one session per update.
    pub batch: usize,
    pub seed: u64,
    pub scheduler: Scheduler,
    /// Compare against the from-scratch oracle after every batch.
    pub verify: bool,
    /// How updates are drawn; the CLI always uses `Mixed`.
    #[serde(default)]
    pub mix: UpdateMix,
}

impl BenchmarkSpec {
    pub fn new(name: BenchName, n: usize) -> Self {
        BenchmarkSpec {
            name,
            n,
            updates: 500,
            batch: 1,
            seed: 42,
            scheduler: Scheduler::Lru,
            verify: true,
            mix: UpdateMix::Mixed,
        }
    }
}

/// Aggregated measurements for one benchmark run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    /// Time to build the reactive structure from scratch, in milliseconds.
    pub from_scratch_ms: f64,
    /// Mean wall-clock time per update, in milliseconds.
    pub avg_propagation_ms: f64,
    /// Mean constraint executions per update.
    pub avg_constraints_per_update: f64,
    /// Mean distinct constraints executed per session, per update.
    pub distinct_constraints_per_update: f64,
    /// Largest number of live dependency edges observed.
    pub peak_live_dependencies: u64,
    /// True when verification was requested and every check passed.
    pub verified: bool,
}

/// Output encoding for reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

/// CSV column names, in emission order.
pub const CSV_HEADER: &str =
    "name,n,updates,from_scratch_ms,avg_propagation_ms,avg_cons,distinct_cons,verified";

/// Render a finished run in the requested format.
///
/// CSV output is a header line followed by one data line. JSON output is a
/// single object with `spec` and `report` members so a run can be
/// reproduced from its own output.
pub fn emit_report(spec: &BenchmarkSpec, report: &BenchReport, format: OutputFormat) -> String {
    match format {
        OutputFormat::Csv => {
            format!(
                "{CSV_HEADER}\n{},{},{},{:.4},{:.6},{:.4},{:.4},{}",
                spec.name.as_str(),
                spec.n,
                spec.updates,
                report.from_scratch_ms,
                report.avg_propagation_ms,
                report.avg_constraints_per_update,
                report.distinct_constraints_per_update,
                report.verified,
            )
        }
        OutputFormat::Json => {
            let value = serde_json::json!({ "spec": spec, "report": report });
            serde_json::to_string_pretty(&value).expect("report serialization cannot fail")
        }
    }
}

/// Errors surfaced by the harness.
#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("invalid benchmark spec: {0}")]
    InvalidSpec(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("verification failed at update {update}: {detail}")]
    VerificationFailed { update: usize, detail: String },
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    App(#[from] AppError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
