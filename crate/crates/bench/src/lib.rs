//! Benchmark harness for the dataflow constraint engine.
//!
//! Every workload pairs a reactive structure from `dataflow-apps` with an
//! independent from-scratch oracle: linked-list pipelines (map, filter,
//! halve, split, reverse, sum, merge, mergesort), expression trees,
//! single-source shortest paths, and a blockwise vector-matrix product.
//! [`run_benchmark`] builds the structure, replays seeded random updates,
//! measures propagation against rebuild cost, and (optionally) verifies
//! after every session that outputs match the oracle, the queue is empty,
//! and a side-effect-suppressed re-run of all constraints changes nothing.

pub mod circuit;
pub mod dimacs;
pub mod driver;
pub mod lists;
pub mod oracle;
pub mod report;
pub mod spbench;
pub mod trees;
pub mod vecbench;

use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use dataflow_core::ConstraintId;

pub use circuit::Circuit;
pub use dimacs::{load_dimacs, parse_dimacs, DimacsGraph};
pub use driver::{drive, TrialStats, Workload};
pub use lists::ListHarness;
pub use report::{
    emit_report, BenchError, BenchName, BenchReport, BenchmarkSpec, OutputFormat, Scheduler,
    UpdateMix, CSV_HEADER,
};
pub use spbench::SpHarness;
pub use trees::TreeHarness;
pub use vecbench::VecMatHarness;

/// Trials averaged per report unless the caller overrides.
pub const DEFAULT_TRIALS: usize = 3;

fn validate(spec: &BenchmarkSpec) -> Result<(), BenchError> {
    if spec.n < 1 {
        return Err(BenchError::InvalidSpec("n must be at least 1".into()));
    }
    if spec.batch < 1 {
        return Err(BenchError::InvalidSpec("batch must be at least 1".into()));
    }
    if spec.scheduler == Scheduler::MinDist && spec.name != BenchName::Sp {
        return Err(BenchError::InvalidSpec(
            "the min-dist scheduler only applies to the sp benchmark".into(),
        ));
    }
    Ok(())
}

struct Trial {
    build: Duration,
    stats: TrialStats,
    trace: Vec<ConstraintId>,
}

fn run_trial(spec: &BenchmarkSpec, trace: bool) -> Result<Trial, BenchError> {
    fn go<W: Workload>(
        spec: &BenchmarkSpec,
        trace: bool,
        build: impl FnOnce(&mut ChaCha8Rng) -> Result<W, BenchError>,
        rng: &mut ChaCha8Rng,
    ) -> Result<Trial, BenchError> {
        let started = Instant::now();
        let mut workload = build(rng)?;
        let build_time = started.elapsed();
        if trace {
            workload.engine().set_trace(true);
        }
        let stats = drive(&mut workload, spec.updates, spec.batch, spec.verify, rng)?;
        let trace = workload.engine().take_trace();
        Ok(Trial { build: build_time, stats, trace })
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (name, n, updates, sched, mix) = (spec.name, spec.n, spec.updates, spec.scheduler, spec.mix);
    match name {
        BenchName::Exptrees => {
            go(spec, trace, |rng| TreeHarness::build(n, sched, rng), &mut rng)
        }
        BenchName::Sp => go(spec, trace, |rng| SpHarness::random(n, sched, rng), &mut rng),
        BenchName::Vecmat => {
            go(spec, trace, |rng| VecMatHarness::build(n, sched, rng), &mut rng)
        }
        list => go(
            spec,
            trace,
            |rng| ListHarness::build(list, n, updates, sched, mix, rng),
            &mut rng,
        ),
    }
}

/// Run one benchmark, averaging timings over [`DEFAULT_TRIALS`] trials.
pub fn run_benchmark(spec: &BenchmarkSpec) -> Result<BenchReport, BenchError> {
    run_benchmark_with(spec, DEFAULT_TRIALS)
}

/// Run one benchmark, averaging timings over `trials` identical trials.
/// Counts are deterministic given the seed, so they come from the last
/// trial; only the timing fields vary between runs.
pub fn run_benchmark_with(spec: &BenchmarkSpec, trials: usize) -> Result<BenchReport, BenchError> {
    validate(spec)?;
    let trials = trials.max(1);
    let mut build_total = Duration::ZERO;
    let mut propagation_total = Duration::ZERO;
    let mut last = None;
    for _ in 0..trials {
        let trial = run_trial(spec, false)?;
        build_total += trial.build;
        propagation_total += trial.stats.propagation;
        last = Some(trial.stats);
    }
    let stats = last.expect("at least one trial");
    let per_update = spec.updates.max(1) as f64;
    let ms = |d: Duration| d.as_secs_f64() * 1_000.0;
    Ok(BenchReport {
        from_scratch_ms: ms(build_total) / trials as f64,
        avg_propagation_ms: ms(propagation_total) / trials as f64 / per_update,
        avg_constraints_per_update: stats.executed as f64 / per_update,
        distinct_constraints_per_update: stats.distinct as f64 / per_update,
        peak_live_dependencies: stats.peak_live_deps,
        verified: stats.verified,
    })
}

/// The executed-constraint id sequence of a single unverified trial.
/// Two calls with the same spec must return identical sequences.
pub fn executed_trace(spec: &BenchmarkSpec) -> Result<Vec<ConstraintId>, BenchError> {
    validate(spec)?;
    let mut spec = spec.clone();
    spec.verify = false;
    Ok(run_trial(&spec, true)?.trace)
}

/// Replay `decreases` seeded weight decreases over a parsed DIMACS graph,
/// verifying distances against Dijkstra after every one. `source` is
/// 0-based.
pub fn run_sp_dimacs(
    graph: &DimacsGraph,
    source: usize,
    decreases: usize,
    seed: u64,
    scheduler: Scheduler,
    trials: usize,
) -> Result<(BenchmarkSpec, BenchReport), BenchError> {
    if source >= graph.nodes {
        return Err(BenchError::InvalidSpec(format!(
            "source node {} out of range (graph has {} nodes)",
            source + 1,
            graph.nodes
        )));
    }
    let spec = BenchmarkSpec {
        name: BenchName::Sp,
        n: graph.nodes,
        updates: decreases,
        batch: 1,
        seed,
        scheduler,
        verify: true,
        mix: UpdateMix::Mixed,
    };
    let trials = trials.max(1);
    let mut build_total = Duration::ZERO;
    let mut propagation_total = Duration::ZERO;
    let mut last = None;
    for _ in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let started = Instant::now();
        let mut workload = SpHarness::from_edges(graph.nodes, &graph.edges, source, scheduler)?;
        build_total += started.elapsed();
        let stats = drive(&mut workload, decreases, 1, true, &mut rng)?;
        propagation_total += stats.propagation;
        last = Some(stats);
    }
    let stats = last.expect("at least one trial");
    let per_update = decreases.max(1) as f64;
    let ms = |d: Duration| d.as_secs_f64() * 1_000.0;
    let report = BenchReport {
        from_scratch_ms: ms(build_total) / trials as f64,
        avg_propagation_ms: ms(propagation_total) / trials as f64 / per_update,
        avg_constraints_per_update: stats.executed as f64 / per_update,
        distinct_constraints_per_update: stats.distinct as f64 / per_update,
        peak_live_dependencies: stats.peak_live_deps,
        verified: stats.verified,
    };
    Ok((spec, report))
}
