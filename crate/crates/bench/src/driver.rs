//! Shared update loop: applies batches, samples engine statistics, and
//! runs the per-batch verification protocol.

use std::time::{Duration, Instant};

use rand_chacha::ChaCha8Rng;

use dataflow_core::Engine;

use crate::report::BenchError;

/// A benchmark that the [`drive`] loop can exercise.
pub trait Workload {
    fn engine(&mut self) -> &mut Engine;

    /// Apply `count` random updates in one atomic block (one session).
    fn apply_batch(&mut self, count: usize, rng: &mut ChaCha8Rng) -> Result<(), BenchError>;

    /// Compare every maintained output against its from-scratch oracle,
    /// reporting the first mismatch.
    fn verify(&mut self) -> Result<(), String>;
}

/// Everything measured across one trial's update phase.
#[derive(Debug, Clone, Copy, Default)]
pub struct TrialStats {
    pub propagation: Duration,
    pub updates: usize,
    pub executed: u64,
    pub distinct: u64,
    pub peak_live_deps: u64,
    pub verified: bool,
}

/// Apply `updates` updates in batches, timing only the propagation.
///
/// With `verify` set, after every session the driver checks that the engine
/// is quiescent, that the outputs match the oracle, and that a re-run of
/// all live constraints with suppressed side effects changes no cell.
pub fn drive<W: Workload>(
    workload: &mut W,
    updates: usize,
    batch: usize,
    verify: bool,
    rng: &mut ChaCha8Rng,
) -> Result<TrialStats, BenchError> {
    let mut out = TrialStats::default();
    let mut executed_mark = {
        let stats = workload.engine().stats();
        out.peak_live_deps = stats.dependencies_live;
        stats.constraints_executed
    };
    while out.updates < updates {
        let count = batch.min(updates - out.updates);
        let started = Instant::now();
        workload.apply_batch(count, rng)?;
        out.propagation += started.elapsed();
        out.updates += count;

        let stats = workload.engine().stats();
        out.executed += stats.constraints_executed - executed_mark;
        executed_mark = stats.constraints_executed;
        out.distinct += stats.distinct_constraints_last_session;
        out.peak_live_deps = out.peak_live_deps.max(stats.dependencies_live);

        if verify {
            let fail = |detail: String| BenchError::VerificationFailed {
                update: out.updates,
                detail,
            };
            if !workload.engine().is_quiescent() {
                return Err(fail("engine not quiescent after the session".into()));
            }
            workload.verify().map_err(fail)?;
            if !workload.engine().check_fixpoint()? {
                return Err(fail("suppressed re-run of live constraints changed a cell".into()));
            }
        }

        // Keep outdated dependency records from accumulating on workloads
        // whose constraints re-read large regions every session.
        let live = workload.engine().stats().dependencies_live as usize;
        workload.engine().collect_stale((live / 2).max(1_024));
    }
    out.verified = verify;
    Ok(out)
}
