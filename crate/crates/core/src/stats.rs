//! Execution counters.

/// Counters describing the engine's activity.
///
/// `constraints_executed`, `stale_collected` and `sessions` are cumulative
/// over the engine's lifetime. `distinct_constraints_last_session` describes
/// only the most recent solving session. `dependencies_live` is the current
/// number of up-to-date dependency edges (cell, constraint) across all live
/// constraints.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ExecStats {
    /// Constraint body executions, including re-executions within a session.
    pub constraints_executed: u64,
    /// How many distinct constraints ran during the last session.
    pub distinct_constraints_last_session: u64,
    /// Dependency edges recorded by the latest execution of each live
    /// constraint.
    pub dependencies_live: u64,
    /// Outdated dependency nodes physically removed so far, whether by the
    /// incremental collector or lazily while scheduling.
    pub stale_collected: u64,
    /// Solving sessions run so far (sessions that executed nothing are not
    /// counted).
    pub sessions: u64,
}
