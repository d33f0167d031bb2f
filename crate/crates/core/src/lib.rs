//! A one-way dataflow constraint engine over reactive memory cells.
//!
//! Constraints are ordinary closures relating reactive cells: each body
//! reads some cells and writes others. The engine detects the reads while a
//! body runs, so the dependency graph always reflects what the latest
//! execution actually touched. There are no static declarations, and
//! branches that skip a cell drop the dependency. Writing a cell whose value changes
//! schedules the constraints that read it; the solver re-executes scheduled
//! constraints until everything is consistent again.
//!
//! ```
//! use dataflow_core::Engine;
//!
//! let mut eng = Engine::new();
//! let a = eng.alloc_cell(12i64);
//! let b = eng.alloc_cell(0i64);
//! eng.new_constraint((), move |e| {
//!     let v = e.read(a)?;
//!     e.write(b, v + 1)
//! })?;
//! assert_eq!(eng.read(b)?, 13);
//!
//! eng.write(a, 41)?;
//! assert_eq!(eng.read(b)?, 42);
//! # Ok::<(), dataflow_core::EngineError>(())
//! ```
//!
//! Batch several writes with [`Engine::atomic`] to get a single propagation
//! pass with change detection against pre-block values. Schedule order is
//! pluggable through [`Comparator`]; see [`Engine`] for the full surface.
//!
//! The engine is strictly single-threaded.

pub mod cell;
pub mod engine;
pub mod error;
pub mod ids;
pub mod schedule;
pub mod stats;
pub mod value;

pub use cell::Cell;
pub use engine::{BodyFn, Engine, DEFAULT_SOLVER_BUDGET};
pub use error::EngineError;
pub use ids::{CellId, ConstraintId};
pub use schedule::{Comparator, QueueEntry, ScheduleQueue};
pub use stats::ExecStats;
pub use value::Value;
