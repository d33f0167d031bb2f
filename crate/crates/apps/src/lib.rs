//! Applications built on the [`dataflow_core`] constraint engine.
//!
//! Each module wires a familiar data structure out of reactive cells and
//! lets constraints keep it consistent:
//!
//! * [`observer`]: one-way mirrors between cells.
//! * [`exptree`]: expression trees whose values recompute along the path
//!   from an edited leaf to the root.
//! * [`list`] and [`watcher`]: linked lists, plus shadow constraints that
//!   track every reachable node and drive user hooks as the list changes.
//! * [`sp`]: single-source shortest paths that re-settle only the nodes an
//!   edge update actually affects.
//! * [`vecmat`]: a vector-matrix product maintained block by block.
//!
//! Numeric structures are generic over [`Scalar`] (arithmetic) or
//! [`Weight`] (ordered arithmetic with an infinity); the usual concrete
//! choices have aliases at the crate root.

pub mod error;
pub mod exptree;
pub mod list;
pub mod observer;
pub mod scalar;
pub mod sp;
pub mod vecmat;
pub mod watcher;

pub use error::AppError;
pub use exptree::{ExpNode, ExpTree, Op, Side, TreeSpec};
pub use list::{build_dl_list, build_list, collect_values, DlNode, Linked, ListNode};
pub use observer::observer_connect;
pub use scalar::{Scalar, Weight};
pub use sp::{SpGraph, SpVariant};
pub use vecmat::VecMatProduct;
pub use watcher::{Repairer, WatchHooks, Watcher};

/// Expression tree over machine integers.
pub type ExpTreeI64 = ExpTree<i64>;
/// Expression tree over double-precision floats.
pub type ExpTreeF64 = ExpTree<f64>;
/// Shortest-path graph with integer weights.
pub type SpGraphI64 = SpGraph<i64>;
/// Shortest-path graph with float weights.
pub type SpGraphF64 = SpGraph<f64>;
/// Vector-matrix product over machine integers.
pub type VecMatI64 = VecMatProduct<i64>;
/// Vector-matrix product over double-precision floats.
pub type VecMatF64 = VecMatProduct<f64>;
