//! One-way observers between cells.
//!
//! An observer keeps a target cell equal to a source cell. The connection is
//! directional: writing the source propagates to the target, writing the
//! target does not touch the source. Chaining observers builds pipelines that
//! settle in a single session.

use std::any::Any;

use dataflow_core::{Cell, ConstraintId, Engine, EngineError};

/// Make `target` track `source`.
///
/// The returned constraint copies the source value whenever it changes. The
/// copy runs once immediately, so the two cells are equal when this returns.
pub fn observer_connect<T>(
    eng: &mut Engine,
    source: Cell<T>,
    target: Cell<T>,
) -> Result<ConstraintId, EngineError>
where
    T: Any + PartialEq + Clone,
{
    eng.new_constraint((), move |e| {
        let v = e.read(source)?;
        e.write(target, v)
    })
}
