//! Type-erased cell values.
//!
//! A cell stores a `Box<dyn Value>`. Any `'static` type that is `Clone` and
//! `PartialEq` qualifies through the blanket impl below. Equality is what the
//! engine's change detection runs on, so `PartialEq` should be structural:
//! two values comparing equal means "no propagation needed".

use std::any::Any;

/// Object-safe facade over what a cell value must support: `Any` for
/// downcasting back to the concrete type, cloning for snapshots taken by
/// write logs, and equality for change detection.
pub trait Value: Any {
    /// Structural equality against another erased value. Values of different
    /// concrete types are never equal.
    fn eq_value(&self, other: &dyn Value) -> bool;
    /// Clone into a fresh box.
    fn clone_value(&self) -> Box<dyn Value>;
    /// Upcast for downcasting.
    fn as_any(&self) -> &dyn Any;
}

impl<T: Any + PartialEq + Clone> Value for T {
    fn eq_value(&self, other: &dyn Value) -> bool {
        other.as_any().downcast_ref::<T>().map_or(false, |o| o == self)
    }

    fn clone_value(&self) -> Box<dyn Value> {
        Box::new(self.clone())
    }

    fn as_any(&self) -> &dyn Any {
        self
    }
}
