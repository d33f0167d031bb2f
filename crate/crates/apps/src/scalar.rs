use std::fmt;

use num_traits::{NumAssign, Zero};

/// Scalars the numeric applications compute with.
///
/// Blanket-implemented for every type with the right arithmetic, so `i64`,
/// `f64`, `u32` and friends all qualify. The `'static` bound comes from the
/// engine, which stores values behind `dyn Any`.
pub trait Scalar: Copy + PartialEq + fmt::Debug + NumAssign + 'static {}

impl<T> Scalar for T where T: Copy + PartialEq + fmt::Debug + NumAssign + 'static {}

/// Edge weights for the shortest-path graph.
///
/// Beyond ordered arithmetic this asks for an explicit unreachable value and
/// an addition that cannot overflow past it, so distance relaxation is safe
/// on integers (saturating) and floats (IEEE infinity) alike.
pub trait Weight:
    Copy + PartialEq + PartialOrd + fmt::Debug + Zero + std::ops::Sub<Output = Self> + 'static
{
    /// The distance of an unreachable node.
    fn infinity() -> Self;

    /// Addition that never exceeds [`Weight::infinity`].
    fn add_weight(self, other: Self) -> Self;
}

macro_rules! int_weight {
    ($($t:ty),*) => {$(
        impl Weight for $t {
            fn infinity() -> Self {
                <$t>::MAX
            }

            fn add_weight(self, other: Self) -> Self {
                self.saturating_add(other)
            }
        }
    )*};
}

int_weight!(i16, i32, i64, i128, u16, u32, u64, u128);

macro_rules! float_weight {
    ($($t:ty),*) => {$(
        impl Weight for $t {
            fn infinity() -> Self {
                <$t>::INFINITY
            }

            fn add_weight(self, other: Self) -> Self {
                self + other
            }
        }
    )*};
}

float_weight!(f32, f64);
