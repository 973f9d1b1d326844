//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssignOps, ToPrimitive};

/// Real scalar the engine is generic over. Implemented for `f32` and `f64`.
///
/// Random variates are always drawn in `f64` and narrowed, so a given seed
/// produces the same stream of decisions regardless of the scalar type
/// (up to rounding of the narrowed values).
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssignOps
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` constant. Panics only if the target cannot hold a
    /// finite `f64`, which never happens for `f32`/`f64`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn from_count(n: u64) -> Self {
        Self::from_u64(n).expect("count representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite scalar")
    }

    /// Absolute tolerance used where a routine cannot do better than the
    /// working precision.
    #[inline]
    fn tolerance_floor() -> Self {
        Self::epsilon() * Self::lit(64.0)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Clamps a probability into the open unit interval.
#[inline]
pub(crate) fn open_unit<R: Real>(p: R) -> R {
    let hi = R::one() - R::epsilon() / R::lit(2.0);
    let lo = R::min_positive_value();
    if p < lo {
        lo
    } else if p > hi {
        hi
    } else {
        p
    }
}
