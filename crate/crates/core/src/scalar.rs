//! Scalar abstraction for the numeric core.

use std::fmt;
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point scalar used by the closed-form prediction and tilting
/// machinery. Implemented by `f32` and `f64`; the crate-root aliases pin
/// `f64`, which is what every stated tolerance assumes.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + Sum<Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + fmt::Debug
    + fmt::Display
    + Send
    + Sync
    + 'static
{
    /// Lossless-enough conversion from `f64` literals (tolerances, constants).
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 conversion")
    }

    /// Conversion from integer counts.
    fn of_u64(x: u64) -> Self {
        Self::from_u64(x).expect("u64 conversion")
    }

    fn of_usize(x: usize) -> Self {
        Self::from_usize(x).expect("usize conversion")
    }
}

impl<T> Scalar for T where
    T: Float
        + FromPrimitive
        + ToPrimitive
        + Sum<Self>
        + AddAssign
        + SubAssign
        + MulAssign
        + DivAssign
        + fmt::Debug
        + fmt::Display
        + Send
        + Sync
        + 'static
{
}
