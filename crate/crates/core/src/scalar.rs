//! Scalar abstraction shared by every numerical module.
//!
//! All geometry, discretization, finite element and network code is written
//! against [`Real`], which is implemented for `f32` and `f64`. File formats are
//! always little-endian `f64`, so conversions go through [`Real::to_f64`].

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Floating point scalar: `f32` or `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
    + ndarray::LinalgScalar
    + ndarray::ScalarOperand
{
    /// Converts an `f64` literal into this scalar type.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite scalar")
    }

    #[inline]
    fn two() -> Self {
        Self::one() + Self::one()
    }

    #[inline]
    fn half() -> Self {
        Self::lit(0.5)
    }

    /// Reduces an angle to `[0, 2π)`.
    #[inline]
    fn wrap_angle(self) -> Self {
        let tau = Self::TAU();
        let t = self % tau;
        if t < Self::zero() {
            t + tau
        } else {
            t
        }
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Euclidean norm of a point given as a slice.
#[inline]
pub fn norm<T: Real>(x: &[T]) -> T {
    x.iter().map(|&v| v * v).sum::<T>().sqrt()
}

#[inline]
pub fn dist<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| (x - y) * (x - y))
        .sum::<T>()
        .sqrt()
}

/// Angle of a planar vector mapped to `[0, 2π)`.
#[inline]
pub fn angle_of<T: Real>(x: T, y: T) -> T {
    let a = y.atan2(x);
    if a < T::zero() {
        a + T::TAU()
    } else {
        a
    }
}
