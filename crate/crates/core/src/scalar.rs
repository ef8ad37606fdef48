//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Real scalar the closed forms and estimators are written against.
///
/// Implemented for `f32` and `f64`. Quantile inversion runs in `f64`
/// internally and is cast back.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + NumAssign + Sum + Debug + Display + Send + Sync + 'static
{
    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    /// Conversion from a sample count.
    #[inline]
    fn count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite scalar")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Round-off floor used when clamping variance and bias differences.
pub(crate) fn roundoff_floor<T: Scalar>() -> T {
    T::lit(-1e-12)
}

/// Clamp a quantity that is nonnegative in exact arithmetic.
///
/// Values in `[-1e-12, 0)` become zero; anything lower is reported as an
/// internal inconsistency.
pub(crate) fn clamp_nonnegative<T: Scalar>(value: T, what: &'static str) -> crate::Result<T> {
    if value >= T::zero() {
        Ok(value)
    } else if value >= roundoff_floor::<T>() {
        Ok(T::zero())
    } else {
        Err(crate::Error::Inconsistent {
            what,
            value: value.as_f64(),
        })
    }
}

pub(crate) fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}
