//! Scalar abstraction: everything in this crate is generic over an IEEE
//! floating-point type.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign};

/// Floating-point scalar the numerical routines are generic over (f32 or f64).
pub trait Real:
    Float + NumAssign + FromPrimitive + Sum + Debug + Display + Send + Sync + 'static
{
}

impl<T> Real for T where
    T: Float + NumAssign + FromPrimitive + Sum + Debug + Display + Send + Sync + 'static
{
}

/// Shorthand for converting literal constants into the generic scalar.
#[inline]
pub fn cast<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("constant not representable in scalar type")
}
