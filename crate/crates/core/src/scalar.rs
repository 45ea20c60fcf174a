//! Scalar abstraction for the numeric kernels.
//!
//! The surrogate solver, kernel, statistics and pick routines are written once
//! against [`Scalar`] and instantiated for `f32` and `f64`. Trained models and
//! datasets store `f64`.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Real scalar usable by the numeric kernels.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + NumAssign + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Machine epsilon scaled for rank decisions in small dense solves.
    fn rank_tolerance() -> Self {
        Self::epsilon() * Self::from_f64(64.0).unwrap()
    }

    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).unwrap()
    }

    fn lit(v: f64) -> Self {
        Self::from_f64(v).unwrap()
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Lossy conversion between two scalar types.
pub fn cast<A: Scalar, B: Scalar>(a: A) -> B {
    B::from_f64(a.to_f64().unwrap()).unwrap()
}
