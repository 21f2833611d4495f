//! Floating-point abstraction for the numeric core.
//!
//! Model code is generic over [`Scalar`] so the same implementation runs in
//! `f32` for speed and `f64` for gradient checking; the crate root exports
//! concrete aliases for both.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::AddAssign;

use ndarray::{LinalgScalar, ScalarOperand};
use num_traits::Float;

/// The scalar type the model computes in.
pub trait Scalar:
    Float + LinalgScalar + ScalarOperand + AddAssign + Sum + Debug + Display + Send + Sync + 'static
{
    /// Conversion from `f64` for constants and config values.
    fn from_f64(v: f64) -> Self;

    /// Conversion to `f64` for reporting and serialization.
    fn to_f64(self) -> f64;
}

impl Scalar for f32 {
    fn from_f64(v: f64) -> f32 {
        v as f32
    }

    fn to_f64(self) -> f64 {
        self as f64
    }
}

impl Scalar for f64 {
    fn from_f64(v: f64) -> f64 {
        v
    }

    fn to_f64(self) -> f64 {
        self
    }
}
