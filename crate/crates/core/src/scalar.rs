//! Numeric abstractions shared by every module.
//!
//! [`Scalar`] is the minimal ordered-field interface used by the exact paths
//! (discrete stop-loss tables, allocation matrices, the completion solver);
//! it is implemented for the binary floats and for `Ratio<i64>`/`Ratio<i128>`.
//! [`Real`] adds the transcendental functions needed by the parametric
//! severities, closed-form ruin formulas and the Panjer recursion.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_rational::Ratio;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, Signed, ToPrimitive};

/// Ordered field with an associated normalization tolerance.
pub trait Scalar:
    Clone + Debug + Display + PartialOrd + Signed + FromPrimitive + Send + Sync + 'static
{
    /// Tolerance used when checking that probabilities sum to one.
    /// Exact types return zero.
    fn normalization_tol() -> Self;

    /// Tolerance below which a pivot is treated as zero in elimination.
    fn pivot_tol() -> Self;

    /// Lossy conversion for reporting.
    fn to_f64_lossy(&self) -> f64;

    fn from_f64_lossy(x: f64) -> Self;

    fn max_of(a: Self, b: Self) -> Self {
        if a >= b {
            a
        } else {
            b
        }
    }

    fn min_of(a: Self, b: Self) -> Self {
        if a <= b {
            a
        } else {
            b
        }
    }

    /// `max(self, 0)`.
    fn positive_part(self) -> Self {
        Self::max_of(self, Self::zero())
    }
}

/// Floating point scalar: `f32` or `f64`.
pub trait Real: Scalar + Float + FloatConst + NumAssign + Sum + Copy + Default {
    fn lit(x: f64) -> Self {
        <Self as Scalar>::from_f64_lossy(x)
    }

    fn from_usize_lossy(n: usize) -> Self {
        <Self as FromPrimitive>::from_usize(n).expect("usize fits in a float")
    }
}

impl Scalar for f64 {
    fn normalization_tol() -> Self {
        1e-12
    }
    fn pivot_tol() -> Self {
        1e-13
    }
    fn to_f64_lossy(&self) -> f64 {
        *self
    }
    fn from_f64_lossy(x: f64) -> Self {
        x
    }
}

impl Scalar for f32 {
    fn normalization_tol() -> Self {
        1e-5
    }
    fn pivot_tol() -> Self {
        1e-6
    }
    fn to_f64_lossy(&self) -> f64 {
        f64::from(*self)
    }
    fn from_f64_lossy(x: f64) -> Self {
        x as f32
    }
}

impl Real for f64 {}
impl Real for f32 {}

macro_rules! exact_ratio {
    ($int:ty) => {
        impl Scalar for Ratio<$int> {
            fn normalization_tol() -> Self {
                Ratio::from_integer(0)
            }
            fn pivot_tol() -> Self {
                Ratio::from_integer(0)
            }
            fn to_f64_lossy(&self) -> f64 {
                self.to_f64().unwrap_or(f64::NAN)
            }
            fn from_f64_lossy(x: f64) -> Self {
                <Ratio<$int> as FromPrimitive>::from_f64(x)
                    .unwrap_or_else(|| Ratio::from_integer(0))
            }
        }
    };
}

exact_ratio!(i64);
exact_ratio!(i128);
