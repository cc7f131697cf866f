//! Scalar abstraction for the floating-point parts of the crate.
//!
//! The eigensolver, state vectors and readout statistics are written against
//! [`Real`] so they can run in `f32` (half the memory per amplitude) or `f64`.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use nalgebra as na;
use num_traits as nt;

/// Floating point types usable by the numeric modules.
pub trait Real:
    nt::Float
    + nt::FromPrimitive
    + nt::ToPrimitive
    + na::RealField
    + Copy
    + Send
    + Sync
    + Debug
    + Display
    + Sum
    + 'static
{
    /// Lossy conversion from `f64`.
    fn lit(v: f64) -> Self;

    /// Lossy conversion to `f64`.
    fn to_f64_lossy(self) -> f64;
}

macro_rules! impl_real {
    ($f:ty) => {
        impl Real for $f {
            #[inline]
            fn lit(v: f64) -> Self {
                v as $f
            }

            #[inline]
            fn to_f64_lossy(self) -> f64 {
                self as f64
            }
        }
    };
}

impl_real!(f32);
impl_real!(f64);
