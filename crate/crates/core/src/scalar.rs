//! Scalar abstraction: the numeric routines are generic over `f32`/`f64`.
//!
//! Training and the CLI pin `f64` (see the crate-root aliases); the generic
//! core keeps the math reusable and makes the unit tests explicit about
//! which precision they exercise.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssignOps};

/// Floating-point scalar usable by every numeric routine in this crate.
pub trait Real:
    Float + NumAssignOps + FromPrimitive + Sum<Self> + Debug + Display + Default + Send + Sync + 'static
{
    /// Lossy conversion from `f64`, for constants inside generic code.
    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 constant representable in scalar type")
    }
}

impl Real for f32 {}
impl Real for f64 {}
