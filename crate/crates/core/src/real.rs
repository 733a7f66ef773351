use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

/// Scalar type for all physics in this crate, implemented for `f32` and
/// `f64`. The acceptance tolerances assume `f64`; `f32` is usable for
/// plotting-grade sweeps.
pub trait Real:
    Float + FloatConst + FromPrimitive + NumAssign + Sum + Display + Debug + Send + Sync + 'static
{
    /// Convert an `f64` literal into this scalar type.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }
}

impl Real for f32 {}
impl Real for f64 {}
