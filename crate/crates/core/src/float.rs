//! Scalar abstraction for the numeric core.
//!
//! Everything downstream of the binary spreading matrix (closed forms, signal
//! chain, receiver) is generic over [`Float`]; `f32` and `f64` are the two
//! supported scalars. Concrete `f64` aliases live at the crate root.

use std::fmt::{Debug, Display};
use std::iter::Sum;

/// Floating-point scalar used by the signal chain and the closed-form models.
pub trait Float:
    num_traits::Float
    + num_traits::FloatConst
    + num_traits::FromPrimitive
    + num_traits::NumAssign
    + Sum
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from `f64`, used at configuration boundaries.
    fn from_f64_lossy(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 converts to any supported scalar")
    }

    /// Widening conversion to `f64`, used when aggregating metrics.
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().expect("supported scalars convert to f64")
    }
}

impl Float for f32 {}
impl Float for f64 {}
