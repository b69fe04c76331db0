use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive};

/// Floating-point scalar the noise algebra and state simulator are generic over.
pub trait Scalar: Float + FromPrimitive + Debug + Display + Send + Sync + 'static {
    /// Converts an `f64` literal.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    /// Tolerance for normalization checks; never tighter than `1e-12`.
    fn norm_tol() -> Self {
        Self::lit(1e-12).max(Self::epsilon() * Self::lit(64.0))
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
