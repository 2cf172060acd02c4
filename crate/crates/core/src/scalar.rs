use std::fmt::{Debug, Display};

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

/// Real scalar the numerical core is generic over (`f32` or `f64`).
///
/// Distribution parameters and special functions stay in `f64`; values cross
/// into `Self` through [`Scalar::of`].
pub trait Scalar:
    RealField + Copy + FromPrimitive + ToPrimitive + Display + Debug + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal or parameter into this scalar type.
    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 is representable in every Scalar")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("Scalar converts to f64")
    }

    /// Machine epsilon of the type.
    fn ulp() -> Self;
}

impl Scalar for f32 {
    fn ulp() -> Self {
        f32::EPSILON
    }
}

impl Scalar for f64 {
    fn ulp() -> Self {
        f64::EPSILON
    }
}

/// `e^{jθ}`.
#[inline]
pub fn cis<T: Scalar>(theta: T) -> num_complex::Complex<T> {
    num_complex::Complex::new(theta.cos(), theta.sin())
}
