//! Scalar abstraction shared by the numeric layers.

use std::fmt::{Debug, Display};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Real scalar type the simulator can run on.
///
/// Implemented for `f32` and `f64`. Protocol-level code fixes `f64`.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Default tolerance for unitarity, trace and normalization checks.
    fn tolerance() -> Self;

    /// Lossy conversion from `f64`; always succeeds for the two supported types.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    fn tolerance() -> Self {
        1e-9
    }
}

impl Scalar for f32 {
    fn tolerance() -> Self {
        1e-4
    }
}

/// Complex number over a [`Scalar`].
pub type C<T> = Complex<T>;

pub(crate) fn cr<T: Scalar>(re: f64) -> C<T> {
    Complex::new(T::lit(re), T::zero())
}

pub(crate) fn czero<T: Scalar>() -> C<T> {
    Complex::new(T::zero(), T::zero())
}

pub(crate) fn cone<T: Scalar>() -> C<T> {
    Complex::new(T::one(), T::zero())
}
