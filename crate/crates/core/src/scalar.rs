//! Scalar abstraction shared by every numerical routine in the crate.

use nalgebra::RealField;
use num_traits::ToPrimitive;
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating point scalar: `f32` or `f64`.
///
/// Everything numerical is written against this trait; the crate root exposes
/// `f64` aliases for the common case.
pub trait Real: RealField + Copy + ToPrimitive + Serialize + DeserializeOwned + 'static {
    /// Converts an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        nalgebra::convert(x)
    }

    #[inline]
    fn f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    #[inline]
    fn nat(n: usize) -> Self {
        Self::lit(n as f64)
    }

    fn infinity() -> Self;

    fn epsilon() -> Self;

    /// Smallest positive normal number.
    fn min_positive() -> Self;

    /// A safe bound on `|ln x|` for finite positive `x`.
    fn max_ln() -> Self;
}

impl Real for f32 {
    fn infinity() -> Self {
        f32::INFINITY
    }
    fn epsilon() -> Self {
        f32::EPSILON
    }
    fn min_positive() -> Self {
        f32::MIN_POSITIVE
    }
    fn max_ln() -> Self {
        80.0
    }
}

impl Real for f64 {
    fn infinity() -> Self {
        f64::INFINITY
    }
    fn epsilon() -> Self {
        f64::EPSILON
    }
    fn min_positive() -> Self {
        f64::MIN_POSITIVE
    }
    fn max_ln() -> Self {
        700.0
    }
}
