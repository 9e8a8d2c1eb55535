//! Numeric traits shared by every module.
//!
//! [`Scalar`] is the ring the tiling and reference convolutions run over;
//! it is implemented for the float types, signed integers and
//! [`Rational64`] so the 2D-via-1D equivalence can be checked in exact
//! arithmetic. [`Real`] adds what the Fourier-optics path needs.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_rational::Rational64;
use num_traits::{Float, FromPrimitive, NumAssign, Signed, ToPrimitive};
use rustfft::FftNum;

/// Element type for signals, images and kernels.
pub trait Scalar: NumAssign + Signed + Copy + PartialOrd + Debug + Display + Sum + Send + Sync + 'static {
    /// False for NaN or infinite values. Always true for exact types.
    fn is_finite_value(&self) -> bool;

    /// Lossy conversion used for reporting and error metrics.
    fn to_f64_lossy(&self) -> f64;
}

macro_rules! exact_scalar {
    ($($t:ty)*) => ($(
        impl Scalar for $t {
            fn is_finite_value(&self) -> bool {
                true
            }

            fn to_f64_lossy(&self) -> f64 {
                *self as f64
            }
        }
    )*)
}

exact_scalar!(i32 i64);

impl Scalar for f32 {
    fn is_finite_value(&self) -> bool {
        self.is_finite()
    }

    fn to_f64_lossy(&self) -> f64 {
        f64::from(*self)
    }
}

impl Scalar for f64 {
    fn is_finite_value(&self) -> bool {
        self.is_finite()
    }

    fn to_f64_lossy(&self) -> f64 {
        *self
    }
}

impl Scalar for Rational64 {
    fn is_finite_value(&self) -> bool {
        true
    }

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

/// Floating-point scalar usable by the FFT-backed optics simulation.
pub trait Real: Scalar + Float + FftNum + FromPrimitive {}

impl Real for f32 {}
impl Real for f64 {}

/// Converts an `f64` literal into `T`. Only used with small constants that
/// every [`Real`] can represent.
pub(crate) fn lit<T: Real>(v: f64) -> T {
    T::from_f64(v).expect("constant representable in the target float type")
}
