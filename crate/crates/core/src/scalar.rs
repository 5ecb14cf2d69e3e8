//! Scalar abstraction shared by every numerical module.
//!
//! All algebra in this crate is written against [`Real`], which is implemented
//! for `f32` and `f64`. Complex amplitudes and coefficients are
//! `num_complex::Complex<T>` over the same real type.

use nalgebra::RealField;
use num_complex::Complex;
use num_traits::{FromPrimitive, ToPrimitive};

/// Real floating-point scalar usable by the solver.
pub trait Real: RealField + Copy + FromPrimitive + ToPrimitive + Send + Sync {
    /// Converts an `f64` literal into this scalar type.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    /// `x` or a thousand machine epsilons, whichever is larger, so f64-sized
    /// tolerances stay meaningful in single precision.
    fn tol(x: f64) -> Self {
        Self::lit(x).max(Self::default_epsilon() * Self::lit(1e3))
    }

    /// Lossy conversion to `f64` for reporting.
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Complex scalar over a [`Real`] type.
pub type C<T> = Complex<T>;

#[inline]
pub(crate) fn real<T: Real>(x: T) -> Complex<T> {
    Complex::new(x, T::zero())
}

#[inline]
pub(crate) fn abs_c<T: Real>(z: Complex<T>) -> T {
    z.norm_sqr().sqrt()
}
