//! Scalar abstraction for the continuous-math layers.
//!
//! Pulse shapes, the two-mode coupler model, frame bookkeeping, decay
//! fitting and the master-equation integrator are written against [`Real`]
//! so they run in `f32` or `f64`. The discrete and statistical layers
//! (Clifford tables, circuit-level benchmarking, tomography) are `f64` only.

use std::fmt::{Debug, Display};

use nalgebra::RealField;
use num_complex::Complex;
use num_traits::{FromPrimitive, ToPrimitive};

/// Floating-point scalar usable throughout the simulator.
pub trait Real:
    RealField + Copy + FromPrimitive + ToPrimitive + Default + Debug + Display + Send + Sync + 'static
{
    /// Lossless-enough conversion from an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Machine epsilon of the concrete type.
    fn eps() -> Self;
}

impl Real for f32 {
    fn eps() -> Self {
        f32::EPSILON
    }
}

impl Real for f64 {
    fn eps() -> Self {
        f64::EPSILON
    }
}

/// Complex scalar over a [`Real`].
pub type Cx<T> = Complex<T>;

#[inline]
pub(crate) fn cx<T: Real>(re: T, im: T) -> Cx<T> {
    Complex::new(re, im)
}

#[inline]
pub(crate) fn cre<T: Real>(re: T) -> Cx<T> {
    Complex::new(re, T::zero())
}

/// Modulus of a complex number over a generic [`Real`].
#[inline]
pub(crate) fn cabs<T: Real>(z: Cx<T>) -> T {
    z.re.hypot(z.im)
}

/// `e^{iφ}` over a generic [`Real`].
#[inline]
pub(crate) fn cis<T: Real>(phi: T) -> Cx<T> {
    let (s, c) = phi.sin_cos();
    Complex::new(c, s)
}
