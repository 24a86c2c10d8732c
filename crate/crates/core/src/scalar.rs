//! Scalar abstraction shared by every numerical module.
//!
//! All geometry, quadrature and element algebra is written against [`Real`],
//! which is implemented for `f32` and `f64`. Tolerances quoted throughout the
//! crate assume `f64`.

use std::fmt::{Debug, Display, LowerExp};

use nalgebra::{ComplexField, RealField, Vector2};
use num_complex::Complex;
use num_traits::{FromPrimitive, ToPrimitive};

/// Floating point type usable by the solver: `f32` or `f64`.
pub trait Real:
    RealField + Copy + FromPrimitive + ToPrimitive + Default + Debug + Display + LowerExp + Send + Sync
{
    /// Converts an `f64` literal into `Self`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite scalar")
    }

    /// Machine epsilon of the type.
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

pub type Vec2<T> = Vector2<T>;

/// `e^{i theta}`.
#[inline]
pub fn cis<T: Real>(theta: T) -> Complex<T> {
    Complex::new(theta.cos(), theta.sin())
}

/// Complex exponential.
#[inline]
pub fn cexp<T: Real>(z: Complex<T>) -> Complex<T> {
    let m = z.re.exp();
    Complex::new(m * z.im.cos(), m * z.im.sin())
}

#[inline]
pub fn cabs<T: Real>(z: Complex<T>) -> T {
    z.re.hypot(z.im)
}

#[inline]
pub fn i_times<T: Real>(x: T) -> Complex<T> {
    Complex::new(T::zero(), x)
}

#[inline]
pub fn real<T: Real>(x: T) -> Complex<T> {
    Complex::new(x, T::zero())
}

#[inline]
pub fn cross<T: Real>(a: &Vec2<T>, b: &Vec2<T>) -> T {
    a.x * b.y - a.y * b.x
}

/// Frobenius norm of a complex dense matrix.
pub fn frobenius<T: Real>(m: &nalgebra::DMatrix<Complex<T>>) -> T {
    let mut s = T::zero();
    for z in m.iter() {
        s += z.norm_sqr();
    }
    ComplexField::sqrt(s)
}
