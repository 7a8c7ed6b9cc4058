//! Scalar abstraction shared by every module.
//!
//! All numerics are generic over a real field `T` (in practice `f32` or
//! `f64`); complex entries are `Complex<T>`.

use nalgebra::{DMatrix, DVector, RealField};
use num_complex::Complex;
use num_traits::ToPrimitive;

/// Real scalar type the library is generic over.
pub trait Real: RealField + Copy + ToPrimitive {}

impl<T: RealField + Copy + ToPrimitive> Real for T {}

pub type CMatrix<T> = DMatrix<Complex<T>>;
pub type CVector<T> = DVector<Complex<T>>;

/// Converts an `f64` literal into `T`.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 literal representable in scalar type")
}

/// Converts `x` into an `f64` for reporting and serialization.
#[inline]
pub fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

#[inline]
pub fn cplx<T: Real>(re: f64, im: f64) -> Complex<T> {
    Complex::new(lit(re), lit(im))
}

/// `e^{iθ}`.
#[inline]
pub fn unimodular<T: Real>(theta: T) -> Complex<T> {
    Complex::new(theta.cos(), theta.sin())
}

/// Unit-modulus phase of `z`, or `None` when `|z|` is below `floor`.
#[inline]
pub fn phase_of<T: Real>(z: Complex<T>, floor: T) -> Option<Complex<T>> {
    let m = (z.re * z.re + z.im * z.im).sqrt();
    if m < floor || m.is_zero() {
        None
    } else {
        Some(Complex::new(z.re / m, z.im / m))
    }
}

#[inline]
pub fn modulus<T: Real>(z: Complex<T>) -> T {
    (z.re * z.re + z.im * z.im).sqrt()
}
