//! Scalar abstraction shared by every module.

use nalgebra::ComplexField;
use std::fmt::{Debug, Display, LowerExp};

use nalgebra::{DMatrix, DVector, RealField};
use num_complex::Complex;
use num_traits::{FloatConst, FromPrimitive, ToPrimitive};

/// Real floating-point scalar the library is generic over (`f32` or `f64`).
///
/// `num_traits::Float` is intentionally not a supertrait: together with
/// `RealField` it makes the common method names ambiguous.
pub trait Real:
    RealField
    + Copy
    + FromPrimitive
    + ToPrimitive
    + FloatConst
    + Display
    + LowerExp
    + Debug
    + Default
    + Send
    + Sync
    + 'static
{
}

impl Real for f32 {}
impl Real for f64 {}

pub type C<T> = Complex<T>;
pub type CMat<T> = DMatrix<Complex<T>>;
pub type CVec<T> = DVector<Complex<T>>;
pub type RMat<T> = DMatrix<T>;
pub type RVec<T> = DVector<T>;

/// Converts an `f64` literal into `T`.
#[inline]
pub fn lit<T: Real>(v: f64) -> T {
    T::from_f64(v).expect("f64 literal representable in scalar type")
}

#[inline]
pub fn to_f64<T: Real>(v: T) -> f64 {
    v.to_f64().unwrap_or(f64::NAN)
}

/// Tolerance `v` clamped from below by a small multiple of the type epsilon,
/// so that f64-calibrated thresholds stay meaningful in f32.
#[inline]
pub fn tol<T: Real>(v: f64) -> T {
    let eps = T::default_epsilon() * lit::<T>(64.0);
    let v = lit::<T>(v);
    if v > eps {
        v
    } else {
        eps
    }
}

#[inline]
pub fn c<T: Real>(re: f64, im: f64) -> C<T> {
    Complex::new(lit(re), lit(im))
}

#[inline]
pub fn cr<T: Real>(re: T) -> C<T> {
    Complex::new(re, T::zero())
}

#[inline]
pub fn i_unit<T: Real>() -> C<T> {
    Complex::new(T::zero(), T::one())
}

#[inline]
pub fn czero<T: Real>() -> C<T> {
    Complex::new(T::zero(), T::zero())
}

#[inline]
pub fn cone<T: Real>() -> C<T> {
    Complex::new(T::one(), T::zero())
}

pub fn is_finite_c<T: Real>(z: C<T>) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

pub fn all_finite<T: Real>(m: &CMat<T>) -> bool {
    m.iter().all(|z| is_finite_c(*z))
}

pub fn to_complex<T: Real>(m: &RMat<T>) -> CMat<T> {
    m.map(cr)
}

pub fn real_part<T: Real>(m: &CMat<T>) -> RMat<T> {
    m.map(|z| z.re)
}

pub fn imag_part<T: Real>(m: &CMat<T>) -> RMat<T> {
    m.map(|z| z.im)
}

/// Frobenius norm of a complex matrix.
pub fn fro<T: Real>(m: &CMat<T>) -> T {
    m.iter()
        .fold(T::zero(), |acc, z| acc + z.re * z.re + z.im * z.im)
        .sqrt()
}

pub fn fro_vec<T: Real>(v: &CVec<T>) -> T {
    v.iter()
        .fold(T::zero(), |acc, z| acc + z.re * z.re + z.im * z.im)
        .sqrt()
}

/// Induced 1-norm (maximum absolute column sum).
pub fn norm1<T: Real>(m: &CMat<T>) -> T {
    let mut best = T::zero();
    for col in m.column_iter() {
        let s = col.iter().fold(T::zero(), |acc, z| acc + z.modulus());
        if s > best {
            best = s;
        }
    }
    best
}

/// Relative Frobenius distance `‖a − b‖ / max(1, ‖b‖)`.
pub fn rel_residual<T: Real>(a: &CMat<T>, b: &CMat<T>) -> T {
    let denom = fro(b).max(T::one());
    fro(&(a - b)) / denom
}
