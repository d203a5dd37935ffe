//! Scalar abstraction shared by the numerical kernels.

use num_complex::Complex;

/// Real floating-point type usable by the simulator, solvers and algorithms.
///
/// Implemented for `f32` and `f64`. Methods such as `sqrt`, `cos` and
/// `atan2` come from [`nalgebra::ComplexField`] / [`nalgebra::RealField`].
pub trait Real:
    nalgebra::RealField + Copy + num_traits::ToPrimitive + Default + Send + Sync + 'static
{
    /// Converts to `f64` for reporting.
    fn to_f64_lossy(self) -> f64 {
        num_traits::ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Converts an `f64` literal or configuration value into `T`.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    nalgebra::convert(x)
}

/// Complex number over a [`Real`] type.
pub type C<T> = Complex<T>;

#[inline]
pub fn c<T: Real>(re: T, im: T) -> C<T> {
    Complex::new(re, im)
}

#[inline]
pub fn czero<T: Real>() -> C<T> {
    Complex::new(T::zero(), T::zero())
}

#[inline]
pub fn cone<T: Real>() -> C<T> {
    Complex::new(T::one(), T::zero())
}

/// `e^{i phi}`.
#[inline]
pub fn cis<T: Real>(phi: T) -> C<T> {
    Complex::new(phi.cos(), phi.sin())
}

/// `i^k` for any integer `k`.
#[inline]
pub fn ipow<T: Real>(k: i64) -> C<T> {
    match k.rem_euclid(4) {
        0 => c(T::one(), T::zero()),
        1 => c(T::zero(), T::one()),
        2 => c(-T::one(), T::zero()),
        _ => c(T::zero(), -T::one()),
    }
}

/// Casts a complex value between real types.
#[inline]
pub fn ccast<S: Real, T: Real>(z: C<S>) -> C<T> {
    c(lit(z.re.to_f64_lossy()), lit(z.im.to_f64_lossy()))
}

#[inline]
pub fn cabs<T: Real>(z: C<T>) -> T {
    z.norm_sqr().sqrt()
}
