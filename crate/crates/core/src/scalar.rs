//! Scalar abstraction shared by every numerical module.
//!
//! All geometry, solver and operator code is written against [`Real`], so the
//! same pipeline can be instantiated in `f32` for quick smoke runs or in `f64`
//! for the tolerances the acceptance checks require. File formats always carry
//! `f64`.

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};
use std::fmt::{Debug, Display};

/// Floating point scalar usable throughout the crate.
pub trait Real:
    RealField + Copy + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static
{
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

/// Converts an `f64` literal into `T`.
#[inline(always)]
pub fn lit<T: Real>(v: f64) -> T {
    T::from_f64(v).expect("f64 literal representable in scalar type")
}

/// Converts a count into `T`.
#[inline(always)]
pub fn from_usize<T: Real>(v: usize) -> T {
    T::from_usize(v).expect("count representable in scalar type")
}

#[inline(always)]
pub fn to_f64<T: Real>(v: T) -> f64 {
    v.to_f64().unwrap_or(f64::NAN)
}

/// Total order for finite values, used for sorting and heap keys.
#[inline]
pub fn cmp<T: Real>(a: &T, b: &T) -> std::cmp::Ordering {
    a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal)
}

pub fn max_abs<T: Real>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |m, x| m.max(x.abs()))
}

pub fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |s, (x, y)| s + *x * *y)
}

/// Weighted inner product `Σ w a b`.
pub fn wdot<T: Real>(w: &[T], a: &[T], b: &[T]) -> T {
    w.iter()
        .zip(a.iter().zip(b))
        .fold(T::zero(), |s, (w, (x, y))| s + *w * *x * *y)
}
