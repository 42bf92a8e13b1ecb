//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display, LowerExp};

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating point type the solver can run on: `f32` or `f64`.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Default + Debug + Display + LowerExp + Send + Sync + 'static
{
    /// Converts an `f64` literal into this type.
    fn of(x: f64) -> Self;

    fn to_f64_lossy(self) -> f64;
}

macro_rules! impl_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            #[inline]
            fn of(x: f64) -> Self {
                x as $t
            }

            #[inline]
            fn to_f64_lossy(self) -> f64 {
                self as f64
            }
        }
    };
}

impl_scalar!(f32);
impl_scalar!(f64);

pub(crate) type Vec3<T> = [T; 3];

#[inline]
pub(crate) fn sub<T: Scalar>(a: Vec3<T>, b: Vec3<T>) -> Vec3<T> {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub(crate) fn add<T: Scalar>(a: Vec3<T>, b: Vec3<T>) -> Vec3<T> {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

#[inline]
pub(crate) fn scale<T: Scalar>(a: Vec3<T>, s: T) -> Vec3<T> {
    [a[0] * s, a[1] * s, a[2] * s]
}

#[inline]
pub(crate) fn dot<T: Scalar>(a: Vec3<T>, b: Vec3<T>) -> T {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub(crate) fn cross<T: Scalar>(a: Vec3<T>, b: Vec3<T>) -> Vec3<T> {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
pub(crate) fn norm<T: Scalar>(a: Vec3<T>) -> T {
    dot(a, a).sqrt()
}

#[inline]
pub(crate) fn zero3<T: Scalar>() -> Vec3<T> {
    [T::zero(); 3]
}
