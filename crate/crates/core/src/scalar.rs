//! Scalar abstraction shared by every numerical module.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{Add, Sub};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, Zero};

/// Real floating-point scalar the library is generic over (`f32`, `f64`).
///
/// Default tolerances throughout the crate are calibrated for `f64`; callers
/// working in `f32` should pass their own tolerances where an API takes them.
pub trait Real:
    Float + FloatConst + FromPrimitive + NumAssign + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal into the scalar type.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    #[inline]
    fn from_i64_lossy(n: i64) -> Self {
        Self::from_i64(n).expect("index representable in scalar type")
    }

    /// Fractional part in `[0, 1)`.
    #[inline]
    fn frac1(self) -> Self {
        let f = self - self.floor();
        if f >= Self::one() {
            Self::zero()
        } else {
            f
        }
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// `exp(2 pi i t)`.
#[inline]
pub fn cis_turns<T: Real>(t: T) -> Complex<T> {
    let phi = T::TAU() * t;
    Complex::new(phi.cos(), phi.sin())
}

/// Neumaier-compensated accumulator over any additive value type.
#[derive(Clone, Copy, Debug)]
pub struct KahanSum<V> {
    sum: V,
    comp: V,
}

/// Magnitude used to decide the Neumaier branch.
pub trait Magnitude: Copy {
    type Real: Real;
    fn magnitude(&self) -> Self::Real;
}

impl<T: Real> Magnitude for T {
    type Real = T;
    #[inline]
    fn magnitude(&self) -> T {
        self.abs()
    }
}

impl<T: Real> Magnitude for Complex<T> {
    type Real = T;
    #[inline]
    fn magnitude(&self) -> T {
        self.re.abs().max(self.im.abs())
    }
}

impl<V> Default for KahanSum<V>
where
    V: Zero + Copy,
{
    fn default() -> Self {
        Self { sum: V::zero(), comp: V::zero() }
    }
}

impl<V> KahanSum<V>
where
    V: Zero + Copy + Add<Output = V> + Sub<Output = V> + Magnitude,
{
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: V) {
        let t = self.sum + x;
        if self.sum.magnitude() >= x.magnitude() {
            self.comp = self.comp + ((self.sum - t) + x);
        } else {
            self.comp = self.comp + ((x - t) + self.sum);
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> V {
        self.sum + self.comp
    }
}

/// Compensated sum of an iterator.
pub fn compensated_sum<V, I>(iter: I) -> V
where
    I: IntoIterator<Item = V>,
    V: Zero + Copy + Add<Output = V> + Sub<Output = V> + Magnitude,
{
    let mut acc = KahanSum::new();
    for x in iter {
        acc.add(x);
    }
    acc.value()
}
