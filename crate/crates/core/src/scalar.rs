//! Scalar abstraction shared by the numeric modules.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal, StandardUniform};

/// Real floating point scalar: `f32` or `f64`.
///
/// The sampling hooks live on the trait so generic code does not have to
/// carry `StandardNormal: Distribution<T>` bounds around.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Draw from N(0, 1).
    fn sample_standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// Draw uniformly from `[0, 1)`.
    fn sample_unit_interval<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// Lossy conversion from an `f64` literal.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    fn from_usize_lossy(x: usize) -> Self {
        Self::from_usize(x).expect("usize representable in scalar type")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Tolerance floor used when a caller asks for a tolerance tighter than
    /// the type can resolve.
    fn resolvable_tolerance() -> Self {
        Self::epsilon() * Self::lit(1024.0)
    }
}

macro_rules! impl_real {
    ($($t:ty),*) => {$(
        impl Real for $t {
            fn sample_standard_normal<R: Rng + ?Sized>(rng: &mut R) -> Self {
                <StandardNormal as Distribution<$t>>::sample(&StandardNormal, rng)
            }

            fn sample_unit_interval<R: Rng + ?Sized>(rng: &mut R) -> Self {
                <StandardUniform as Distribution<$t>>::sample(&StandardUniform, rng)
            }
        }
    )*};
}

impl_real!(f32, f64);
