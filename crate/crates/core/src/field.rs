//! Scalar backends.
//!
//! Everything geometric is generic over [`Scalar`]. Two backends are provided:
//! `Complex64` is the working field (gauge fixing needs eigenvalues, so it is
//! the only backend the normalization accepts), and `BigRational` gives exact
//! determinants, solves, and ranks for the oracle paths.

use num::complex::Complex64;
use num::{BigInt, BigRational, ToPrimitive};
use rand::Rng;
use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

pub trait Scalar:
    Clone
    + PartialEq
    + Debug
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// Exact backends use zero tests instead of magnitude thresholds.
    const EXACT: bool;

    /// Tag used in serialized files ("complex" / "rational").
    const FIELD_TAG: &'static str;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(v: i64) -> Self;
    fn is_zero(&self) -> bool;

    /// Magnitude for pivoting and tolerance decisions. Exact values only use
    /// this for pivot ordering, never for zero tests.
    fn mag(&self) -> f64;

    fn recip(&self) -> Self;

    /// One random entry of a polygon draw: complex uniform on the unit box,
    /// rational on the grid {-16..16}/16 so determinants stay exact.
    fn sample_unit<R: Rng + ?Sized>(rng: &mut R) -> Self;
}

impl Scalar for Complex64 {
    const EXACT: bool = false;
    const FIELD_TAG: &'static str = "complex";

    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }

    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }

    fn from_i64(v: i64) -> Self {
        Complex64::new(v as f64, 0.0)
    }

    fn is_zero(&self) -> bool {
        num::Zero::is_zero(self)
    }

    fn mag(&self) -> f64 {
        self.norm()
    }

    fn recip(&self) -> Self {
        Complex64::new(1.0, 0.0) / self
    }

    fn sample_unit<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;
    const FIELD_TAG: &'static str = "rational";

    fn zero() -> Self {
        BigRational::from_integer(BigInt::from(0))
    }

    fn one() -> Self {
        BigRational::from_integer(BigInt::from(1))
    }

    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }

    fn is_zero(&self) -> bool {
        num::Zero::is_zero(self)
    }

    fn mag(&self) -> f64 {
        match self.to_f64() {
            Some(v) => v.abs(),
            // Overflowed the double range; still a perfectly good pivot.
            None => {
                if num::Zero::is_zero(self) {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
        }
    }

    fn recip(&self) -> Self {
        num::traits::Inv::inv(self)
    }

    fn sample_unit<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let p: i64 = rng.gen_range(-16..=16);
        BigRational::new(BigInt::from(p), BigInt::from(16))
    }
}

/// Best-effort conversion into the floating backend, exact values included.
pub fn to_c64<T: Scalar>(v: &T) -> Complex64 {
    let any: &dyn std::any::Any = v;
    if let Some(z) = any.downcast_ref::<Complex64>() {
        *z
    } else if let Some(q) = any.downcast_ref::<BigRational>() {
        Complex64::new(q.to_f64().unwrap_or(f64::NAN), 0.0)
    } else {
        unreachable!("unknown scalar backend")
    }
}
