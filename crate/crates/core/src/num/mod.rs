//! Arithmetic backends for length data.
//!
//! All dynamics are generic over [`Scalar`]: exact rationals
//! ([`num_rational::BigRational`]), the exact quadratic extension
//! [`Quad`] = Q(sqrt(D)) used for golden-ratio self-similarity tests, and
//! the arbitrary-precision float [`Mpf`]. Cocycle matrices are *not* scalars;
//! they live in exact integer arithmetic regardless of the backend.

mod mpf;
mod quadratic;

pub use mpf::{default_precision, set_default_precision, Mpf};
pub use quadratic::Quad;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};
use std::fmt::{Debug, Display};
use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::Result;

/// A totally ordered field element usable as interval length data.
///
/// Implementations must be exact fields (rationals, quadratic extensions) or
/// a correctly rounded float; comparisons are always decided exactly by the
/// backend, never perturbed. Sign tests go through `PartialOrd` against
/// [`Scalar::zero`] — see [`is_pos`] and [`abs_val`].
pub trait Scalar:
    Clone
    + PartialEq
    + PartialOrd
    + Debug
    + Display
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_int(n: i64) -> Self;
    fn from_ratio(num: i64, den: i64) -> Self;

    /// Embed an f64 exactly (every finite f64 is dyadic).
    fn from_f64_exact(x: f64) -> Result<Self>;

    fn to_f64(&self) -> f64;

    /// Nearest integer; ties may round to either neighbor.
    fn round_to_int(&self) -> BigInt;

    /// Product with a big integer. Exact for exact backends, correctly
    /// rounded at the value's working precision for floats.
    fn mul_big(&self, k: &BigInt) -> Self;

    /// Natural log of a (strictly positive) value, as f64. Works far outside
    /// the f64 exponent range.
    fn ln_f64(&self) -> f64;

    /// Whether this backend is an exact field.
    fn is_exact() -> bool;

    /// Coordinates of the value over Q with respect to the backend's rational
    /// basis (`[x]` for rationals, `[a, b]` for `a + b*sqrt(D)`). `None` for
    /// floats, where the question is undecidable.
    fn rational_coords(&self) -> Option<Vec<BigRational>>;
}

/// Strict positivity, decided exactly by the backend's ordering.
pub fn is_pos<S: Scalar>(x: &S) -> bool {
    *x > S::zero()
}

pub fn is_zero_val<S: Scalar>(x: &S) -> bool {
    *x == S::zero()
}

pub fn abs_val<S: Scalar>(x: &S) -> S {
    if *x < S::zero() {
        -x.clone()
    } else {
        x.clone()
    }
}

/// Natural log of a positive big integer, stable for arbitrarily many bits.
pub(crate) fn ln_bigint(n: &BigInt) -> f64 {
    debug_assert!(n.sign() == num_bigint::Sign::Plus);
    let bits = n.bits();
    if bits <= 53 {
        n.to_f64().unwrap().ln()
    } else {
        let shift = bits - 53;
        let top: BigInt = n >> shift;
        top.to_f64().unwrap().ln() + shift as f64 * std::f64::consts::LN_2
    }
}

/// Natural log of a positive rational with huge numerator/denominator.
pub(crate) fn ln_bigrational(r: &BigRational) -> f64 {
    ln_bigint(&r.numer().abs()) - ln_bigint(&r.denom().abs())
}

// Small vector helpers used throughout; lengths are tiny (d <= 8), so we
// favor clarity over allocation tuning.

pub fn vec_sum<S: Scalar>(v: &[S]) -> S {
    v.iter().fold(S::zero(), |acc, x| acc + x.clone())
}

pub fn vec_sub<S: Scalar>(a: &[S], b: &[S]) -> Vec<S> {
    a.iter().zip(b).map(|(x, y)| x.clone() - y.clone()).collect()
}

pub fn vec_dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    a.iter()
        .zip(b)
        .fold(S::zero(), |acc, (x, y)| acc + x.clone() * y.clone())
}

pub fn vec_scale<S: Scalar>(v: &[S], c: &S) -> Vec<S> {
    v.iter().map(|x| x.clone() * c.clone()).collect()
}

/// Normalize to unit coordinate sum (projective representative).
pub fn vec_normalized<S: Scalar>(v: &[S]) -> Vec<S> {
    let s = vec_sum(v);
    v.iter().map(|x| x.clone() / s.clone()).collect()
}

pub fn vec_to_f64<S: Scalar>(v: &[S]) -> Vec<f64> {
    v.iter().map(|x| x.to_f64()).collect()
}

/// Dot product of an integer vector with a scalar vector, exactly.
pub fn int_dot<S: Scalar>(ints: &[BigInt], v: &[S]) -> S {
    ints.iter()
        .zip(v)
        .fold(S::zero(), |acc, (k, x)| acc + x.mul_big(k))
}

impl Scalar for BigRational {
    fn zero() -> Self {
        num_traits::Zero::zero()
    }
    fn one() -> Self {
        num_traits::One::one()
    }
    fn from_int(n: i64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }
    fn from_f64_exact(x: f64) -> Result<Self> {
        BigRational::from_float(x)
            .ok_or_else(|| crate::Error::Invalid(format!("non-finite float {x}")))
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or_else(|| {
            // Saturating fallback for extreme magnitudes.
            let ln = ln_bigrational(self);
            let sign = if self.is_negative() { -1.0 } else { 1.0 };
            sign * ln.exp()
        })
    }
    fn round_to_int(&self) -> BigInt {
        self.round().to_integer()
    }
    fn mul_big(&self, k: &BigInt) -> Self {
        self * BigRational::from_integer(k.clone())
    }
    fn ln_f64(&self) -> f64 {
        debug_assert!(self.is_positive());
        ln_bigrational(self)
    }
    fn is_exact() -> bool {
        true
    }
    fn rational_coords(&self) -> Option<Vec<BigRational>> {
        Some(vec![self.clone()])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bigrational_scalar_basics() {
        let a = <BigRational as Scalar>::from_ratio(3, 10);
        let b = <BigRational as Scalar>::from_ratio(7, 10);
        assert_eq!(vec_sum(&[a.clone(), b.clone()]), Scalar::one());
        assert!(b > a);
        assert_eq!(a.round_to_int(), BigInt::from(0));
        assert_eq!(b.round_to_int(), BigInt::from(1));
        let half = <BigRational as Scalar>::from_ratio(1, 2);
        let r = half.round_to_int();
        assert!(r == BigInt::from(0) || r == BigInt::from(1));
    }

    #[test]
    fn ln_of_huge_rational() {
        let big: BigInt = BigInt::from(1) << 10_000;
        let r = BigRational::new(big.clone(), BigInt::from(1));
        let expect = 10_000.0 * std::f64::consts::LN_2;
        assert!((Scalar::ln_f64(&r) - expect).abs() < 1e-9 * expect);
        let tiny = BigRational::new(BigInt::from(1), big);
        assert!((Scalar::ln_f64(&tiny) + expect).abs() < 1e-9 * expect);
    }

    #[test]
    fn from_f64_is_exact() {
        let x = 0.1f64;
        let r = <BigRational as Scalar>::from_f64_exact(x).unwrap();
        assert_eq!(Scalar::to_f64(&r), x);
    }
}
