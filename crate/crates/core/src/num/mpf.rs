//! Arbitrary-precision binary floats (astro-float) behind the [`Scalar`]
//! interface.
//!
//! Every value carries its working precision; binary operations round to the
//! larger of the operand precisions. New values created without context (via
//! `zero()`, `from_int`, ...) use the process-wide default precision, which
//! experiment drivers set once up front.

use astro_float::{BigFloat, RoundingMode, Sign, WORD_BIT_SIZE};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero as _;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::atomic::{AtomicUsize, Ordering};

use super::Scalar;
use crate::{Error, Result};

static DEFAULT_PREC: AtomicUsize = AtomicUsize::new(256);

/// Set the default mantissa precision (bits) for newly created [`Mpf`] values.
pub fn set_default_precision(bits: usize) {
    DEFAULT_PREC.store(bits.max(64), Ordering::Relaxed);
}

pub fn default_precision() -> usize {
    DEFAULT_PREC.load(Ordering::Relaxed)
}

const RM: RoundingMode = RoundingMode::ToEven;

#[derive(Clone)]
pub struct Mpf {
    v: BigFloat,
    prec: usize,
}

impl Mpf {
    pub fn with_precision(x: f64, prec: usize) -> Self {
        Mpf { v: BigFloat::from_f64(x, prec), prec }
    }

    pub fn precision(&self) -> usize {
        self.prec
    }

    pub fn is_zero_val(&self) -> bool {
        self.v.is_zero()
    }

    pub fn abs_val(&self) -> Self {
        Mpf { v: self.v.abs(), prec: self.prec }
    }

    pub fn from_bigint(n: &BigInt, prec: usize) -> Self {
        if n.is_zero() {
            return Mpf { v: BigFloat::from_i64(0, prec), prec };
        }
        let bits = n.bits();
        let words = n.magnitude().to_u64_digits();
        let nwords = words.len();
        let shift = (nwords as u64) * WORD_BIT_SIZE as u64 - bits;
        let shifted = n.magnitude() << shift;
        let mut w = shifted.to_u64_digits();
        w.resize(nwords, 0);
        let sign = if n.sign() == num_bigint::Sign::Minus { Sign::Neg } else { Sign::Pos };
        let v = BigFloat::from_raw_parts(&w, nwords * WORD_BIT_SIZE, sign, bits as i32, false);
        Mpf { v, prec }
    }

    fn raw(&self) -> Option<(Vec<u64>, Sign, i32)> {
        let (m, _p, s, e, _inexact) = self.v.as_raw_parts()?;
        Some((m.to_vec(), s, e))
    }

    /// Exact integer value; the caller guarantees `self` is an integer
    /// (e.g. the result of `floor`).
    fn integer_to_bigint(&self) -> BigInt {
        if self.v.is_zero() {
            return BigInt::zero();
        }
        let (words, sign, e) = self.raw().expect("finite value");
        let total_bits = words.len() as i64 * WORD_BIT_SIZE as i64;
        // value = 0.mantissa * 2^e
        let mag = num_bigint::BigUint::from_slice(
            &words
                .iter()
                .flat_map(|w| [*w as u32, (*w >> 32) as u32])
                .collect::<Vec<_>>(),
        );
        let shift = total_bits - e as i64;
        let mag = if shift >= 0 { mag >> shift } else { mag << (-shift) };
        let n = BigInt::from(mag);
        if sign == Sign::Neg {
            -n
        } else {
            n
        }
    }
}

impl fmt::Debug for Mpf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Mpf({:e} @{})", Scalar::to_f64(self), self.prec)
    }
}

impl fmt::Display for Mpf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.v)
    }
}

impl PartialEq for Mpf {
    fn eq(&self, other: &Self) -> bool {
        self.v == other.v
    }
}

impl PartialOrd for Mpf {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        self.v.partial_cmp(&other.v)
    }
}

macro_rules! binop {
    ($trait:ident, $meth:ident) => {
        impl $trait for Mpf {
            type Output = Mpf;
            fn $meth(self, rhs: Mpf) -> Mpf {
                let p = self.prec.max(rhs.prec);
                Mpf { v: self.v.$meth(&rhs.v, p, RM), prec: p }
            }
        }
    };
}

binop!(Add, add);
binop!(Sub, sub);
binop!(Mul, mul);
binop!(Div, div);

impl Neg for Mpf {
    type Output = Mpf;
    fn neg(self) -> Mpf {
        Mpf { v: self.v.neg(), prec: self.prec }
    }
}

impl Scalar for Mpf {
    fn zero() -> Self {
        Mpf { v: BigFloat::from_i64(0, default_precision()), prec: default_precision() }
    }
    fn one() -> Self {
        Mpf { v: BigFloat::from_i64(1, default_precision()), prec: default_precision() }
    }
    fn from_int(n: i64) -> Self {
        Mpf { v: BigFloat::from_i64(n, default_precision()), prec: default_precision() }
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        <Mpf as Scalar>::from_int(num) / <Mpf as Scalar>::from_int(den)
    }
    fn from_f64_exact(x: f64) -> Result<Self> {
        if !x.is_finite() {
            return Err(Error::Invalid(format!("non-finite float {x}")));
        }
        Ok(Mpf::with_precision(x, default_precision()))
    }
    fn to_f64(&self) -> f64 {
        if self.v.is_zero() {
            return 0.0;
        }
        let (words, sign, e) = match self.raw() {
            Some(r) => r,
            None => return f64::NAN,
        };
        let top = *words.last().unwrap();
        let next = if words.len() > 1 { words[words.len() - 2] } else { 0 };
        // fraction in [0.5, 1)
        let mant = top as f64 / 2f64.powi(64) + next as f64 / 2f64.powi(64).powi(2);
        let s = if sign == Sign::Neg { -1.0 } else { 1.0 };
        if e > 1030 {
            s * f64::INFINITY
        } else if e < -1070 {
            0.0
        } else {
            s * mant * 2f64.powi(e)
        }
    }
    fn round_to_int(&self) -> BigInt {
        let half = Mpf { v: BigFloat::from_f64(0.5, 64), prec: 64 };
        let shifted = self.clone() + half;
        Mpf { v: shifted.v.floor(), prec: self.prec }.integer_to_bigint()
    }
    fn mul_big(&self, k: &BigInt) -> Self {
        let kb = Mpf::from_bigint(k, k.bits().max(64) as usize);
        let p = self.prec;
        Mpf { v: self.v.mul(&kb.v, p, RM), prec: p }
    }
    fn ln_f64(&self) -> f64 {
        debug_assert!(self.v.is_positive() && !self.v.is_zero());
        let (words, _sign, e) = self.raw().expect("positive value");
        let top = *words.last().unwrap();
        let next = if words.len() > 1 { words[words.len() - 2] } else { 0 };
        let mant = top as f64 / 2f64.powi(64) + next as f64 / 2f64.powi(64).powi(2);
        mant.ln() + e as f64 * std::f64::consts::LN_2
    }
    fn is_exact() -> bool {
        false
    }
    fn rational_coords(&self) -> Option<Vec<BigRational>> {
        None
    }
}
