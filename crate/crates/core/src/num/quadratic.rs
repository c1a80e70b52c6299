//! Exact arithmetic in the real quadratic field Q(sqrt(D)).
//!
//! Values are `a + b*sqrt(D)` with rational `a`, `b` and a square-free-ish
//! positive non-square `D`. Signs, comparisons and nearest integers are
//! decided exactly (integer square-root bracketing), so orbits of quadratic
//! irrationals can be followed indefinitely without drift.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use super::{ln_bigrational, Scalar};
use crate::{Error, Result};

#[derive(Clone, PartialEq)]
pub struct Quad {
    a: BigRational,
    b: BigRational,
    /// Radicand; 0 encodes a plain rational (b == 0).
    d: u64,
}

fn is_square(n: u64) -> bool {
    let r = (n as f64).sqrt().round() as u64;
    r.checked_mul(r) == Some(n)
}

impl Quad {
    pub fn new(a: BigRational, b: BigRational, d: u64) -> Result<Self> {
        if b.is_zero() {
            return Ok(Quad { a, b, d: 0 });
        }
        if d < 2 || is_square(d) {
            return Err(Error::Invalid(format!("radicand {d} must be a non-square >= 2")));
        }
        Ok(Quad { a, b, d })
    }

    pub fn rational(a: BigRational) -> Self {
        Quad { a, b: <BigRational as Zero>::zero(), d: 0 }
    }

    /// sqrt(D) itself.
    pub fn sqrt_d(d: u64) -> Result<Self> {
        Quad::new(<BigRational as Zero>::zero(), <BigRational as One>::one(), d)
    }

    /// The golden ratio (1 + sqrt(5)) / 2.
    pub fn golden() -> Self {
        let half = BigRational::new(BigInt::one(), BigInt::from(2));
        Quad { a: half.clone(), b: half, d: 5 }
    }

    pub fn parts(&self) -> (&BigRational, &BigRational, u64) {
        (&self.a, &self.b, self.d)
    }

    fn promote(d1: u64, d2: u64) -> u64 {
        match (d1, d2) {
            (0, d) => d,
            (d, 0) => d,
            (a, b) => {
                assert_eq!(a, b, "mixed radicands {a} and {b} in one computation");
                a
            }
        }
    }

    /// Rational bracket `lo <= self <= hi` with `hi - lo <= |b| * 2^-k`.
    fn bracket(&self, k: u32) -> (BigRational, BigRational) {
        if self.b.is_zero() {
            return (self.a.clone(), self.a.clone());
        }
        let scaled: BigInt = BigInt::from(self.d) << (2 * k);
        let s = scaled.sqrt(); // floor of sqrt
        let den: BigInt = BigInt::one() << k;
        let lo_rt = BigRational::new(s.clone(), den.clone());
        let hi_rt = BigRational::new(s + 1, den);
        let (x, y) = (
            self.a.clone() + self.b.clone() * lo_rt,
            self.a.clone() + self.b.clone() * hi_rt,
        );
        if self.b.is_positive() {
            (x, y)
        } else {
            (y, x)
        }
    }

    /// Shrink the bracket until a predicate on (lo, hi) resolves.
    fn resolve<T>(&self, mut f: impl FnMut(&BigRational, &BigRational) -> Option<T>) -> T {
        let mut k = 32;
        loop {
            let (lo, hi) = self.bracket(k);
            if let Some(t) = f(&lo, &hi) {
                return t;
            }
            k *= 2;
            assert!(k <= 1 << 20, "quadratic bracketing failed to resolve");
        }
    }

    /// Exact zero test; `b != 0` implies irrational, hence nonzero.
    pub fn is_zero_exact(&self) -> bool {
        self.b.is_zero() && self.a.is_zero()
    }

    /// Exact strict-positivity test by sign cases on `a + b sqrt(D)`.
    pub fn is_positive_exact(&self) -> bool {
        let (a, b) = (&self.a, &self.b);
        if b.is_zero() {
            return a.is_positive();
        }
        if a.is_zero() {
            return b.is_positive();
        }
        let rad = BigRational::from_integer(BigInt::from(self.d));
        let asq = a * a;
        let bsqd = b * b * rad;
        match (a.is_positive(), b.is_positive()) {
            (true, true) => true,
            (false, false) => false,
            (true, false) => asq > bsqd,
            (false, true) => bsqd > asq,
        }
    }

    pub fn floor_int(&self) -> BigInt {
        if self.b.is_zero() {
            return self.a.floor().to_integer();
        }
        self.resolve(|lo, hi| {
            let (fl, fh) = (lo.floor().to_integer(), hi.floor().to_integer());
            (fl == fh).then_some(fl)
        })
    }
}

impl fmt::Debug for Quad {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Quad({} + {}*sqrt({}))", self.a, self.b, self.d)
    }
}

impl fmt::Display for Quad {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            write!(f, "{}", self.a)
        } else {
            write!(f, "{}+{}*sqrt({})", self.a, self.b, self.d)
        }
    }
}

impl Add for Quad {
    type Output = Quad;
    fn add(self, rhs: Quad) -> Quad {
        let d = Quad::promote(self.d, rhs.d);
        let b = self.b + rhs.b;
        let d = if b.is_zero() { 0 } else { d };
        Quad { a: self.a + rhs.a, b, d }
    }
}

impl Sub for Quad {
    type Output = Quad;
    fn sub(self, rhs: Quad) -> Quad {
        self + (-rhs)
    }
}

impl Neg for Quad {
    type Output = Quad;
    fn neg(self) -> Quad {
        Quad { a: -self.a, b: -self.b, d: self.d }
    }
}

impl Mul for Quad {
    type Output = Quad;
    fn mul(self, rhs: Quad) -> Quad {
        let d = Quad::promote(self.d, rhs.d);
        let rad = BigRational::from_integer(BigInt::from(d));
        let a = self.a.clone() * rhs.a.clone() + self.b.clone() * rhs.b.clone() * rad;
        let b = self.a * rhs.b + self.b * rhs.a;
        let d = if b.is_zero() { 0 } else { d };
        Quad { a, b, d }
    }
}

impl Div for Quad {
    type Output = Quad;
    fn div(self, rhs: Quad) -> Quad {
        let d = Quad::promote(self.d, rhs.d);
        let rad = BigRational::from_integer(BigInt::from(d));
        // conjugate: 1/(a + b sqrt d) = (a - b sqrt d)/(a^2 - b^2 d)
        let denom = rhs.a.clone() * rhs.a.clone() - rhs.b.clone() * rhs.b.clone() * rad;
        assert!(!denom.is_zero(), "division by zero in Q(sqrt(D))");
        let conj = Quad { a: rhs.a / denom.clone(), b: -rhs.b / denom, d: rhs.d };
        self * conj
    }
}

impl PartialOrd for Quad {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        let diff = self.clone() - other.clone();
        if diff.is_zero_exact() {
            Some(std::cmp::Ordering::Equal)
        } else if diff.is_positive_exact() {
            Some(std::cmp::Ordering::Greater)
        } else {
            Some(std::cmp::Ordering::Less)
        }
    }
}

impl Scalar for Quad {
    fn zero() -> Self {
        Quad::rational(<BigRational as Zero>::zero())
    }
    fn one() -> Self {
        Quad::rational(<BigRational as One>::one())
    }
    fn from_int(n: i64) -> Self {
        Quad::rational(BigRational::from_integer(BigInt::from(n)))
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        Quad::rational(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }
    fn from_f64_exact(x: f64) -> Result<Self> {
        Ok(Quad::rational(<BigRational as Scalar>::from_f64_exact(x)?))
    }
    fn to_f64(&self) -> f64 {
        if self.b.is_zero() {
            return Scalar::to_f64(&self.a);
        }
        // a and b can be huge while a + b sqrt(D) is tiny; bracket until the
        // enclosure is tight in absolute or relative terms before rounding.
        let abs_floor = BigRational::new(BigInt::one(), BigInt::one() << 340);
        let rel = BigRational::from_integer(BigInt::one() << 60);
        self.resolve(|lo, hi| {
            let gap = hi - lo;
            let scale = lo.abs().max(hi.abs());
            if gap.clone() * rel.clone() <= scale || gap <= abs_floor {
                let mid = (lo + hi) / BigRational::from_integer(BigInt::from(2));
                Some(Scalar::to_f64(&mid))
            } else {
                None
            }
        })
    }
    fn round_to_int(&self) -> BigInt {
        if self.b.is_zero() {
            return self.a.round().to_integer();
        }
        // nearest integer; a tie would force sqrt(D) rational, so none exists
        let half = <Quad as Scalar>::from_ratio(1, 2);
        (self.clone() + half).floor_int()
    }
    fn mul_big(&self, k: &BigInt) -> Self {
        let kr = BigRational::from_integer(k.clone());
        Quad { a: self.a.clone() * kr.clone(), b: self.b.clone() * kr, d: self.d }
    }
    fn ln_f64(&self) -> f64 {
        debug_assert!(self.is_positive_exact());
        if self.b.is_zero() {
            return ln_bigrational(&self.a);
        }
        // refine until the bracket is relatively tight, then take the log
        self.resolve(|lo, hi| {
            if !lo.is_positive() {
                return None;
            }
            let gap = hi - lo;
            let tight = gap * BigRational::from_integer(BigInt::from(1u64 << 60)) < *lo;
            tight.then(|| ln_bigrational(lo))
        })
    }
    fn is_exact() -> bool {
        true
    }
    fn rational_coords(&self) -> Option<Vec<BigRational>> {
        Some(vec![self.a.clone(), self.b.clone()])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn golden() -> Quad {
        Quad::golden()
    }

    #[test]
    fn golden_satisfies_its_equation() {
        let phi = golden();
        let lhs = phi.clone() * phi.clone();
        let rhs = phi.clone() + Quad::one();
        assert_eq!(lhs, rhs);
        assert!((Scalar::to_f64(&phi) - 1.618033988749895).abs() < 1e-12);
    }

    #[test]
    fn ordering_and_sign() {
        let phi = golden();
        assert!(phi > Quad::one());
        assert!(phi < Quad::from_int(2));
        let x = <Quad as Scalar>::from_int(1) - phi.clone(); // 1 - phi < 0
        assert!(!x.is_positive_exact());
        assert!(crate::num::is_pos(&crate::num::abs_val(&x)));
        // 7 - 4*sqrt(3) > 0 (49 > 48), tight sign case
        let y = Quad::new(
            BigRational::from_integer(7.into()),
            BigRational::from_integer(BigInt::from(-4)),
            3,
        )
        .unwrap();
        assert!(y.is_positive_exact());
    }

    #[test]
    fn floor_and_round() {
        let phi = golden();
        assert_eq!(phi.floor_int(), BigInt::from(1));
        assert_eq!(phi.round_to_int(), BigInt::from(2)); // 1.618 -> 2
        let s2 = Quad::sqrt_d(2).unwrap();
        assert_eq!(s2.round_to_int(), BigInt::from(1));
        let big = s2.mul_big(&BigInt::from(100));
        assert_eq!(big.round_to_int(), BigInt::from(141));
    }

    #[test]
    fn division_round_trip() {
        let phi = golden();
        let x = Quad::from_int(3) / phi.clone();
        assert_eq!(x * phi, Quad::from_int(3));
    }

    #[test]
    fn ln_matches_f64_for_moderate_values() {
        let phi = golden();
        assert!((Scalar::ln_f64(&phi) - 1.618033988749895f64.ln()).abs() < 1e-12);
        // tiny value far below f64 range: phi^-5000
        let mut x = Quad::one();
        let inv = Quad::one() / phi.clone();
        for _ in 0..5000 {
            x = x * inv.clone();
        }
        let expect = -5000.0 * 1.618033988749895f64.ln();
        assert!((Scalar::ln_f64(&x) - expect).abs() < 1e-6 * expect.abs());
    }

    #[test]
    fn square_radicand_rejected() {
        assert!(Quad::new(<BigRational as Zero>::zero(), <BigRational as One>::one(), 9).is_err());
    }
}
