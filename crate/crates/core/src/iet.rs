//! The phase-space interval exchange map `f(lambda, pi)`.
//!
//! Subintervals are closed on the left and open on the right. The translation
//! vector is `w = Omega_pi(lambda)`; construction cross-checks it against the
//! partial-sum breakpoints, which is the identity `w = w^b - w^t`.

use num_rational::BigRational;

use crate::combinatorics::{omega_maps, Permutation};
use crate::intmat::IMat;
use crate::num::{vec_sum, Scalar};
use crate::{Error, Result};

/// Positive length data indexed in alphabet order.
#[derive(Clone, Debug, PartialEq)]
pub struct LengthVector<S: Scalar> {
    values: Vec<S>,
}

impl<S: Scalar> LengthVector<S> {
    pub fn new(perm: &Permutation, values: Vec<S>) -> Result<Self> {
        if values.len() != perm.d() {
            return Err(Error::Invalid(format!(
                "expected {} lengths, got {}",
                perm.d(),
                values.len()
            )));
        }
        for (i, v) in values.iter().enumerate() {
            if !crate::num::is_pos(v) {
                return Err(Error::NonPositiveLength(perm.symbol(i).to_string()));
            }
        }
        Ok(LengthVector { values })
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn total(&self) -> S {
        vec_sum(&self.values)
    }
}

/// The interval exchange transformation built from `(lambda, pi)`.
#[derive(Clone, Debug)]
pub struct IetMap<S: Scalar> {
    perm: Permutation,
    lengths: Vec<S>,
    /// Translation per symbol, `w = Omega_pi(lambda)`.
    w: Vec<S>,
    /// Left endpoint of `I_alpha` (top order partial sums).
    top_left: Vec<S>,
    /// Left endpoint of `f(I_alpha)` (bottom order partial sums).
    bottom_left: Vec<S>,
    total: S,
}

pub fn build_iet<S: Scalar>(perm: &Permutation, lengths: &LengthVector<S>) -> Result<IetMap<S>> {
    perm.require_irreducible()?;
    let d = perm.d();
    let lam = lengths.values();

    let partial = |order: &[usize]| {
        let mut left = vec![S::zero(); d];
        let mut acc = S::zero();
        for &sym in order {
            left[sym] = acc.clone();
            acc = acc + lam[sym].clone();
        }
        (left, acc)
    };
    let (top_left, total) = partial(perm.top_order());
    let (bottom_left, total_b) = partial(perm.bottom_order());
    if total != total_b {
        return Err(Error::Internal("row totals disagree".into()));
    }

    // w from Omega directly; must equal the breakpoint difference exactly.
    let ts = omega_maps(perm)?;
    let w = apply_imat(&ts.omega, lam);
    for sym in 0..d {
        let diff = bottom_left[sym].clone() - top_left[sym].clone();
        if w[sym] != diff {
            return Err(Error::Internal(format!(
                "translation vector mismatch at '{}'",
                perm.symbol(sym)
            )));
        }
    }

    Ok(IetMap {
        perm: perm.clone(),
        lengths: lam.to_vec(),
        w,
        top_left,
        bottom_left,
        total,
    })
}

fn apply_imat<S: Scalar>(m: &IMat, v: &[S]) -> Vec<S> {
    m.mul_scalar_vec(v)
}

impl<S: Scalar> IetMap<S> {
    pub fn permutation(&self) -> &Permutation {
        &self.perm
    }

    pub fn lengths(&self) -> &[S] {
        &self.lengths
    }

    pub fn translation(&self) -> &[S] {
        &self.w
    }

    pub fn total(&self) -> &S {
        &self.total
    }

    /// Alphabet index of the subinterval containing `x`.
    pub fn interval_of(&self, x: &S) -> Result<usize> {
        if x < &S::zero() || x >= &self.total {
            return Err(Error::OutOfDomain);
        }
        for &sym in self.perm.top_order().iter().rev() {
            if x >= &self.top_left[sym] {
                return Ok(sym);
            }
        }
        Err(Error::OutOfDomain)
    }

    pub fn evaluate(&self, x: &S) -> Result<S> {
        let sym = self.interval_of(x)?;
        Ok(x.clone() + self.w[sym].clone())
    }

    pub fn evaluate_inverse(&self, y: &S) -> Result<S> {
        if y < &S::zero() || y >= &self.total {
            return Err(Error::OutOfDomain);
        }
        for &sym in self.perm.bottom_order().iter().rev() {
            if y >= &self.bottom_left[sym] {
                return Ok(y.clone() - self.w[sym].clone());
            }
        }
        Err(Error::OutOfDomain)
    }

    /// Whether `x` is a breakpoint (left endpoint of some subinterval other
    /// than 0).
    pub fn is_breakpoint(&self, x: &S) -> bool {
        self.top_left.iter().any(|l| l == x && l != &S::zero())
    }
}

/// Brute-force first return of the orbit of each `x` to `[0, ell)`.
///
/// Returns `(x, entry point, return time)` per input. This is the
/// phase-space oracle that induction steps are verified against; it iterates
/// the map blindly and knows nothing about renormalization.
pub fn first_return_oracle<S: Scalar>(
    f: &IetMap<S>,
    ell: &S,
    xs: &[S],
    cap: u64,
) -> Result<Vec<(S, S, u64)>> {
    if !crate::num::is_pos(ell) || ell > f.total() {
        return Err(Error::Invalid("ell must lie in (0, |lambda|]".into()));
    }
    let mut out = Vec::with_capacity(xs.len());
    for x in xs {
        if x >= ell {
            return Err(Error::Invalid("oracle points must lie in [0, ell)".into()));
        }
        let mut y = f.evaluate(x)?;
        let mut steps = 1u64;
        while &y >= ell {
            if steps >= cap {
                return Err(Error::CapExceeded(format!(
                    "first-return oracle exceeded {cap} iterations"
                )));
            }
            y = f.evaluate(&y)?;
            steps += 1;
        }
        out.push((x.clone(), y, steps));
    }
    Ok(out)
}

/// Q-linear independence of the length coordinates, decided exactly from the
/// backend's rational coordinates. Floats are rejected: the question is
/// undecidable there.
pub fn rational_independence<S: Scalar>(lv: &LengthVector<S>) -> Result<bool> {
    let coords: Option<Vec<Vec<BigRational>>> =
        lv.values().iter().map(|v| v.rational_coords()).collect();
    let coords = coords.ok_or_else(|| {
        Error::ExactOnly("rational independence requires an exact backend".into())
    })?;
    let d = coords.len();
    let width = coords.iter().map(Vec::len).max().unwrap_or(0);
    if width < d {
        // at most `width` independent vectors exist over Q
        return Ok(false);
    }
    // Clear denominators row by row and take the exact integer rank.
    let rows: Vec<Vec<num_bigint::BigInt>> = coords
        .iter()
        .map(|row| {
            let lcm = row.iter().fold(num_bigint::BigInt::from(1), |acc, r| {
                num_integer::lcm(acc, r.denom().clone())
            });
            (0..width)
                .map(|j| {
                    row.get(j)
                        .map(|r| r.numer() * (&lcm / r.denom()))
                        .unwrap_or_default()
                })
                .collect()
        })
        .collect();
    let mut im = IMat::zeros(d, width);
    for (i, row) in rows.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            im[(i, j)] = v.clone();
        }
    }
    Ok(im.rank() == d)
}
