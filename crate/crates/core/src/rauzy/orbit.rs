//! The induction map `Q_R`, its projectivization `R_R`, and an orbit driver
//! that exposes the per-step arrow data for cocycle accumulation.

use super::{ArrowKind, RauzyArrow, RauzyPath};
use crate::combinatorics::Permutation;
use crate::num::{vec_normalized, vec_sum, Scalar};
use crate::{Error, Result};

/// One Rauzy induction step.
///
/// The winner is resolved by comparing the last top and bottom lengths; the
/// losing coordinate is rewritten to their difference and the permutation
/// follows the arrow. Ties are a typed error, never perturbed.
pub fn induction_step<S: Scalar>(
    lambda: &[S],
    p: &Permutation,
) -> Result<(Vec<S>, Permutation, RauzyArrow)> {
    p.require_irreducible()?;
    let (at, ab) = (p.alpha_t(), p.alpha_b());
    let kind = match lambda[at].partial_cmp(&lambda[ab]) {
        Some(std::cmp::Ordering::Greater) => ArrowKind::Top,
        Some(std::cmp::Ordering::Less) => ArrowKind::Bottom,
        _ => return Err(Error::Tie),
    };
    let arrow = RauzyArrow::from_kind(p, kind)?;
    let mut out = lambda.to_vec();
    out[arrow.winner] =
        lambda[arrow.winner].clone() - lambda[arrow.loser].clone();
    Ok((out, arrow.target.clone(), arrow))
}

/// Induction followed by normalization to unit total length.
pub fn renormalization_step<S: Scalar>(
    lambda: &[S],
    p: &Permutation,
) -> Result<(Vec<S>, Permutation, RauzyArrow)> {
    let (lam, perm, arrow) = induction_step(lambda, p)?;
    Ok((vec_normalized(&lam), perm, arrow))
}

/// Per-step record emitted by [`Orbit::step`]; indices are alphabet indices,
/// enough for callers to update sparse accumulators.
#[derive(Clone, Debug)]
pub struct StepRecord {
    pub kind: ArrowKind,
    pub winner: usize,
    pub loser: usize,
    /// `ln |lambda before| - ln |lambda after|`, one step of return time.
    pub log_shrink: f64,
}

/// A renormalization orbit driver.
///
/// Exact backends keep lambda unnormalized (induction only), which keeps
/// every coordinate a fixed-denominator exact value; float backends
/// renormalize each step to stay in range. Both expose the same projective
/// dynamics.
#[derive(Clone, Debug)]
pub struct Orbit<S: Scalar> {
    pub lambda: Vec<S>,
    pub perm: Permutation,
    pub steps: u64,
    total: S,
    normalize: bool,
}

impl<S: Scalar> Orbit<S> {
    pub fn new(lambda: Vec<S>, perm: Permutation) -> Result<Self> {
        perm.require_irreducible()?;
        if lambda.len() != perm.d() {
            return Err(Error::Invalid("lambda length mismatch".into()));
        }
        if lambda.iter().any(|x| !crate::num::is_pos(x)) {
            return Err(Error::Invalid("lambda must be positive".into()));
        }
        let (lambda, total) = if S::is_exact() {
            let total = vec_sum(&lambda);
            (lambda, total)
        } else {
            (vec_normalized(&lambda), S::one())
        };
        Ok(Orbit { lambda, perm, steps: 0, total, normalize: !S::is_exact() })
    }

    pub fn total(&self) -> &S {
        &self.total
    }

    /// Normalized copy of the current projective point.
    pub fn normalized_lambda(&self) -> Vec<S> {
        if self.normalize {
            self.lambda.clone()
        } else {
            vec_normalized(&self.lambda)
        }
    }

    pub fn step(&mut self) -> Result<StepRecord> {
        let before_ln = self.total.ln_f64();
        let (at, ab) = (self.perm.alpha_t(), self.perm.alpha_b());
        let kind = match self.lambda[at].partial_cmp(&self.lambda[ab]) {
            Some(std::cmp::Ordering::Greater) => ArrowKind::Top,
            Some(std::cmp::Ordering::Less) => ArrowKind::Bottom,
            _ => return Err(Error::Tie),
        };
        let arrow = RauzyArrow::from_kind(&self.perm, kind)?;
        self.lambda[arrow.winner] = self.lambda[arrow.winner].clone()
            - self.lambda[arrow.loser].clone();
        // the interval shrinks by exactly the loser's length
        self.total = self.total.clone() - self.lambda[arrow.loser].clone();
        let after_ln = self.total.ln_f64();
        if self.normalize {
            let t = self.total.clone();
            for x in self.lambda.iter_mut() {
                *x = x.clone() / t.clone();
            }
            self.total = S::one();
        }
        self.perm = arrow.target.clone();
        self.steps += 1;
        Ok(StepRecord {
            kind,
            winner: arrow.winner,
            loser: arrow.loser,
            log_shrink: before_ln - after_ln,
        })
    }
}

/// Follow the renormalization orbit until the accumulated matrix is
/// entrywise positive; returns that path.
pub fn positive_path<S: Scalar>(
    p: &Permutation,
    lambda: &[S],
    cap: u64,
) -> Result<RauzyPath> {
    let mut orbit = Orbit::new(lambda.to_vec(), p.clone())?;
    let mut path = RauzyPath::identity(p);
    for _ in 0..cap {
        let rec = orbit.step()?;
        let arrow = RauzyArrow {
            source: path.end().clone(),
            target: orbit.perm.clone(),
            kind: rec.kind,
            winner: rec.winner,
            loser: rec.loser,
        };
        path.push(&arrow);
        if path.matrix().is_entrywise_positive() {
            return Ok(path);
        }
    }
    Err(Error::CapExceeded(format!("no positive matrix within {cap} steps")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intmat::IMat;
    use crate::num::Quad;
    use num_bigint::BigInt;
    use num_rational::BigRational;

    fn rat(n: i64, d: i64) -> BigRational {
        <BigRational as Scalar>::from_ratio(n, d)
    }

    fn p(s: &str) -> Permutation {
        s.parse().unwrap()
    }

    #[test]
    fn d3_reversal_step() {
        let perm = p("a b c / c b a");
        let lam = vec![rat(3, 10), rat(2, 10), rat(5, 10)];
        let (lam2, p2, arrow) = induction_step(&lam, &perm).unwrap();
        assert_eq!(arrow.kind, ArrowKind::Top);
        assert_eq!(lam2, vec![rat(3, 10), rat(2, 10), rat(2, 10)]);
        assert_eq!(p2, p("a b c / c a b"));
    }

    #[test]
    fn d2_euclid_and_matrix_identity() {
        let perm = p("a b / b a");
        let lam = vec![rat(3, 1), rat(5, 1)];
        let (lam2, _, arrow) = induction_step(&lam, &perm).unwrap();
        assert_eq!(arrow.kind, ArrowKind::Top);
        assert_eq!(lam2, vec![rat(3, 1), rat(2, 1)]);
        // lambda = B^* lambda'
        let b = arrow.matrix();
        assert_eq!(b, {
            let mut m = IMat::identity(2);
            m[(0, 1)] = BigInt::from(1);
            m
        });
        let recon = b.transpose().mul_scalar_vec(&lam2);
        assert_eq!(recon, lam);
    }

    #[test]
    fn tie_is_typed_error() {
        let perm = p("a b / b a");
        let lam = vec![rat(1, 1), rat(1, 1)];
        assert!(matches!(induction_step(&lam, &perm), Err(Error::Tie)));
    }

    #[test]
    fn renormalization_keeps_unit_total() {
        let perm = p("a b / b a");
        let (lam2, _, _) =
            renormalization_step(&[rat(3, 10), rat(7, 10)], &perm).unwrap();
        assert_eq!(lam2, vec![rat(3, 7), rat(4, 7)]);
        assert_eq!(vec_sum(&lam2), rat(1, 1));
    }

    #[test]
    fn golden_orbit_is_period_two() {
        let perm = p("a b / b a");
        let phi = Quad::golden();
        let mut orbit = Orbit::new(vec![Quad::one(), phi], perm).unwrap();
        let mut kinds = Vec::new();
        for _ in 0..10 {
            kinds.push(orbit.step().unwrap().kind);
        }
        let expect: Vec<ArrowKind> = (0..10)
            .map(|i| if i % 2 == 0 { ArrowKind::Top } else { ArrowKind::Bottom })
            .collect();
        assert_eq!(kinds, expect);
        // the ratio lambda_b / lambda_a returns to phi every two steps
        let ratio = orbit.lambda[1].clone() / orbit.lambda[0].clone();
        assert_eq!(ratio, Quad::golden());
    }

    #[test]
    fn positive_path_golden_after_two() {
        let perm = p("a b / b a");
        let path = positive_path(&perm, &[Quad::one(), Quad::golden()], 100).unwrap();
        assert_eq!(path.len(), 2);
        assert_eq!(path.matrix(), &IMat::from_i64_rows(&[vec![1, 1], vec![1, 2]]));
    }

    #[test]
    fn positive_path_d3_seeded() {
        use crate::sampling::{sample_simplex, stream_rng};
        let perm = p("a b c / c b a");
        let mut rng = stream_rng(42, 0);
        let lam: Vec<BigRational> = sample_simplex(&mut rng, 3)
            .into_iter()
            .map(|x| <BigRational as Scalar>::from_f64_exact(x).unwrap())
            .collect();
        let path = positive_path(&perm, &lam, 10_000).unwrap();
        assert!(path.matrix().is_entrywise_positive());
        assert_eq!(path.matrix().det(), BigInt::from(1));
    }

    #[test]
    fn cocycle_identity_along_exact_orbit() {
        // lambda^(n) = (B_gamma^*)^{-1} lambda, i.e. B_gamma^T lambda^(n) = lambda
        let perm = p("a b c d / d c b a");
        let lam = vec![rat(13, 97), rat(29, 97), rat(31, 97), rat(24, 97)];
        let mut orbit = Orbit::new(lam.clone(), perm.clone()).unwrap();
        let mut path = RauzyPath::identity(&perm);
        for _ in 0..200 {
            let rec = match orbit.step() {
                Ok(r) => r,
                Err(Error::Tie) => break,
                Err(e) => panic!("{e}"),
            };
            let arrow = RauzyArrow {
                source: path.end().clone(),
                target: orbit.perm.clone(),
                kind: rec.kind,
                winner: rec.winner,
                loser: rec.loser,
            };
            path.push(&arrow);
            let recon = path.matrix().transpose().mul_scalar_vec(&orbit.lambda);
            assert_eq!(recon, lam);
        }
        assert!(orbit.steps > 20);
    }
}
