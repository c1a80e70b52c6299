//! Lines near the origin and their children under cocycle matrices, the
//! weak-stable survival process, and the Veech-criterion weak-mixing scanner.
//!
//! A line `J` (distance `||J|| < delta` from the origin, direction in the
//! closed positive cone) is pushed through an integer matrix `A`; components
//! of `A(J ∩ B_delta(0))` meeting a ball `B_delta(c)` around a nonzero
//! lattice point become non-trivial children `A·J - c`, and `A·J` itself is
//! the trivial child when it stays within `delta` of the origin. A parameter
//! survives generation `m` while some lineage line is still alive.
//!
//! Lattice distances along the Veech criterion are propagated as residues
//! mod `Z^d`: integer matrices commute with the lattice, so the residue can
//! be re-reduced after every arrow. With exact scalar backends the residues
//! carry no drift at all.

use num_bigint::BigInt;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::HashSet;

use crate::combinatorics::singularity_profile;
use crate::intmat::IMat;
use crate::num::{int_dot, Scalar};
use crate::rauzy::{first_return, Orbit, SimplexSystem};
use crate::sampling::stream_rng;
use crate::stats::{bootstrap_ci, linear_fit, wilson_interval};
use crate::{Error, Result};

/// Euclidean distance from a point to the integer lattice.
pub fn distance_to_lattice(v: &[f64]) -> f64 {
    v.iter().map(|x| (x - x.round()).powi(2)).sum::<f64>().sqrt()
}

/// An affine line not through the origin, with direction in the closed
/// positive projective cone.
#[derive(Clone, Debug)]
pub struct LineSegment {
    /// Unit direction, sign-normalized into the positive cone.
    pub direction: Vec<f64>,
    /// The point of the line closest to the origin (orthogonal to the
    /// direction).
    pub offset: Vec<f64>,
    /// `||J||`, the distance from the line to the origin.
    pub norm: f64,
}

impl LineSegment {
    /// Line through `p` with direction `dir`.
    pub fn from_point_direction(p: &[f64], dir: &[f64]) -> Result<Self> {
        let d = p.len();
        if dir.len() != d || d == 0 {
            return Err(Error::Invalid("dimension mismatch".into()));
        }
        let len = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !(len.is_finite() && len > 0.0) {
            return Err(Error::Invalid("zero or non-finite direction".into()));
        }
        let mut u: Vec<f64> = dir.iter().map(|x| x / len).collect();
        if u.iter().all(|&x| x <= 1e-14) {
            u.iter_mut().for_each(|x| *x = -*x);
        }
        if u.iter().any(|&x| x < -1e-12) {
            return Err(Error::Invalid(
                "direction does not projectivize into the positive cone".into(),
            ));
        }
        let t: f64 = p.iter().zip(&u).map(|(a, b)| a * b).sum();
        let offset: Vec<f64> = p.iter().zip(&u).map(|(a, b)| a - t * b).collect();
        let norm = offset.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm < 1e-300 {
            return Err(Error::Invalid("line passes through the origin".into()));
        }
        Ok(LineSegment { direction: u, offset, norm })
    }

    pub fn dim(&self) -> usize {
        self.direction.len()
    }

    pub fn point_at(&self, t: f64) -> Vec<f64> {
        self.offset.iter().zip(&self.direction).map(|(o, u)| o + t * u).collect()
    }

    /// Endpoints of the chord `J ∩ B_delta(0)`; requires `||J|| < delta`.
    pub fn chord(&self, delta: f64) -> Option<(Vec<f64>, Vec<f64>)> {
        if self.norm >= delta {
            return None;
        }
        let half = (delta * delta - self.norm * self.norm).sqrt();
        Some((self.point_at(-half), self.point_at(half)))
    }
}

/// Children of a line under one matrix application.
#[derive(Clone, Debug)]
pub struct ChildSet {
    pub trivial: Option<LineSegment>,
    pub nontrivial: Vec<(LineSegment, Vec<BigInt>)>,
}

impl ChildSet {
    /// The count `phi_delta(A, J)` of non-trivial children.
    pub fn phi(&self) -> usize {
        self.nontrivial.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trivial.is_none() && self.nontrivial.is_empty()
    }

    pub fn all_lines(&self) -> Vec<LineSegment> {
        self.trivial.iter().cloned().chain(self.nontrivial.iter().map(|(l, _)| l.clone())).collect()
    }
}

fn mat_apply(a: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    a.iter().map(|row| row.iter().zip(v).map(|(x, y)| x * y).sum()).collect()
}

fn point_segment_distance(c: &[f64], q0: &[f64], q1: &[f64]) -> f64 {
    let seg: Vec<f64> = q1.iter().zip(q0).map(|(a, b)| a - b).collect();
    let len2: f64 = seg.iter().map(|x| x * x).sum();
    let t = if len2 == 0.0 {
        0.0
    } else {
        (c.iter().zip(q0).zip(&seg).map(|((ci, qi), si)| (ci - qi) * si).sum::<f64>() / len2)
            .clamp(0.0, 1.0)
    };
    c.iter()
        .zip(q0)
        .zip(&seg)
        .map(|((ci, qi), si)| (ci - (qi + t * si)).powi(2))
        .sum::<f64>()
        .sqrt()
}

const WALK_STEP: f64 = 0.2;

/// Enumerate the children of `J` under the non-negative integer matrix `A`.
///
/// Lattice candidates are found by walking the image segment with step 0.2
/// and rounding with `{-1,0,1}` neighbor offsets; every ball with
/// `dist(segment, c) < delta <= 1/10` is within 0.75 of some sample point,
/// so the walk is exhaustive. Each candidate is then confirmed with the
/// exact point-to-segment distance.
pub fn children(j: &LineSegment, a: &IMat, delta: f64) -> Result<ChildSet> {
    if !(0.0 < delta && delta < 0.1) {
        return Err(Error::Invalid("delta must lie in (0, 1/10)".into()));
    }
    if j.norm >= delta {
        return Err(Error::Invalid("children require ||J|| < delta".into()));
    }
    let af = a.to_f64_rows();
    let max_entry = af.iter().flatten().fold(0.0f64, |m, &x| m.max(x.abs()));
    if !max_entry.is_finite() || max_entry > 1e15 {
        return Err(Error::Precision(
            "matrix entries too large for f64 lattice geometry".into(),
        ));
    }
    let (p0, p1) = j.chord(delta).expect("norm < delta");
    let q0 = mat_apply(&af, &p0);
    let q1 = mat_apply(&af, &p1);
    let dir_img = mat_apply(&af, &j.direction);

    // trivial child: the full image line, kept when it stays delta-close to 0
    let image_line = LineSegment::from_point_direction(&q0, &dir_img)?;
    let trivial = (image_line.norm < delta).then_some(image_line.clone());

    // candidate lattice anchors along the image segment
    let seg_len: f64 =
        q1.iter().zip(&q0).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    let steps = (seg_len / WALK_STEP).ceil() as u64 + 1;
    if steps > 2_000_000 {
        return Err(Error::CapExceeded("image segment too long to enumerate".into()));
    }
    let d = j.dim();
    let mut candidates: HashSet<Vec<i64>> = HashSet::new();
    for k in 0..=steps {
        let t = k as f64 / steps as f64;
        let pt: Vec<f64> = q0.iter().zip(&q1).map(|(a, b)| a + t * (b - a)).collect();
        let base: Vec<i64> = pt.iter().map(|x| x.round() as i64).collect();
        let mut offs = vec![0i64; d];
        loop {
            candidates.insert(base.iter().zip(&offs).map(|(b, o)| b + o).collect());
            // odometer over {-1,0,1}^d
            let mut i = 0;
            loop {
                if i == d {
                    break;
                }
                if offs[i] < 1 {
                    offs[i] += 1;
                    break;
                }
                offs[i] = -1;
                i += 1;
            }
            if i == d {
                break;
            }
        }
    }

    let mut nontrivial = Vec::new();
    let mut sorted: Vec<Vec<i64>> = candidates.into_iter().collect();
    sorted.sort();
    for c in sorted {
        if c.iter().all(|&x| x == 0) {
            continue;
        }
        let cf: Vec<f64> = c.iter().map(|&x| x as f64).collect();
        if point_segment_distance(&cf, &q0, &q1) < delta {
            let shifted: Vec<f64> = q0.iter().zip(&cf).map(|(q, c)| q - c).collect();
            let child = LineSegment::from_point_direction(&shifted, &dir_img)?;
            nontrivial.push((child, c.iter().map(|&x| BigInt::from(x)).collect()));
        }
    }
    Ok(ChildSet { trivial, nontrivial })
}

/// Exact-residue tracker for `A_n . v mod Z^d` along an orbit.
#[derive(Clone, Debug)]
pub struct ResidueTracker<S: Scalar> {
    residue: Vec<S>,
}

impl<S: Scalar> ResidueTracker<S> {
    pub fn new(v: Vec<S>) -> Self {
        let mut t = ResidueTracker { residue: v };
        for i in 0..t.residue.len() {
            t.reduce(i);
        }
        t
    }

    fn reduce(&mut self, i: usize) {
        let r = self.residue[i].round_to_int();
        if r != BigInt::from(0) {
            self.residue[i] = self.residue[i].clone() - S::one().mul_big(&r);
        }
    }

    /// Apply one arrow `I + E_{loser, winner}` and re-reduce.
    pub fn apply_arrow(&mut self, winner: usize, loser: usize) {
        self.residue[loser] = self.residue[loser].clone() + self.residue[winner].clone();
        self.reduce(loser);
    }

    pub fn distance(&self) -> f64 {
        let v: Vec<f64> = self.residue.iter().map(Scalar::to_f64).collect();
        distance_to_lattice(&v)
    }

    pub fn is_integral(&self) -> bool {
        self.residue.iter().all(|x| {
            if S::is_exact() {
                crate::num::is_zero_val(x)
            } else {
                x.to_f64().abs() < 1e-14
            }
        })
    }
}

/// Per-step membership of the weak-stable set `W^s_{delta, n}`: iterate the
/// accelerated cocycle and require the residue to stay `delta`-close to the
/// lattice after every return, for `n_max * n_block` returns.
pub fn weak_stable_membership<S: Scalar>(
    sys: &SimplexSystem,
    x0: Vec<S>,
    w: Vec<S>,
    delta: f64,
    n_max: u64,
    n_block: u64,
    cap: u64,
) -> Result<(bool, Option<u64>)> {
    let w_f64: Vec<f64> = w.iter().map(Scalar::to_f64).collect();
    if w_f64.iter().map(|x| x * x).sum::<f64>().sqrt() >= delta {
        return Err(Error::Invalid("w must satisfy ||w|| < delta".into()));
    }
    let mut orbit = Orbit::new(x0, sys.base().clone())?;
    let mut tracker = ResidueTracker::new(w);
    for k in 1..=n_max * n_block {
        let rec = first_return_with_tracker(sys, &mut orbit, &mut tracker, cap)?;
        let _ = rec;
        if tracker.distance() >= delta {
            return Ok((false, Some(k)));
        }
    }
    Ok((true, None))
}

fn first_return_with_tracker<S: Scalar>(
    sys: &SimplexSystem,
    orbit: &mut Orbit<S>,
    tracker: &mut ResidueTracker<S>,
    cap: u64,
) -> Result<u64> {
    let mut steps = 0u64;
    loop {
        if steps >= cap {
            return Err(Error::CapExceeded("no return within cap".into()));
        }
        let rec = orbit.step()?;
        tracker.apply_arrow(rec.winner, rec.loser);
        steps += 1;
        if orbit.perm == *sys.base() && sys.contains(&orbit.lambda) {
            return Ok(steps);
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SurvivalFit {
    pub log_c: f64,
    pub kappa: f64,
    pub kappa_ci_low: f64,
    pub kappa_ci_high: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SurvivalStats {
    pub m_values: Vec<u64>,
    pub p_hat: Vec<f64>,
    pub ci: Vec<(f64, f64)>,
    pub fit: Option<SurvivalFit>,
    /// Samples that hit the population cap (counted as surviving).
    pub flagged: u64,
    pub samples: u64,
    pub seed: u64,
    pub delta: f64,
    pub n_block: u64,
}

/// Monte Carlo estimate of the survival probabilities `mu(Gamma_delta^m(J))`
/// for the blockwise children process, with an exponential-decay fit.
#[allow(clippy::too_many_arguments)]
pub fn survival_probability<S: Scalar>(
    sys: &SimplexSystem,
    j: &LineSegment,
    delta: f64,
    m_max: u64,
    n_block: u64,
    samples: u64,
    seed: u64,
    pop_cap: usize,
    cap: u64,
) -> Result<SurvivalStats> {
    if !(0.0 < delta && delta < 0.1) {
        return Err(Error::Invalid("delta must lie in (0, 1/10)".into()));
    }
    if j.dim() != sys.d() {
        return Err(Error::Invalid("line dimension mismatch".into()));
    }

    // ||J|| > delta: the survival sets are empty from generation 0 on
    if j.norm >= delta {
        let m_values: Vec<u64> = (0..=m_max).collect();
        return Ok(SurvivalStats {
            p_hat: vec![0.0; m_values.len()],
            ci: m_values.iter().map(|_| (0.0, 0.0)).collect(),
            m_values,
            fit: None,
            flagged: 0,
            samples,
            seed,
            delta,
            n_block,
        });
    }

    // survived_until[i] = largest m with the sample surviving at m
    let results: Vec<(u64, bool)> = (0..samples)
        .into_par_iter()
        .map(|i| -> Result<(u64, bool)> {
            let mut rng = stream_rng(seed, i);
            let lambda: Vec<S> = sys.sample_point(&mut rng);
            let mut orbit = Orbit::new(lambda, sys.base().clone())?;
            let mut population = vec![j.clone()];
            let mut survived = m_max;
            let mut flagged = false;
            for m in 1..=m_max {
                // compose the next block of n_block return matrices
                let mut block = IMat::identity(sys.d());
                for _ in 0..n_block {
                    let rec = first_return(sys, &mut orbit, cap)?;
                    block = rec.path.matrix().mul(&block);
                }
                let mut next: Vec<LineSegment> = Vec::new();
                let mut keys: HashSet<Vec<i64>> = HashSet::new();
                for line in &population {
                    let cs = children(line, &block, delta)?;
                    for child in cs.all_lines() {
                        // dedup lines that coincide geometrically
                        let key: Vec<i64> = child
                            .offset
                            .iter()
                            .chain(&child.direction)
                            .map(|x| (x * 1e9).round() as i64)
                            .collect();
                        if keys.insert(key) {
                            next.push(child);
                        }
                    }
                    if next.len() > pop_cap {
                        flagged = true;
                        break;
                    }
                }
                if flagged {
                    break;
                }
                if next.is_empty() {
                    survived = m - 1;
                    break;
                }
                population = next;
            }
            Ok((survived, flagged))
        })
        .collect::<Result<Vec<_>>>()?;

    let flagged = results.iter().filter(|(_, f)| *f).count() as u64;
    let survived: Vec<u64> = results.iter().map(|(s, _)| *s).collect();
    let m_values: Vec<u64> = (0..=m_max).collect();
    let counts: Vec<u64> = m_values
        .iter()
        .map(|&m| survived.iter().filter(|&&s| s >= m).count() as u64)
        .collect();
    let p_hat: Vec<f64> = counts.iter().map(|&c| c as f64 / samples as f64).collect();
    let ci: Vec<(f64, f64)> = counts.iter().map(|&c| wilson_interval(c, samples)).collect();

    // fit ln p ~ log_c - kappa m over the strictly positive tail
    let xs: Vec<f64> = m_values
        .iter()
        .zip(&p_hat)
        .filter(|(_, &p)| p > 0.0)
        .map(|(&m, _)| m as f64)
        .collect();
    let ys: Vec<f64> = p_hat.iter().filter(|&&p| p > 0.0).map(|p| p.ln()).collect();
    let fit = if xs.len() >= 3 {
        linear_fit(&xs, &ys, None).map(|(a, b)| {
            let mut rng = stream_rng(seed, u64::MAX);
            let ci = bootstrap_ci(&mut rng, survived.len(), 200, |idx| {
                let mut bxs = Vec::new();
                let mut bys = Vec::new();
                for &m in &m_values {
                    let c = idx.iter().filter(|&&i| survived[i] >= m).count();
                    if c > 0 {
                        bxs.push(m as f64);
                        bys.push((c as f64 / idx.len() as f64).ln());
                    }
                }
                linear_fit(&bxs, &bys, None).map(|(_, s)| -s)
            })
            .unwrap_or((f64::NEG_INFINITY, f64::INFINITY));
            SurvivalFit { log_c: a, kappa: -b, kappa_ci_low: ci.0, kappa_ci_high: ci.1 }
        })
    } else {
        None
    };

    Ok(SurvivalStats {
        m_values,
        p_hat,
        ci,
        fit,
        flagged,
        samples,
        seed,
        delta,
        n_block,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    /// Distances tend to zero along visits: consistent with an eigenvalue.
    Candidate,
    NotCandidate,
    /// `t h` is an integer vector; excluded separately by ergodicity.
    IntegerCase,
    /// `(1,...,1) not in H(pi)`: the scan short-circuits.
    ExcludedByOneVector,
}

#[derive(Clone, Debug, Serialize)]
pub struct VeechTrace {
    pub distances: Vec<f64>,
    pub visits: u64,
    pub tail_max: f64,
    pub verdict: Verdict,
    pub steps_used: u64,
}

/// Track `||B_n . t h||_{R^d/Z^d}` at the first `n_visits` visit times of
/// the renormalization orbit to `Delta x {base}`.
pub fn veech_criterion_test<S: Scalar>(
    sys: &SimplexSystem,
    x0: Vec<S>,
    t: &S,
    h: &[S],
    n_visits: u64,
    tol: f64,
    cap: u64,
) -> Result<VeechTrace> {
    // h must lie in H(pi): orthogonal to every b^s
    let prof = singularity_profile(sys.base())?;
    for b in &prof.b_vectors {
        let ints: Vec<BigInt> = b.iter().map(|&k| BigInt::from(k)).collect();
        let dot = int_dot(&ints, h);
        let ok = if S::is_exact() {
            crate::num::is_zero_val(&dot)
        } else {
            dot.to_f64().abs() <= 1e-10
        };
        if !ok {
            return Err(Error::Invalid("h is not in H(pi)".into()));
        }
    }
    let th: Vec<S> = h.iter().map(|x| x.clone() * t.clone()).collect();
    let mut tracker = ResidueTracker::new(th);
    if tracker.is_integral() {
        return Ok(VeechTrace {
            distances: vec![0.0; n_visits as usize],
            visits: n_visits,
            tail_max: 0.0,
            verdict: Verdict::IntegerCase,
            steps_used: 0,
        });
    }

    let mut orbit = Orbit::new(x0, sys.base().clone())?;
    let mut distances = Vec::with_capacity(n_visits as usize);
    if sys.contains(&orbit.lambda) {
        distances.push(tracker.distance());
    }
    let mut steps = 0u64;
    while (distances.len() as u64) < n_visits {
        if steps >= cap {
            return Err(Error::CapExceeded(format!(
                "only {} visits within {cap} steps",
                distances.len()
            )));
        }
        let rec = orbit.step()?;
        tracker.apply_arrow(rec.winner, rec.loser);
        steps += 1;
        if orbit.perm == *sys.base() && sys.contains(&orbit.lambda) {
            distances.push(tracker.distance());
        }
    }
    let tail_len = (distances.len() as u64).div_ceil(4) as usize;
    let tail_max = distances[distances.len() - tail_len..]
        .iter()
        .fold(0.0f64, |m, &x| m.max(x));
    let verdict = if tail_max < tol { Verdict::Candidate } else { Verdict::NotCandidate };
    Ok(VeechTrace { distances, visits: n_visits, tail_max, verdict, steps_used: steps })
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanRow {
    pub t: f64,
    pub t_repr: String,
    pub visits_used: u64,
    pub tail_max_distance: f64,
    pub verdict: Verdict,
}

/// Run the Veech criterion with `h = (1,...,1)` over a grid of `t` values.
/// When `(1,...,1)` is not in `H(pi)` the scan short-circuits: the dichotomy
/// already excludes eigenvalues.
pub fn weak_mixing_scan<S: Scalar>(
    sys: &SimplexSystem,
    x0: Vec<S>,
    t_grid: &[S],
    n_visits: u64,
    tol: f64,
    cap: u64,
) -> Result<Vec<ScanRow>> {
    let (_, one_in_h) = crate::combinatorics::check_one_vector_rule(sys.base())?;
    if !one_in_h {
        return Ok(t_grid
            .iter()
            .map(|t| ScanRow {
                t: t.to_f64(),
                t_repr: t.to_string(),
                visits_used: 0,
                tail_max_distance: f64::NAN,
                verdict: Verdict::ExcludedByOneVector,
            })
            .collect());
    }
    let ones: Vec<S> = vec![S::one(); sys.d()];
    t_grid
        .par_iter()
        .map(|t| {
            let trace = veech_criterion_test(sys, x0.clone(), t, &ones, n_visits, tol, cap)?;
            Ok(ScanRow {
                t: t.to_f64(),
                t_repr: t.to_string(),
                visits_used: trace.visits,
                tail_max_distance: trace.tail_max,
                verdict: trace.verdict,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorics::Permutation;
    use crate::num::Quad;
    use crate::rauzy::RauzyPath;
    use num_rational::BigRational;

    fn golden_sys() -> SimplexSystem {
        let p: Permutation = "a b / b a".parse().unwrap();
        SimplexSystem::new(RauzyPath::from_kinds(&p, "tb").unwrap()).unwrap()
    }

    #[test]
    fn lattice_distance_examples() {
        let d = distance_to_lattice(&[0.4, 1.3, -0.2]);
        assert!((d - 0.29f64.sqrt()).abs() < 1e-12);
        assert_eq!(distance_to_lattice(&[3.0, -2.0, 5.0]), 0.0);
        assert!((distance_to_lattice(&[0.5, 0.0, 0.0]) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn identity_matrix_gives_only_trivial_child() {
        let j = LineSegment::from_point_direction(&[0.05, 0.0], &[1.0, 1.0]).unwrap();
        let a = IMat::identity(2);
        let cs = children(&j, &a, 0.09).unwrap();
        assert!(cs.trivial.is_some());
        assert_eq!(cs.phi(), 0);
    }

    #[test]
    fn dead_line_has_no_children() {
        // push the line far from the origin with a strongly expanding matrix:
        // ||A J|| >= delta and no lattice ball met (small delta keeps balls
        // rare along the short image segment)
        let j = LineSegment::from_point_direction(&[0.008, 0.0], &[0.0, 1.0]).unwrap();
        let a = IMat::from_i64_rows(&[vec![7, 3], vec![3, 2]]);
        let cs = children(&j, &a, 0.01).unwrap();
        assert!(cs.trivial.is_none());
        assert_eq!(cs.phi(), 0);
        assert!(cs.is_empty());
    }

    #[test]
    fn children_match_dense_sampling_oracle() {
        let j = LineSegment::from_point_direction(&[0.05, 0.0], &[1.0, 1.0]).unwrap();
        let a = IMat::from_i64_rows(&[vec![1, 1], vec![0, 1]]);
        let delta = 0.09;
        let cs = children(&j, &a, delta).unwrap();
        let found: HashSet<Vec<i64>> = cs
            .nontrivial
            .iter()
            .map(|(_, c)| c.iter().map(|b| i64::try_from(b).unwrap()).collect())
            .collect();

        // oracle: dense sampling of the chord, mapped through A
        let (p0, p1) = j.chord(delta).unwrap();
        let af = a.to_f64_rows();
        let mut oracle: HashSet<Vec<i64>> = HashSet::new();
        let n = 100_000;
        for k in 0..=n {
            let t = k as f64 / n as f64;
            let pt: Vec<f64> =
                p0.iter().zip(&p1).map(|(x, y)| x + t * (y - x)).collect();
            let img = mat_apply(&af, &pt);
            let c: Vec<i64> = img.iter().map(|x| x.round() as i64).collect();
            if c.iter().all(|&x| x == 0) {
                continue;
            }
            let dist: f64 = img
                .iter()
                .zip(&c)
                .map(|(x, &ci)| (x - ci as f64).powi(2))
                .sum::<f64>()
                .sqrt();
            if dist < delta {
                oracle.insert(c);
            }
        }
        assert_eq!(found, oracle);
    }

    #[test]
    fn child_keeps_affine_relation() {
        let j = LineSegment::from_point_direction(&[0.03, 0.01], &[2.0, 1.0]).unwrap();
        let a = IMat::from_i64_rows(&[vec![2, 1], vec![1, 1]]);
        let cs = children(&j, &a, 0.08).unwrap();
        for (child, c) in &cs.nontrivial {
            // child line must contain A j.offset - c
            let af = a.to_f64_rows();
            let img = mat_apply(&af, &j.offset);
            let shifted: Vec<f64> = img
                .iter()
                .zip(c)
                .map(|(x, ci)| x - num_traits::ToPrimitive::to_f64(ci).unwrap())
                .collect();
            // distance from shifted point to the child line is ~0
            let t: f64 =
                shifted.iter().zip(&child.direction).map(|(a, b)| a * b).sum();
            let proj: Vec<f64> = child
                .offset
                .iter()
                .zip(&child.direction)
                .map(|(o, u)| o + t * u)
                .collect();
            let err: f64 = proj
                .iter()
                .zip(&shifted)
                .map(|(x, y)| (x - y).powi(2))
                .sum::<f64>()
                .sqrt();
            assert!(err < 1e-9, "affine relation broken: {err}");
        }
    }

    #[test]
    fn zero_vector_survives_forever() {
        let sys = golden_sys();
        let phi = Quad::golden();
        let (ok, fail) = weak_stable_membership(
            &sys,
            vec![Quad::one(), phi],
            vec![Quad::zero(), Quad::zero()],
            0.05,
            4,
            3,
            100_000,
        )
        .unwrap();
        assert!(ok);
        assert_eq!(fail, None);
    }

    #[test]
    fn golden_direction_survives_third_fails() {
        let sys = golden_sys();
        let phi = Quad::golden();
        // w = t (1,1) with t = phi / 30: ||w|| < delta, survives long
        let t_phi = phi.clone() / Quad::from_int(30);
        let (ok_phi, _) = weak_stable_membership(
            &sys,
            vec![Quad::one(), phi.clone()],
            vec![t_phi.clone(), t_phi],
            0.09,
            6,
            3,
            100_000,
        )
        .unwrap();
        assert!(ok_phi, "phi-multiple of (1,1) should survive many blocks");
        // w = (1/33, 1/33): rational, F_n/33 mod 1 stays away from 0 often
        let t3 = Quad::from_ratio(1, 33);
        let (ok3, fail3) = weak_stable_membership(
            &sys,
            vec![Quad::one(), phi],
            vec![t3.clone(), t3],
            0.09,
            6,
            3,
            100_000,
        )
        .unwrap();
        assert!(!ok3);
        assert!(fail3.unwrap() >= 1);
    }

    #[test]
    fn survival_empty_beyond_delta() {
        let sys = golden_sys();
        let j = LineSegment::from_point_direction(&[0.2, 0.0], &[1.0, 1.0]).unwrap();
        let stats = survival_probability::<BigRational>(
            &sys, &j, 0.05, 5, 2, 50, 7, 10_000, 100_000,
        )
        .unwrap();
        assert!(stats.p_hat.iter().all(|&p| p == 0.0));
    }

    #[test]
    fn survival_monotone_and_starts_at_one() {
        let sys = golden_sys();
        let j = LineSegment::from_point_direction(&[0.02, 0.0], &[1.0, 1.0]).unwrap();
        let stats = survival_probability::<BigRational>(
            &sys, &j, 0.05, 6, 2, 60, 11, 10_000, 100_000,
        )
        .unwrap();
        assert_eq!(stats.p_hat[0], 1.0);
        for w in stats.p_hat.windows(2) {
            assert!(w[1] <= w[0] + 1e-15, "not monotone: {:?}", stats.p_hat);
        }
    }

    #[test]
    fn veech_golden_candidate_and_third_not() {
        let sys = golden_sys();
        let phi = Quad::golden();
        let x0 = vec![Quad::one(), phi.clone()];
        let ones = vec![Quad::one(), Quad::one()];
        let tr_phi =
            veech_criterion_test(&sys, x0.clone(), &phi, &ones, 25, 1e-3, 1_000_000)
                .unwrap();
        assert_eq!(tr_phi.verdict, Verdict::Candidate, "tail {}", tr_phi.tail_max);
        let third = Quad::from_ratio(1, 3);
        let tr_third =
            veech_criterion_test(&sys, x0.clone(), &third, &ones, 25, 1e-3, 1_000_000)
                .unwrap();
        assert_eq!(tr_third.verdict, Verdict::NotCandidate);
        assert!(tr_third.tail_max > 0.1);
        // integer t: flagged separately
        let two = Quad::from_int(2);
        let tr_int =
            veech_criterion_test(&sys, x0, &two, &ones, 25, 1e-3, 1_000_000).unwrap();
        assert_eq!(tr_int.verdict, Verdict::IntegerCase);
    }

    #[test]
    fn scan_short_circuits_on_pi3() {
        let p: Permutation = "a b c / c b a".parse().unwrap();
        let sys = SimplexSystem::auto(&p, 1, 10_000).unwrap();
        let grid: Vec<BigRational> =
            (1..5).map(|k| <BigRational as Scalar>::from_ratio(k, 7)).collect();
        let x0: Vec<BigRational> = sys.sample_point(&mut stream_rng(2, 0));
        let rows = weak_mixing_scan(&sys, x0, &grid, 10, 1e-3, 100_000).unwrap();
        assert!(rows.iter().all(|r| r.verdict == Verdict::ExcludedByOneVector));
    }

    #[test]
    fn criterion_invariant_under_integer_shift_of_t() {
        let sys = golden_sys();
        let phi = Quad::golden();
        let x0 = vec![Quad::one(), phi.clone()];
        let ones = vec![Quad::one(), Quad::one()];
        for k in 0..5 {
            let t = Quad::from_ratio(2, 7) + Quad::from_int(k);
            let tr =
                veech_criterion_test(&sys, x0.clone(), &t, &ones, 12, 1e-3, 1_000_000)
                    .unwrap();
            let t0 = Quad::from_ratio(2, 7);
            let tr0 =
                veech_criterion_test(&sys, x0.clone(), &t0, &ones, 12, 1e-3, 1_000_000)
                    .unwrap();
            for (a, b) in tr.distances.iter().zip(&tr0.distances) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }
}
