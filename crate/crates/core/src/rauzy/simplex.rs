//! The first-return system on a simplex `Delta = B_{gamma0}^* P_+`.
//!
//! `Delta` is the cylinder of the loop `gamma0`, so membership is an exact
//! linear test (`B_{gamma0}^{-T} lambda > 0`) and the first-return paths are
//! exactly the loops `u` at the base vertex such that the word `u . gamma0`
//! begins with `gamma0` and contains no earlier occurrence of the pattern.
//! Their cells are the cylinders `D_{u.gamma0}`, with uniform-measure mass
//! given by the Jacobian integral of `|B_u^* lambda|^{-d}` over `Delta`.

use num_bigint::BigInt;
use rand::Rng;

use super::{rauzy_class, ArrowKind, Orbit, RauzyArrow, RauzyPath};
use crate::combinatorics::Permutation;
use crate::num::Scalar;
use crate::sampling::{sample_simplex, stream_rng};
use crate::stats::linear_fit;
use crate::{Error, Result};

/// A base permutation together with a positive loop `gamma0` defining the
/// return simplex.
#[derive(Clone, Debug)]
pub struct SimplexSystem {
    base: Permutation,
    gamma0: RauzyPath,
    /// `B_{gamma0}^T`; its columns generate the cone over `Delta`.
    cone: crate::intmat::IMat,
    cone_inv: crate::intmat::IMat,
    cone_f64: Vec<Vec<f64>>,
}

impl SimplexSystem {
    pub fn new(gamma0: RauzyPath) -> Result<Self> {
        if !gamma0.is_loop() || gamma0.is_empty() {
            return Err(Error::Invalid("gamma0 must be a nonempty loop".into()));
        }
        if !gamma0.matrix().is_entrywise_positive() {
            return Err(Error::Invalid("gamma0 matrix must be entrywise positive".into()));
        }
        let cone = gamma0.matrix().transpose();
        let cone_inv = cone.inverse_unimodular()?;
        let cone_f64 = cone.to_f64_rows();
        Ok(SimplexSystem { base: gamma0.start().clone(), gamma0, cone, cone_inv, cone_f64 })
    }

    /// Derive `gamma0` by following the renormalization orbit of a seeded
    /// random point until the accumulated matrix is positive.
    pub fn auto(p: &Permutation, seed: u64, cap: u64) -> Result<Self> {
        use num_rational::BigRational;
        let mut rng = stream_rng(seed, 0);
        let lam: Vec<BigRational> = sample_simplex(&mut rng, p.d())
            .into_iter()
            .map(|x| <BigRational as Scalar>::from_f64_exact(x).unwrap())
            .collect();
        let path = super::positive_path(p, &lam, cap)?;
        SimplexSystem::new(path)
    }

    pub fn base(&self) -> &Permutation {
        &self.base
    }

    pub fn gamma0(&self) -> &RauzyPath {
        &self.gamma0
    }

    pub fn d(&self) -> usize {
        self.base.d()
    }

    /// Projective membership `[lambda] in Delta`, decided by solving the
    /// cone system exactly: all coordinates of `B_{gamma0}^{-T} lambda`
    /// strictly positive.
    pub fn contains<S: Scalar>(&self, lambda: &[S]) -> bool {
        self.cone_inv
            .mul_scalar_vec(lambda)
            .iter()
            .all(crate::num::is_pos)
    }

    /// A point of `Delta` from a uniform sample of the standard simplex,
    /// mapped through the cone and normalized. The pushforward density is
    /// smooth and positive on `Delta` (Lebesgue class).
    pub fn sample_point<S: Scalar, R: Rng>(&self, rng: &mut R) -> Vec<S> {
        let d = self.d();
        let u = sample_simplex(rng, d);
        let us: Vec<S> = u
            .iter()
            .map(|&x| S::from_f64_exact(x).expect("finite sample"))
            .collect();
        let v = self.cone.mul_scalar_vec(&us);
        crate::num::vec_normalized(&v)
    }

    /// Same map in f64 together with the importance weight `|cone u|^{-d}`
    /// that converts simplex-uniform samples into `Delta`-uniform averages.
    pub fn sample_point_weighted<R: Rng>(&self, rng: &mut R) -> (Vec<f64>, f64) {
        let d = self.d();
        let u = sample_simplex(rng, d);
        let v: Vec<f64> = self
            .cone_f64
            .iter()
            .map(|row| row.iter().zip(&u).map(|(a, b)| a * b).sum())
            .collect();
        let total: f64 = v.iter().sum();
        let weight = total.powi(-(d as i32));
        (v.iter().map(|x| x / total).collect(), weight)
    }
}

/// Outcome of one first return to `Delta x {base}`.
#[derive(Clone, Debug)]
pub struct ReturnRecord {
    pub path: RauzyPath,
    /// `log |B_gamma^* . lambda_end|` with `lambda_end` normalized —
    /// accumulated as the telescoping sum of per-step shrink logs.
    pub r_time: f64,
    pub steps: u64,
}

/// Iterate the renormalization orbit until it re-enters `Delta x {base}`.
pub fn first_return<S: Scalar>(
    sys: &SimplexSystem,
    orbit: &mut Orbit<S>,
    cap: u64,
) -> Result<ReturnRecord> {
    let mut path = RauzyPath::identity(&orbit.perm.clone());
    let mut r_time = 0.0;
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
        r_time += rec.log_shrink;
        if orbit.perm == *sys.base() && sys.contains(&orbit.lambda) {
            let steps = path.len() as u64;
            return Ok(ReturnRecord { path, r_time, steps });
        }
    }
    Err(Error::CapExceeded(format!(
        "no return to the simplex within {cap} renormalization steps"
    )))
}

/// Direct evaluation of the return-time formula `log |B_gamma^* lambda|`
/// at the (normalized) return point; used to cross-check the telescoped sum.
pub fn return_time_formula<S: Scalar>(path: &RauzyPath, lambda_end: &[S]) -> f64 {
    let image = path.matrix().transpose().mul_scalar_vec(lambda_end);
    let num = crate::num::vec_sum(&image);
    let den = crate::num::vec_sum(&lambda_end.to_vec());
    num.ln_f64() - den.ln_f64()
}

/// All first-return paths with `||B_u||_inf <= norm_cap`, by depth-first
/// search over the Rauzy diagram with norm pruning. Row sums only grow along
/// extensions, so pruning is exact. Return words are not prefix-free: both a
/// word and a proper extension of it can label first-return cells, so the
/// search continues past recorded words until the cap prunes it.
pub fn enumerate_primitive_returns(
    sys: &SimplexSystem,
    norm_cap: u64,
) -> Result<Vec<RauzyPath>> {
    let class = rauzy_class(sys.base(), 1_000_000)?;
    let base_idx = class.index_of(sys.base()).expect("base in its class");
    let cap = BigInt::from(norm_cap);
    let g0: Vec<ArrowKind> = sys.gamma0().kinds().to_vec();

    let mut out = Vec::new();
    let mut stack_kinds: Vec<ArrowKind> = Vec::new();
    let mut stack_vertices: Vec<usize> = vec![base_idx];
    let mut path = RauzyPath::identity(sys.base());

    dfs(&class, base_idx, &cap, &g0, &mut stack_kinds, &mut stack_vertices, &mut path, &mut out);
    Ok(out)
}

/// Whether the infinite word `u . gamma0 ...` has an occurrence of the
/// pattern "at the base vertex, next letters spell gamma0" at position `k`.
fn pattern_at(
    k: usize,
    u_kinds: &[ArrowKind],
    u_vertices: &[usize],
    g0: &[ArrowKind],
    base_idx: usize,
) -> bool {
    if u_vertices[k] != base_idx {
        return false;
    }
    let r = u_kinds.len();
    for (j, &want) in g0.iter().enumerate() {
        let letter = if k + j < r {
            u_kinds[k + j]
        } else {
            // continuation letters come from the appended copy of gamma0;
            // k + j - r < |gamma0| holds because k <= r and j < |gamma0|
            g0[k + j - r]
        };
        if letter != want {
            return false;
        }
    }
    true
}

#[allow(clippy::too_many_arguments)]
fn dfs(
    class: &super::RauzyClass,
    base_idx: usize,
    cap: &BigInt,
    g0: &[ArrowKind],
    kinds: &mut Vec<ArrowKind>,
    vertices: &mut Vec<usize>,
    path: &mut RauzyPath,
    out: &mut Vec<RauzyPath>,
) {
    if path.matrix().norm_inf() > *cap {
        return;
    }
    let here = *vertices.last().unwrap();
    let r = kinds.len();
    if r > 0 && here == base_idx {
        // candidate return word u = kinds: the word u.gamma0 must begin with
        // gamma0 (entry condition) and the pattern occurrence at r must be
        // the first one after 0
        if pattern_at(0, kinds, vertices, g0, base_idx)
            && pattern_at(r, kinds, vertices, g0, base_idx)
            && (1..r).all(|k| !pattern_at(k, kinds, vertices, g0, base_idx))
        {
            out.push(path.clone());
        }
    }
    for (kind, tgt) in class.out_arrows(here) {
        // every return word starts with gamma0's letters
        if r < g0.len() && kind != g0[r] {
            continue;
        }
        let arrow = RauzyArrow::from_kind(&class.members[here], kind).expect("valid arrow");
        path.push(&arrow);
        kinds.push(kind);
        vertices.push(tgt);
        dfs(class, base_idx, cap, g0, kinds, vertices, path, out);
        kinds.pop();
        vertices.pop();
        path.pop(&arrow);
    }
}

/// Per-cylinder statistics of the first-return partition.
#[derive(Clone, Debug)]
pub struct CylinderStat {
    pub word: String,
    pub steps: u64,
    /// `ln max(||B||_inf, ||B^{-1}||_inf)`.
    pub log_norm0: f64,
    /// Uniform-measure mass of the cylinder within `Delta`.
    pub mass: f64,
}

#[derive(Clone, Debug)]
pub struct FastDecayEstimate {
    pub cylinders: Vec<CylinderStat>,
    pub alpha1_hat: f64,
    pub alpha2_hat: f64,
    pub mass_sum: f64,
    pub mc_samples: usize,
}

/// Enumerate primitive returns below the norm cap, estimate their masses by
/// the Jacobian Monte Carlo integral, and fit the two fast-decay tail
/// exponents on log-log scales.
pub fn fast_decay_tails(
    sys: &SimplexSystem,
    norm_cap: u64,
    mc_samples: usize,
    seed: u64,
) -> Result<FastDecayEstimate> {
    let paths = enumerate_primitive_returns(sys, norm_cap)?;
    if paths.len() < 8 {
        return Err(Error::Invalid(format!(
            "only {} cylinders below the norm cap; raise the cap",
            paths.len()
        )));
    }
    let d = sys.d();
    let mut rng = stream_rng(seed, 1);
    let samples: Vec<(Vec<f64>, f64)> =
        (0..mc_samples).map(|_| sys.sample_point_weighted(&mut rng)).collect();
    let wsum: f64 = samples.iter().map(|(_, w)| w).sum();

    let mut cylinders = Vec::with_capacity(paths.len());
    for path in &paths {
        let bt = path.matrix().transpose().to_f64_rows();
        let mass = samples
            .iter()
            .map(|(lam, w)| {
                let img: f64 = bt
                    .iter()
                    .map(|row| row.iter().zip(lam).map(|(a, b)| a * b).sum::<f64>())
                    .sum();
                w * img.powi(-(d as i32))
            })
            .sum::<f64>()
            / wsum;
        let n0 = path.matrix().norm_inf().max(path.matrix_inverse().norm_inf());
        cylinders.push(CylinderStat {
            word: path.kinds_string(),
            steps: path.len() as u64,
            log_norm0: crate::num::ln_bigint(&n0),
            mass,
        });
    }
    let mass_sum: f64 = cylinders.iter().map(|c| c.mass).sum();

    // alpha2: mass of { ||B||_0 >= n } ~ n^{-alpha2}
    let mut by_norm: Vec<&CylinderStat> = cylinders.iter().collect();
    by_norm.sort_by(|a, b| a.log_norm0.partial_cmp(&b.log_norm0).unwrap());
    let (mut xs2, mut ys2) = (Vec::new(), Vec::new());
    for c in by_norm.iter() {
        let tail: f64 =
            by_norm.iter().filter(|o| o.log_norm0 >= c.log_norm0).map(|o| o.mass).sum();
        if tail > 0.0 {
            xs2.push(c.log_norm0);
            ys2.push(tail.ln());
        }
    }
    let alpha2_hat = linear_fit(&xs2, &ys2, None)
        .map(|(_, slope)| -slope)
        .ok_or_else(|| Error::Invalid("tail fit failed".into()))?;

    // alpha1: mass of { mass(cyl) <= eps } ~ eps^{alpha1}
    let mut by_mass: Vec<&CylinderStat> = cylinders.iter().collect();
    by_mass.sort_by(|a, b| a.mass.partial_cmp(&b.mass).unwrap());
    let (mut xs1, mut ys1) = (Vec::new(), Vec::new());
    let mut acc = 0.0;
    for c in by_mass.iter() {
        acc += c.mass;
        if c.mass > 0.0 && acc > 0.0 {
            xs1.push(c.mass.ln());
            ys1.push(acc.ln());
        }
    }
    let alpha1_hat = linear_fit(&xs1, &ys1, None)
        .map(|(_, slope)| slope)
        .ok_or_else(|| Error::Invalid("mass tail fit failed".into()))?;

    Ok(FastDecayEstimate { cylinders, alpha1_hat, alpha2_hat, mass_sum, mc_samples })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::Quad;
    use num_rational::BigRational;

    fn rat(n: i64, d: i64) -> BigRational {
        <BigRational as Scalar>::from_ratio(n, d)
    }

    fn golden_system() -> SimplexSystem {
        let p: Permutation = "a b / b a".parse().unwrap();
        let g0 = RauzyPath::from_kinds(&p, "tb").unwrap();
        SimplexSystem::new(g0).unwrap()
    }

    #[test]
    fn cone_membership_examples() {
        let sys = golden_system();
        // cone = [[1,1],[1,2]]^T: interior points map from v > 0
        let inside = vec![rat(2, 5), rat(3, 5)]; // v = cone^{-1} lambda must be > 0
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let golden_pt = vec![
            <BigRational as Scalar>::from_f64_exact(1.0 / (1.0 + phi)).unwrap(),
            <BigRational as Scalar>::from_f64_exact(phi / (1.0 + phi)).unwrap(),
        ];
        assert!(sys.contains(&golden_pt));
        let outside = vec![rat(9, 10), rat(1, 10)];
        assert!(!sys.contains(&outside));
        let _ = inside;
    }

    #[test]
    fn golden_first_return_is_period_one() {
        let sys = golden_system();
        let phi = Quad::golden();
        // normalized golden point lies in Delta
        let lam = vec![Quad::one(), phi.clone()];
        let mut orbit = Orbit::new(lam, sys.base().clone()).unwrap();
        // advance to land inside Delta first
        let entry = first_return(&sys, &mut orbit, 100).unwrap();
        let rec = first_return(&sys, &mut orbit, 100).unwrap();
        assert_eq!(rec.path.kinds_string(), "tb");
        assert_eq!(rec.steps, 2);
        let _ = entry;
        // return time formula cross-check
        let direct = return_time_formula(&rec.path, &orbit.lambda);
        assert!((direct - rec.r_time).abs() < 1e-10);
        // r = log lambda_max of [[1,1],[1,2]] = log(phi^2)
        let expect = 2.0 * ((1.0 + 5f64.sqrt()) / 2.0).ln();
        assert!((rec.r_time - expect).abs() < 1e-10);
    }

    #[test]
    fn first_return_matches_cocycle_identity() {
        let sys = golden_system();
        let mut rng = stream_rng(5, 0);
        for _ in 0..5 {
            let lam: Vec<BigRational> = sys.sample_point(&mut rng);
            let mut orbit = Orbit::new(lam, sys.base().clone()).unwrap();
            let before = orbit.lambda.clone();
            let rec = first_return(&sys, &mut orbit, 100_000).unwrap();
            // B_gamma^T lambda_end == lambda_start (exact, unnormalized orbit)
            let recon = rec.path.matrix().transpose().mul_scalar_vec(&orbit.lambda);
            assert_eq!(recon, before);
        }
    }

    #[test]
    fn composed_returns_concatenate() {
        let sys = golden_system();
        let mut rng = stream_rng(9, 0);
        let lam: Vec<BigRational> = sys.sample_point(&mut rng);
        let mut orbit = Orbit::new(lam.clone(), sys.base().clone()).unwrap();
        let r1 = first_return(&sys, &mut orbit, 100_000).unwrap();
        let r2 = first_return(&sys, &mut orbit, 100_000).unwrap();
        let composed = r1.path.compose(&r2.path).unwrap();
        let mut orbit2 = Orbit::new(lam, sys.base().clone()).unwrap();
        for _ in 0..composed.len() {
            orbit2.step().unwrap();
        }
        assert_eq!(orbit2.lambda, orbit.lambda);
        assert_eq!(composed.matrix(), &r2.path.matrix().mul(r1.path.matrix()));
    }

    #[test]
    fn enumerated_returns_cover_realized_paths() {
        let sys = golden_system();
        let enumerated = enumerate_primitive_returns(&sys, 400).unwrap();
        assert!(enumerated.len() >= 8);
        let words: std::collections::HashSet<String> =
            enumerated.iter().map(|p| p.kinds_string()).collect();
        assert!(words.contains("tb"));
        // realized first-return words with small matrices must be enumerated
        let mut rng = stream_rng(11, 0);
        for _ in 0..40 {
            let lam: Vec<BigRational> = sys.sample_point(&mut rng);
            let mut orbit = Orbit::new(lam, sys.base().clone()).unwrap();
            let rec = first_return(&sys, &mut orbit, 100_000).unwrap();
            if rec.path.matrix().norm_inf() <= num_bigint::BigInt::from(400u32) {
                assert!(
                    words.contains(&rec.path.kinds_string()),
                    "missing realized word {}",
                    rec.path.kinds_string()
                );
            }
        }
    }

    #[test]
    fn cylinder_masses_positive_and_subunit() {
        let sys = golden_system();
        let est = fast_decay_tails(&sys, 300, 4000, 7).unwrap();
        assert!(est.cylinders.iter().all(|c| c.mass > 0.0));
        assert!(est.mass_sum <= 1.0 + 0.05, "mass sum {}", est.mass_sum);
        assert!(est.alpha2_hat > 0.0);
        assert!(est.alpha1_hat > 0.0);
    }
}
