//! The accelerated cocycle `(T, A)`: `T` is the first return of Rauzy
//! renormalization to `Delta x {pi}` and `A` is the return-path matrix
//! restricted to `H(pi)`, expressed in an integer basis of the lattice
//! `H(pi) ∩ Z^d` (the restriction is unimodular there).
//!
//! Lyapunov exponents are estimated by per-step QR reorthonormalization of a
//! transported frame; growth experiments track rescaled products in f64 with
//! accumulated log scales, so no quantity ever leaves floating-point range.

use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::combinatorics::omega_maps;
use crate::intmat::{solve_in_lattice_basis, IMat};
use crate::linalg::qr_log_diag;
use crate::num::Scalar;
use crate::rauzy::{first_return, Orbit, ReturnRecord, SimplexSystem};
use crate::sampling::stream_rng;
use crate::stats::{block_bootstrap_halfwidth, bootstrap_ci, linear_fit, wilson_interval};
use crate::{Error, Result};

/// The return system together with the lattice basis of `H(pi)`.
#[derive(Clone, Debug)]
pub struct RestrictedCocycle {
    pub sys: SimplexSystem,
    /// d x 2g integer matrix whose columns span `H(pi) ∩ Z^d`.
    k_basis: IMat,
    /// Singularity vectors `b^s`, for H-invariance checks.
    b_vectors: Vec<Vec<i64>>,
    dim: usize,
}

impl RestrictedCocycle {
    pub fn new(sys: SimplexSystem) -> Result<Self> {
        let ts = omega_maps(sys.base())?;
        let prof = crate::combinatorics::singularity_profile(sys.base())?;
        let d = sys.d();
        let dim = ts.rank;
        let mut k_basis = IMat::zeros(d, dim);
        for (j, col) in ts.h_lattice.iter().enumerate() {
            for i in 0..d {
                k_basis[(i, j)] = col[i].clone();
            }
        }
        Ok(RestrictedCocycle { sys, k_basis, b_vectors: prof.b_vectors, dim })
    }

    /// Dimension `2g` of `H(pi)`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lattice_basis(&self) -> &IMat {
        &self.k_basis
    }

    /// Express a return matrix on `H(pi)` in the lattice basis: the integer
    /// solution `M` of `K M = B K`.
    pub fn restrict(&self, b: &IMat) -> Result<IMat> {
        let bk = b.mul(&self.k_basis);
        solve_in_lattice_basis(&self.k_basis, &bk)
    }

    /// Embed lattice-basis coordinates back into R^d.
    pub fn embed(&self, coords: &[f64]) -> Vec<f64> {
        let k = self.k_basis.to_f64_rows();
        (0..self.k_basis.nrows())
            .map(|i| k[i].iter().zip(coords).map(|(a, c)| a * c).sum())
            .collect()
    }

    pub fn b_vectors(&self) -> &[Vec<i64>] {
        &self.b_vectors
    }
}

/// Transported state of the cocycle: the projective point, an orthonormal
/// frame of `H(pi)` in lattice coordinates, and accumulated log norms.
#[derive(Clone, Debug)]
pub struct CocycleState<S: Scalar> {
    pub orbit: Orbit<S>,
    pub frame: DMatrix<f64>,
    pub log_norms: Vec<f64>,
    pub steps: u64,
    /// Per-step log increments per frame vector, for bootstrap CIs.
    pub increments: Vec<Vec<f64>>,
}

impl<S: Scalar> CocycleState<S> {
    pub fn new(rc: &RestrictedCocycle, lambda: Vec<S>) -> Result<Self> {
        let orbit = Orbit::new(lambda, rc.sys.base().clone())?;
        let g2 = rc.dim();
        Ok(CocycleState {
            orbit,
            frame: DMatrix::identity(g2, g2),
            log_norms: vec![0.0; g2],
            steps: 0,
            increments: vec![Vec::new(); g2],
        })
    }
}

/// One accelerated step: advance to the next return, multiply the frame by
/// the restricted matrix, reorthonormalize, accumulate logs.
pub fn cocycle_step<S: Scalar>(
    rc: &RestrictedCocycle,
    state: &mut CocycleState<S>,
    cap: u64,
) -> Result<(IMat, ReturnRecord)> {
    let rec = first_return(&rc.sys, &mut state.orbit, cap)?;
    let restricted = rc.restrict(rec.path.matrix())?;
    let m = crate::linalg::imat_to_dmatrix(&restricted);
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::Precision(
            "return matrix exceeds f64 range; raise precision or lower caps".into(),
        ));
    }
    state.frame = &m * &state.frame;
    let logs = qr_log_diag(&mut state.frame);
    for (i, l) in logs.iter().enumerate() {
        state.log_norms[i] += l;
        state.increments[i].push(*l);
    }
    state.steps += 1;
    Ok((restricted, rec))
}

#[derive(Clone, Debug, Serialize)]
pub struct LyapunovEstimate {
    /// Sorted descending, per Delta-return time unit.
    pub exponents: Vec<f64>,
    pub steps: u64,
    pub ci_halfwidth: f64,
    /// Mean `r_Delta` over the run, for rescaling to Teichmueller time.
    pub mean_return_time: f64,
    pub seed: u64,
}

/// Estimate the restricted-cocycle Lyapunov spectrum from a seeded orbit.
pub fn lyapunov_spectrum<S: Scalar>(
    rc: &RestrictedCocycle,
    seed: u64,
    n_steps: u64,
    cap: u64,
) -> Result<LyapunovEstimate> {
    if n_steps < 10 {
        return Err(Error::Invalid("need at least 10 steps".into()));
    }
    let mut rng = stream_rng(seed, 0);
    let lambda: Vec<S> = rc.sys.sample_point(&mut rng);
    let mut state = CocycleState::new(rc, lambda)?;
    let mut r_sum = 0.0;
    for _ in 0..n_steps {
        let (_, rec) = cocycle_step(rc, &mut state, cap)?;
        r_sum += rec.r_time;
    }
    let mut order: Vec<usize> = (0..rc.dim()).collect();
    let means: Vec<f64> =
        state.log_norms.iter().map(|s| s / n_steps as f64).collect();
    order.sort_by(|&a, &b| means[b].partial_cmp(&means[a]).unwrap());
    let exponents: Vec<f64> = order.iter().map(|&i| means[i]).collect();
    let block = (n_steps as usize / 50).clamp(1, 200);
    let ci_halfwidth = order
        .iter()
        .map(|&i| block_bootstrap_halfwidth(&mut rng, &state.increments[i], block, 200))
        .fold(0.0f64, f64::max);
    Ok(LyapunovEstimate {
        exponents,
        steps: n_steps,
        ci_halfwidth,
        mean_return_time: r_sum / n_steps as f64,
        seed,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct DevRow {
    pub n: u64,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub successes: u64,
    pub samples: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DeviationResult {
    pub rows: Vec<DevRow>,
    pub slope: f64,
    pub slope_ci_low: f64,
    pub slope_ci_high: f64,
    pub threshold: f64,
    pub seed: u64,
}

fn fit_rows(
    rows: &[DevRow],
    per_sample: &[Vec<bool>],
    n_grid: &[u64],
    seed: u64,
) -> Result<(f64, f64, f64)> {
    let fit_from = |hit_lists: &[&Vec<bool>]| -> Option<f64> {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for (gi, &n) in n_grid.iter().enumerate() {
            let hits = hit_lists.iter().filter(|h| h[gi]).count();
            if hits > 0 {
                xs.push(n as f64);
                ys.push((hits as f64 / hit_lists.len() as f64).ln());
            }
        }
        if xs.len() < 3 {
            return None;
        }
        linear_fit(&xs, &ys, None).map(|(_, s)| s)
    };
    let all: Vec<&Vec<bool>> = per_sample.iter().collect();
    let slope = fit_from(&all)
        .ok_or_else(|| Error::Invalid("too few nonzero frequencies for a decay fit".into()))?;
    let mut rng = stream_rng(seed, u64::MAX);
    let ci = bootstrap_ci(&mut rng, per_sample.len(), 200, |idx| {
        let resampled: Vec<&Vec<bool>> = idx.iter().map(|&i| &per_sample[i]).collect();
        fit_from(&resampled)
    })
    .ok_or_else(|| Error::Invalid("bootstrap failed for the decay fit".into()))?;
    let _ = rows;
    Ok((slope, ci.0, ci.1))
}

/// Empirical probability that `||A_n||` exceeds `e^{l_tilde n}` on a grid of
/// `n`, with a log-linear decay fit.
pub fn anomalous_growth_experiment<S: Scalar>(
    rc: &RestrictedCocycle,
    l_tilde: f64,
    n_grid: &[u64],
    samples: u64,
    seed: u64,
    cap: u64,
) -> Result<DeviationResult> {
    if n_grid.is_empty() {
        return Err(Error::Invalid("empty n grid".into()));
    }
    let n_max = *n_grid.iter().max().unwrap();
    let per_sample: Vec<Vec<bool>> = (0..samples)
        .into_par_iter()
        .map(|i| -> Result<Vec<bool>> {
            let mut rng = stream_rng(seed, i);
            let lambda: Vec<S> = rc.sys.sample_point(&mut rng);
            let mut orbit = Orbit::new(lambda, rc.sys.base().clone())?;
            let g2 = rc.dim();
            let mut prod = DMatrix::<f64>::identity(g2, g2);
            let mut log_scale = 0.0f64;
            let mut hits = vec![false; n_grid.len()];
            let mut n = 0u64;
            while n < n_max {
                let rec = first_return(&rc.sys, &mut orbit, cap)?;
                let restricted = rc.restrict(rec.path.matrix())?;
                prod = crate::linalg::imat_to_dmatrix(&restricted) * prod;
                let s = prod.norm();
                if !s.is_finite() || s == 0.0 {
                    return Err(Error::Precision("product left f64 range".into()));
                }
                log_scale += s.ln();
                prod /= s;
                n += 1;
                if let Some(gi) = n_grid.iter().position(|&g| g == n) {
                    // ||A_n|| >= e^{l_tilde n}, compared in log space
                    hits[gi] = log_scale >= l_tilde * n as f64;
                }
            }
            Ok(hits)
        })
        .collect::<Result<Vec<_>>>()?;

    let rows = summarize_rows(&per_sample, n_grid, samples);
    let (slope, lo, hi) = fit_rows(&rows, &per_sample, n_grid, seed)?;
    Ok(DeviationResult {
        rows,
        slope,
        slope_ci_low: lo,
        slope_ci_high: hi,
        threshold: l_tilde,
        seed,
    })
}

/// Empirical probability that `||A_n v|| <= e^{c' n}` for the full
/// (non-negative) return cocycle and a fixed unit vector `v >= 0`.
pub fn contraction_deviation_experiment<S: Scalar>(
    rc: &RestrictedCocycle,
    c_prime: f64,
    n_grid: &[u64],
    samples: u64,
    seed: u64,
    cap: u64,
    v: &[f64],
) -> Result<DeviationResult> {
    let d = rc.sys.d();
    if v.len() != d {
        return Err(Error::Invalid("v must have dimension d".into()));
    }
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::Invalid("v must be a unit vector".into()));
    }
    if n_grid.is_empty() {
        return Err(Error::Invalid("empty n grid".into()));
    }
    let n_max = *n_grid.iter().max().unwrap();
    let per_sample: Vec<Vec<bool>> = (0..samples)
        .into_par_iter()
        .map(|i| -> Result<Vec<bool>> {
            let mut rng = stream_rng(seed, i);
            let lambda: Vec<S> = rc.sys.sample_point(&mut rng);
            let mut orbit = Orbit::new(lambda, rc.sys.base().clone())?;
            let mut w: Vec<f64> = v.to_vec();
            let mut log_scale = 0.0f64;
            let mut hits = vec![false; n_grid.len()];
            let mut n = 0u64;
            while n < n_max {
                let rec = first_return(&rc.sys, &mut orbit, cap)?;
                let b = rec.path.matrix().to_f64_rows();
                let next: Vec<f64> = b
                    .iter()
                    .map(|row| row.iter().zip(&w).map(|(a, x)| a * x).sum())
                    .collect();
                let s = next.iter().map(|x| x * x).sum::<f64>().sqrt();
                if !s.is_finite() || s == 0.0 {
                    return Err(Error::Precision("iterate left f64 range".into()));
                }
                log_scale += s.ln();
                w = next.iter().map(|x| x / s).collect();
                n += 1;
                if let Some(gi) = n_grid.iter().position(|&g| g == n) {
                    hits[gi] = log_scale <= c_prime * n as f64;
                }
            }
            Ok(hits)
        })
        .collect::<Result<Vec<_>>>()?;

    let rows = summarize_rows(&per_sample, n_grid, samples);
    let (slope, lo, hi) = fit_rows(&rows, &per_sample, n_grid, seed)?;
    Ok(DeviationResult {
        rows,
        slope,
        slope_ci_low: lo,
        slope_ci_high: hi,
        threshold: c_prime,
        seed,
    })
}

fn summarize_rows(per_sample: &[Vec<bool>], n_grid: &[u64], samples: u64) -> Vec<DevRow> {
    n_grid
        .iter()
        .enumerate()
        .map(|(gi, &n)| {
            let successes = per_sample.iter().filter(|h| h[gi]).count() as u64;
            let (lo, hi) = wilson_interval(successes, samples);
            DevRow {
                n,
                p_hat: successes as f64 / samples as f64,
                ci_low: lo,
                ci_high: hi,
                successes,
                samples,
            }
        })
        .collect()
}
