//! Zippered rectangles over an i.e.t. and the special flows they carry.
//!
//! Suspension data `tau` lives in the cone `T^+(pi)` cut out by the strict
//! partial-sum inequalities of both rows; the roof vector is `h = -Omega(tau)`
//! and lies in `H^+(pi)`. Extended induction transports `h` by the arrow
//! matrix and leaves the translation structure (and the area) unchanged.

use rand::Rng;
use serde::Serialize;

use crate::combinatorics::{omega_maps, singularity_profile, Permutation};
use crate::iet::IetMap;
use crate::num::{int_dot, is_pos, is_zero_val, vec_dot, Scalar};
use crate::rauzy::{induction_step, RauzyArrow};
use crate::sampling::stream_rng;
use crate::{Error, Result};

/// Suspension data: `tau` in `T^+(pi)` and the roof `h = -Omega(tau)`.
#[derive(Clone, Debug)]
pub struct SuspensionDatum<S: Scalar> {
    pub tau: Vec<S>,
    pub heights: Vec<S>,
}

impl<S: Scalar> SuspensionDatum<S> {
    /// The suspension area `sum lambda_alpha h_alpha`.
    pub fn area(&self, lambda: &[S]) -> S {
        vec_dot(lambda, &self.heights)
    }
}

/// Check the `2(d-1)` strict cone inequalities for `tau`.
pub fn tau_in_cone<S: Scalar>(p: &Permutation, tau: &[S]) -> bool {
    let d = p.d();
    let mut top = S::zero();
    let mut bottom = S::zero();
    for k in 0..d - 1 {
        top = top + tau[p.top_order()[k]].clone();
        bottom = bottom + tau[p.bottom_order()[k]].clone();
        if !is_pos(&top) || is_pos(&bottom) || bottom == S::zero() {
            return false;
        }
    }
    true
}

/// Roof vector `h = -Omega_pi(tau)`.
pub fn heights_from_tau<S: Scalar>(p: &Permutation, tau: &[S]) -> Result<Vec<S>> {
    let ts = omega_maps(p)?;
    Ok(ts.omega.mul_scalar_vec(tau).into_iter().map(|x| -x).collect())
}

/// Rejection-sample `tau` from the unit box until the cone inequalities
/// hold; verifies `h > 0` and `h ⟂ b^s` exactly where the backend allows.
pub fn sample_tau<S: Scalar>(p: &Permutation, seed: u64, cap: u64) -> Result<SuspensionDatum<S>> {
    p.require_irreducible()?;
    let d = p.d();
    let mut rng = stream_rng(seed, 0);
    for _ in 0..cap {
        let tau: Vec<S> = (0..d)
            .map(|_| S::from_f64_exact(rng.gen_range(-1.0..1.0)).expect("finite"))
            .collect();
        if !tau_in_cone(p, &tau) {
            continue;
        }
        let heights = heights_from_tau(p, &tau)?;
        if heights.iter().any(|h| !is_pos(h)) {
            return Err(Error::Internal("cone data produced a non-positive roof".into()));
        }
        let prof = singularity_profile(p)?;
        for b in &prof.b_vectors {
            let ints: Vec<num_bigint::BigInt> =
                b.iter().map(|&k| num_bigint::BigInt::from(k)).collect();
            let dot = int_dot(&ints, &heights);
            let ok = if S::is_exact() { is_zero_val(&dot) } else { dot.to_f64().abs() <= 1e-12 };
            if !ok {
                return Err(Error::Internal("roof not orthogonal to b^s".into()));
            }
        }
        return Ok(SuspensionDatum { tau, heights });
    }
    Err(Error::CapExceeded(format!("no cone point within {cap} rejections")))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum RectangleSide {
    Top,
    Bottom,
}

/// One zippered rectangle `(x0, x1) x (y0, y1)` over a subinterval.
#[derive(Clone, Debug, Serialize)]
pub struct Rectangle<S: Scalar> {
    pub symbol: String,
    pub side: RectangleSide,
    pub x0: S,
    pub x1: S,
    pub y0: S,
    pub y1: S,
}

/// The `2d` rectangles of the suspension: top rectangles over the domain
/// partition, bottom rectangles (negative heights) over the image partition.
pub fn zippered_rectangles<S: Scalar>(
    p: &Permutation,
    lambda: &[S],
    sd: &SuspensionDatum<S>,
) -> Result<Vec<Rectangle<S>>> {
    let ts = omega_maps(p)?;
    let w_t = ts.omega_t.mul_scalar_vec(lambda);
    let w_b = ts.omega_b.mul_scalar_vec(lambda);
    let mut out = Vec::with_capacity(2 * p.d());
    for sym in 0..p.d() {
        out.push(Rectangle {
            symbol: p.symbol(sym).to_string(),
            side: RectangleSide::Top,
            x0: w_t[sym].clone(),
            x1: w_t[sym].clone() + lambda[sym].clone(),
            y0: S::zero(),
            y1: sd.heights[sym].clone(),
        });
        out.push(Rectangle {
            symbol: p.symbol(sym).to_string(),
            side: RectangleSide::Bottom,
            x0: w_b[sym].clone(),
            x1: w_b[sym].clone() + lambda[sym].clone(),
            y0: -sd.heights[sym].clone(),
            y1: S::zero(),
        });
    }
    Ok(out)
}

/// Result of flowing a point: position, count of roof crossings (Birkhoff
/// count for the base map), and float-mode nudges applied at discontinuity
/// hits.
#[derive(Clone, Debug)]
pub struct FlowPoint<S: Scalar> {
    pub x: S,
    pub s: S,
    pub crossings: u64,
    pub nudges: u64,
}

/// Special flow over an i.e.t. with roof constant `h_i` on `I_i`.
#[derive(Clone, Debug)]
pub struct SpecialFlow<S: Scalar> {
    base: IetMap<S>,
    heights: Vec<S>,
}

impl<S: Scalar> SpecialFlow<S> {
    pub fn new(base: IetMap<S>, heights: Vec<S>) -> Result<Self> {
        if heights.len() != base.permutation().d() {
            return Err(Error::Invalid("height vector length mismatch".into()));
        }
        if heights.iter().any(|h| !is_pos(h)) {
            return Err(Error::Invalid("roof heights must be positive".into()));
        }
        Ok(SpecialFlow { base, heights })
    }

    pub fn base(&self) -> &IetMap<S> {
        &self.base
    }

    pub fn heights(&self) -> &[S] {
        &self.heights
    }

    /// Flow `(x, s)` upward for `time`, applying the base map at each roof
    /// crossing. Exact backends refuse interior discontinuity hits; float
    /// backends nudge by a relative `2^-40` and count the nudge.
    pub fn evaluate(&self, x: S, s: S, time: S, crossing_cap: u64) -> Result<FlowPoint<S>> {
        if !(&time >= &S::zero()) {
            return Err(Error::Invalid("time must be nonnegative".into()));
        }
        let mut x = x;
        let mut s = s;
        let mut remaining = time;
        let mut crossings = 0u64;
        let mut nudges = 0u64;
        loop {
            let i = self.base.interval_of(&x)?;
            if !(&s >= &S::zero()) || !(&s < &self.heights[i]) {
                return Err(Error::OutOfDomain);
            }
            let headroom = self.heights[i].clone() - s.clone();
            if remaining < headroom {
                return Ok(FlowPoint { x, s: s + remaining, crossings, nudges });
            }
            remaining = remaining - headroom;
            x = self.base.evaluate(&x)?;
            s = S::zero();
            crossings += 1;
            if self.base.is_breakpoint(&x) {
                if S::is_exact() {
                    return Err(Error::DiscontinuityHit);
                }
                let nudge = self.base.total().clone()
                    * S::from_f64_exact(2f64.powi(-40)).expect("finite");
                x = x + nudge;
                nudges += 1;
            }
            if crossings >= crossing_cap {
                return Err(Error::CapExceeded(format!(
                    "flow exceeded {crossing_cap} roof crossings"
                )));
            }
        }
    }
}

/// Extended induction: one `Q_R` step on `(lambda, pi)` together with the
/// roof transport `h' = B h`. The suspension area is invariant.
pub fn extended_induction_step<S: Scalar>(
    lambda: &[S],
    p: &Permutation,
    h: &[S],
) -> Result<(Vec<S>, Permutation, Vec<S>, RauzyArrow)> {
    if h.len() != p.d() {
        return Err(Error::Invalid("height vector length mismatch".into()));
    }
    if h.iter().any(|x| !is_pos(x)) {
        return Err(Error::Invalid("roof heights must be positive".into()));
    }
    let (lam2, p2, arrow) = induction_step(lambda, p)?;
    let mut h2 = h.to_vec();
    h2[arrow.loser] = h2[arrow.loser].clone() + h2[arrow.winner].clone();
    Ok((lam2, p2, h2, arrow))
}
