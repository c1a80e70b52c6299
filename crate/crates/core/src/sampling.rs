//! Deterministic seeded randomness.
//!
//! All randomness flows from one master seed through counter-based ChaCha
//! streams, so Monte Carlo results are independent of worker count and
//! iteration order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// RNG for a (master seed, stream index) pair.
pub fn stream_rng(master: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(stream);
    rng
}

/// Uniform sample from the open standard simplex `{x > 0, sum x = 1}`
/// (normalized exponential spacings).
pub fn sample_simplex<R: Rng>(rng: &mut R, d: usize) -> Vec<f64> {
    loop {
        let e: Vec<f64> = (0..d).map(|_| -rng.gen::<f64>().ln()).collect();
        let s: f64 = e.iter().sum();
        if s.is_finite() && e.iter().all(|&x| x > 0.0) {
            return e.iter().map(|&x| x / s).collect();
        }
    }
}
