//! Fitting and confidence-interval helpers shared by the experiments.

use rand::Rng;

/// Ordinary least squares `y ~ a + b x` with optional weights.
/// Returns `(intercept, slope)`.
pub fn linear_fit(xs: &[f64], ys: &[f64], weights: Option<&[f64]>) -> Option<(f64, f64)> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let w: Vec<f64> = match weights {
        Some(w) => w.to_vec(),
        None => vec![1.0; xs.len()],
    };
    let sw: f64 = w.iter().sum();
    if sw <= 0.0 {
        return None;
    }
    let mx = xs.iter().zip(&w).map(|(x, w)| x * w).sum::<f64>() / sw;
    let my = ys.iter().zip(&w).map(|(y, w)| y * w).sum::<f64>() / sw;
    let sxx: f64 = xs.iter().zip(&w).map(|(x, w)| w * (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = xs
        .iter()
        .zip(ys)
        .zip(&w)
        .map(|((x, y), w)| w * (x - mx) * (y - my))
        .sum();
    let slope = sxy / sxx;
    Some((my - slope * mx, slope))
}

/// Wilson score interval for a binomial proportion at ~95% confidence.
/// Returns `(low, high)`; handles zero counts with a one-sided bound.
pub fn wilson_interval(successes: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z = 1.959964;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Percentile bootstrap CI for a statistic of per-sample records.
///
/// `stat` maps a list of resampled indices to the statistic; `b` resamples.
pub fn bootstrap_ci<R: Rng>(
    rng: &mut R,
    n_samples: usize,
    b: usize,
    mut stat: impl FnMut(&[usize]) -> Option<f64>,
) -> Option<(f64, f64)> {
    if n_samples == 0 {
        return None;
    }
    let mut vals = Vec::with_capacity(b);
    let mut idx = vec![0usize; n_samples];
    for _ in 0..b {
        for slot in idx.iter_mut() {
            *slot = rng.gen_range(0..n_samples);
        }
        if let Some(v) = stat(&idx) {
            vals.push(v);
        }
    }
    if vals.len() < b / 2 {
        return None;
    }
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let lo = vals[(0.025 * (vals.len() - 1) as f64).round() as usize];
    let hi = vals[(0.975 * (vals.len() - 1) as f64).round() as usize];
    Some((lo, hi))
}

/// Mean and a simple block-bootstrap half-width for a correlated series.
pub fn block_bootstrap_halfwidth<R: Rng>(
    rng: &mut R,
    series: &[f64],
    block: usize,
    b: usize,
) -> f64 {
    let n = series.len();
    if n == 0 {
        return f64::INFINITY;
    }
    let block = block.clamp(1, n);
    let nblocks = n.div_ceil(block);
    let mut means = Vec::with_capacity(b);
    for _ in 0..b {
        let mut total = 0.0;
        let mut count = 0usize;
        for _ in 0..nblocks {
            let start = rng.gen_range(0..n);
            for k in 0..block {
                if count == n {
                    break;
                }
                total += series[(start + k) % n];
                count += 1;
            }
        }
        means.push(total / count as f64);
    }
    means.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let lo = means[(0.025 * (means.len() - 1) as f64).round() as usize];
    let hi = means[(0.975 * (means.len() - 1) as f64).round() as usize];
    (hi - lo) / 2.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::stream_rng;

    #[test]
    fn fit_recovers_exact_line() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys = [3.0, 5.0, 7.0, 9.0];
        let (a, b) = linear_fit(&xs, &ys, None).unwrap();
        assert!((a - 1.0).abs() < 1e-12);
        assert!((b - 2.0).abs() < 1e-12);
    }

    #[test]
    fn wilson_interval_sane() {
        let (lo, hi) = wilson_interval(50, 100);
        assert!(lo < 0.5 && 0.5 < hi);
        let (lo0, hi0) = wilson_interval(0, 100);
        assert_eq!(lo0, 0.0);
        assert!(hi0 > 0.0 && hi0 < 0.06);
    }

    #[test]
    fn bootstrap_ci_brackets_mean() {
        let data: Vec<f64> = (0..500).map(|i| (i % 10) as f64).collect();
        let mut rng = stream_rng(1, 0);
        let (lo, hi) = bootstrap_ci(&mut rng, data.len(), 200, |idx| {
            Some(idx.iter().map(|&i| data[i]).sum::<f64>() / idx.len() as f64)
        })
        .unwrap();
        assert!(lo < 4.5 && 4.5 < hi);
        assert!(hi - lo < 1.0);
    }
}
