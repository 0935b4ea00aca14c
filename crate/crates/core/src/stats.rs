//! Goodness-of-fit helpers used by the diagnostics and tests.

use crate::error::{usage, Result};
use crate::special::gamma_quantile;

/// Kolmogorov–Smirnov distance between a sample and a continuous CDF.
pub fn ks_statistic<F: Fn(f64) -> f64>(sample: &[f64], cdf: F) -> Result<f64> {
    if sample.is_empty() {
        return usage("KS statistic of an empty sample");
    }
    let mut sorted: Vec<f64> = sample.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    Ok(d)
}

/// KS distance against Uniform(0, 1).
pub fn ks_uniform(sample: &[f64]) -> Result<f64> {
    ks_statistic(sample, |x| x.clamp(0.0, 1.0))
}

/// Asymptotic 99% critical value of the one-sample KS statistic.
pub fn ks_critical_99(n: usize) -> f64 {
    1.63 / (n as f64).sqrt()
}

/// Pearson χ² statistic of observed counts against expected probabilities.
pub fn chi_square_statistic(counts: &[u64], probs: &[f64]) -> Result<f64> {
    if counts.len() != probs.len() || counts.is_empty() {
        return usage("counts and probabilities must be nonempty and aligned");
    }
    let n: u64 = counts.iter().sum();
    let n = n as f64;
    Ok(counts
        .iter()
        .zip(probs)
        .map(|(&c, &p)| {
            let e = n * p;
            (c as f64 - e).powi(2) / e
        })
        .sum())
}

/// 99% quantile of χ² with `dof` degrees of freedom.
pub fn chi_square_critical_99(dof: usize) -> Result<f64> {
    Ok(2.0 * gamma_quantile(dof as f64 / 2.0, 0.99)?)
}

/// Bin index of `x` among sorted interior `edges` (`edges.len() + 1` bins).
pub fn bin_index(edges: &[f64], x: f64) -> usize {
    edges.partition_point(|&e| e <= x)
}

/// True if every count lies within `k` multinomial standard deviations of
/// its expectation.
pub fn within_multinomial_bands(counts: &[u64], probs: &[f64], k: f64) -> bool {
    let n = counts.iter().sum::<u64>() as f64;
    counts.iter().zip(probs).all(|(&c, &p)| {
        let sd = (n * p * (1.0 - p)).sqrt();
        (c as f64 - n * p).abs() <= k * sd
    })
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance; zero for fewer than two values.
pub fn sample_variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64
}

/// Split `0..n` into at most `batches` contiguous, nearly equal ranges.
pub fn batch_ranges(n: usize, batches: usize) -> Vec<std::ops::Range<usize>> {
    let b = batches.min(n).max(1);
    (0..b).map(|i| (i * n / b)..((i + 1) * n / b)).collect()
}
