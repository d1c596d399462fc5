//! Small statistics toolkit: moments, Kolmogorov–Smirnov distances, least
//! squares and bootstrap intervals.

use rand::Rng;

use crate::sampling::{rng_for, SeedSpec};

/// Standard normal CDF.
#[inline]
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance (two-pass).
pub fn variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64
}

/// Median of the means of `groups` contiguous blocks. Estimates the mean
/// of laws with only a finite `1 + eps` moment, where a single large draw
/// would dominate the plain sample mean.
pub fn median_of_means(xs: &[f64], groups: usize) -> f64 {
    let k = groups.clamp(1, xs.len().max(1));
    let size = xs.len() / k;
    if size == 0 {
        return mean(xs);
    }
    let means: Vec<f64> = xs.chunks_exact(size).take(k).map(mean).collect();
    let v = sorted(&means);
    if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    }
}

fn sorted(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Sup-distance between the empirical CDF of `xs` and `cdf`.
pub fn ks_one_sample(xs: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let v = sorted(xs);
    let n = v.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in v.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    d
}

pub fn ks_normal(xs: &[f64]) -> f64 {
    ks_one_sample(xs, normal_cdf)
}

/// Sup-distance between two empirical CDFs.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let (a, b) = (sorted(a), sorted(b));
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Ordinary least squares fit `y = slope x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope.
    pub slope_se: f64,
}

pub fn fit_line(x: &[f64], y: &[f64]) -> LineFit {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let mx = mean(x);
    let my = mean(y);
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let rss: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| {
            let e = b - slope * a - intercept;
            e * e
        })
        .sum();
    let slope_se = if x.len() > 2 && sxx > 0.0 {
        (rss / (n - 2.0) / sxx).sqrt()
    } else {
        f64::NAN
    };
    LineFit {
        slope,
        intercept,
        slope_se,
    }
}

/// Percentile bootstrap interval for the mean of `xs`.
pub fn bootstrap_mean_ci(xs: &[f64], resamples: usize, level: f64, seed: SeedSpec) -> (f64, f64) {
    bootstrap_ratio_ci(xs, &vec![1.0; xs.len()], resamples, level, seed)
}

/// Percentile bootstrap interval for `sum(num) / sum(den)`, resampling
/// indices jointly.
pub fn bootstrap_ratio_ci(
    num: &[f64],
    den: &[f64],
    resamples: usize,
    level: f64,
    seed: SeedSpec,
) -> (f64, f64) {
    let n = num.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mut rng = rng_for(seed);
    let mut stats = Vec::with_capacity(resamples);
    for _ in 0..resamples {
        let (mut a, mut b) = (0.0, 0.0);
        for _ in 0..n {
            let k = rng.random_range(0..n);
            a += num[k];
            b += den[k];
        }
        stats.push(a / b);
    }
    stats.sort_by(f64::total_cmp);
    let q = |p: f64| {
        let idx = (p * (resamples - 1) as f64).round() as usize;
        stats[idx.min(resamples - 1)]
    };
    let tail = 0.5 * (1.0 - level);
    (q(tail), q(1.0 - tail))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_cdf_values() {
        assert!((normal_cdf(0.0) - 0.5).abs() < 1e-16);
        assert!((normal_cdf(1.959963984540054) - 0.975).abs() < 1e-15);
        assert!((normal_cdf(-3.0) - 0.0013498980316301).abs() < 1e-15);
    }

    #[test]
    fn ks_of_exact_quantiles_is_small() {
        let n = 1000;
        let xs: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        let d = ks_one_sample(&xs, |x| x.clamp(0.0, 1.0));
        assert!((d - 0.5 / n as f64).abs() < 1e-12);
        assert_eq!(ks_two_sample(&xs, &xs), 0.0);
        let shifted: Vec<f64> = xs.iter().map(|x| x + 0.1).collect();
        assert!((ks_two_sample(&xs, &shifted) - 0.1).abs() < 2e-3);
    }

    #[test]
    fn line_fit_recovers_exact_line() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 2.5 * v - 1.0).collect();
        let f = fit_line(&x, &y);
        assert!((f.slope - 2.5).abs() < 1e-12 && (f.intercept + 1.0).abs() < 1e-12);
        assert!(f.slope_se.abs() < 1e-12);
    }

    #[test]
    fn moments_and_bootstrap() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(mean(&xs), 2.5);
        assert!((variance(&xs) - 5.0 / 3.0).abs() < 1e-15);
        let (lo, hi) = bootstrap_mean_ci(&xs, 500, 0.95, SeedSpec::new(1, 2));
        assert!(lo <= 2.5 && 2.5 <= hi && lo >= 1.0 && hi <= 4.0);
    }

    #[test]
    fn median_of_means_ignores_one_outlier() {
        let mut xs = vec![1.0; 100];
        xs[7] = 1e9;
        assert_eq!(median_of_means(&xs, 5), 1.0);
        assert_eq!(median_of_means(&[1.0, 2.0, 3.0, 4.0], 2), 2.5);
        assert_eq!(median_of_means(&[3.0, 1.0, 2.0], 3), 2.0);
    }
}
