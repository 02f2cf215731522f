//! Statistical helpers for the Monte Carlo harness: moments, empirical CDFs,
//! Kolmogorov-Smirnov tests, binned chi-square comparison, and the reference
//! CDFs the campaigns test against.

use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

pub fn covariance(xs: &[f64], ys: &[f64]) -> f64 {
    let (mx, my) = (mean(xs), mean(ys));
    xs.iter()
        .zip(ys)
        .map(|(x, y)| (x - mx) * (y - my))
        .sum::<f64>()
        / (xs.len() as f64 - 1.0)
}

pub fn correlation(xs: &[f64], ys: &[f64]) -> f64 {
    covariance(xs, ys) / (variance(xs) * variance(ys)).sqrt()
}

/// Quantile of a sample by linear interpolation, q in [0, 1].
pub fn percentile(xs: &[f64], q: f64) -> f64 {
    let mut sorted = xs.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q.clamp(0.0, 1.0) * (sorted.len() as f64 - 1.0);
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] * (1.0 - frac) + sorted[hi] * frac
}

pub fn median(xs: &[f64]) -> f64 {
    percentile(xs, 0.5)
}

pub fn normal_cdf(x: f64) -> f64 {
    Normal::new(0.0, 1.0).unwrap().cdf(x)
}

pub fn normal_quantile(p: f64) -> f64 {
    Normal::new(0.0, 1.0).unwrap().inverse_cdf(p)
}

/// CDF of the largest subcritical component in window coordinates:
/// exp(-c e^{-x}).
pub fn gumbel_form_cdf(x: f64, c: f64) -> f64 {
    (-c * (-x).exp()).exp()
}

/// Wilson score interval for a binomial proportion at `z` standard normal
/// quantiles.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    (center - half, center + half)
}

/// Survival function of the Kolmogorov distribution:
/// Q(lambda) = 2 sum_{k>=1} (-1)^{k-1} e^{-2 k^2 lambda^2}.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=100 {
        let term = (-2.0 * (k as f64 * lambda).powi(2)).exp();
        sum += sign * term;
        sign = -sign;
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Result of a Kolmogorov-Smirnov test.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
    pub n_effective: f64,
}

/// One-sample KS test against an arbitrary continuous CDF. The p-value uses
/// the asymptotic Kolmogorov distribution with the usual finite-n correction.
pub fn ks_one_sample<F: Fn(f64) -> f64>(sample: &[f64], cdf: F) -> KsResult {
    let mut xs = sample.to_vec();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max((f - i as f64 / n).abs());
        d = d.max(((i as f64 + 1.0) / n - f).abs());
    }
    KsResult {
        statistic: d,
        p_value: kolmogorov_sf((n.sqrt() + 0.12 + 0.11 / n.sqrt()) * d),
        n_effective: n,
    }
}

/// Two-sample KS test.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> KsResult {
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    xs.sort_by(|p, q| p.partial_cmp(q).unwrap());
    ys.sort_by(|p, q| p.partial_cmp(q).unwrap());
    let (na, nb) = (xs.len() as f64, ys.len() as f64);
    let mut i = 0usize;
    let mut j = 0usize;
    let mut d: f64 = 0.0;
    while i < xs.len() && j < ys.len() {
        let x = xs[i].min(ys[j]);
        while i < xs.len() && xs[i] <= x {
            i += 1;
        }
        while j < ys.len() && ys[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    let ne = na * nb / (na + nb);
    KsResult {
        statistic: d,
        p_value: kolmogorov_sf((ne.sqrt() + 0.12 + 0.11 / ne.sqrt()) * d),
        n_effective: ne,
    }
}

/// Result of a binned two-sample chi-square comparison.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ChiSquareResult {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Two-sample chi-square on integer-valued samples. Values are binned by
/// exact value, then adjacent bins are merged until every bin holds at least
/// five pooled counts scaled to the smaller sample.
pub fn chi_square_two_sample(a: &[u64], b: &[u64]) -> ChiSquareResult {
    let max = a.iter().chain(b).copied().max().unwrap_or(0) as usize;
    let mut ca = vec![0f64; max + 1];
    let mut cb = vec![0f64; max + 1];
    for &x in a {
        ca[x as usize] += 1.0;
    }
    for &x in b {
        cb[x as usize] += 1.0;
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let min_expected = 5.0;
    let scale = na.min(nb) / (na + nb);
    // merge adjacent value bins until pooled mass is adequate
    let mut bins: Vec<(f64, f64)> = Vec::new();
    let mut acc = (0.0, 0.0);
    for i in 0..=max {
        acc.0 += ca[i];
        acc.1 += cb[i];
        if (acc.0 + acc.1) * scale >= min_expected {
            bins.push(acc);
            acc = (0.0, 0.0);
        }
    }
    if acc.0 + acc.1 > 0.0 {
        if let Some(last) = bins.last_mut() {
            last.0 += acc.0;
            last.1 += acc.1;
        } else {
            bins.push(acc);
        }
    }
    if bins.len() < 2 {
        // everything in one bin: the samples are indistinguishable at this
        // resolution
        return ChiSquareResult {
            statistic: 0.0,
            dof: 1,
            p_value: 1.0,
        };
    }
    let mut statistic = 0.0;
    for &(oa, ob) in &bins {
        let pooled = (oa + ob) / (na + nb);
        let (ea, eb) = (na * pooled, nb * pooled);
        statistic += (oa - ea).powi(2) / ea + (ob - eb).powi(2) / eb;
    }
    let dof = bins.len() - 1;
    let p_value = 1.0 - ChiSquared::new(dof as f64).unwrap().cdf(statistic);
    ChiSquareResult {
        statistic,
        dof,
        p_value,
    }
}

/// Chi-square goodness of fit of observed counts against expected counts
/// (already on the same total). Bins with expected < 5 should be merged by
/// the caller.
pub fn chi_square_gof(observed: &[f64], expected: &[f64]) -> ChiSquareResult {
    let statistic: f64 = observed
        .iter()
        .zip(expected)
        .filter(|&(_, &e)| e > 0.0)
        .map(|(&o, &e)| (o - e).powi(2) / e)
        .sum();
    let dof = expected.iter().filter(|&&e| e > 0.0).count().saturating_sub(1);
    let p_value = if dof == 0 {
        1.0
    } else {
        1.0 - ChiSquared::new(dof as f64).unwrap().cdf(statistic)
    };
    ChiSquareResult {
        statistic,
        dof,
        p_value,
    }
}
