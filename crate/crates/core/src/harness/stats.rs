use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::sphere::geometric_pmf;

/// Pairwise summation in a fixed split order.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 16 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Sample mean with standard error `s / √N` (`s` the unbiased sample std).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
}

pub fn mean_and_stderr(xs: &[f64]) -> Estimate {
    let n = xs.len();
    if n == 0 {
        return Estimate {
            mean: f64::NAN,
            stderr: f64::NAN,
        };
    }
    let mean = pairwise_sum(xs) / n as f64;
    if n == 1 {
        return Estimate { mean, stderr: 0.0 };
    }
    let dev: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
    let var = pairwise_sum(&dev) / (n - 1) as f64;
    Estimate {
        mean,
        stderr: (var / n as f64).sqrt(),
    }
}

/// `(estimate − target) / stderr`. Zero stderr gives `0` on an exact
/// match and `±∞` otherwise.
pub fn z_score(estimate: f64, target: f64, stderr: f64) -> f64 {
    let diff = estimate - target;
    if stderr > 0.0 {
        diff / stderr
    } else if diff.abs() <= 1e-12 {
        0.0
    } else {
        diff.signum() * f64::INFINITY
    }
}

/// Plug-in Shannon entropy (bits) of an empirical histogram.
pub fn plugin_entropy(histogram: &BTreeMap<u64, u64>) -> f64 {
    let total: u64 = histogram.values().sum();
    if total == 0 {
        return 0.0;
    }
    let terms: Vec<f64> = histogram
        .values()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let q = c as f64 / total as f64;
            -q * q.log2()
        })
        .collect();
    pairwise_sum(&terms)
}

/// Outcome of a Pearson χ² goodness-of-fit test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChiSquareTest {
    pub statistic: f64,
    pub dof: usize,
    pub alpha: f64,
    pub critical: f64,
    pub p_value: f64,
    pub pass: bool,
}

/// Pearson χ² with `bins − 1` degrees of freedom. Bins with zero expected
/// count must be empty; a count there fails the test outright.
pub fn chi_square(observed: &[f64], expected: &[f64], alpha: f64) -> ChiSquareTest {
    assert_eq!(observed.len(), expected.len());
    let mut impossible = false;
    let mut terms = Vec::with_capacity(observed.len());
    for (&o, &e) in observed.iter().zip(expected) {
        if e <= 0.0 {
            impossible |= o > 0.0;
        } else {
            terms.push((o - e) * (o - e) / e);
        }
    }
    let dof = terms.len().saturating_sub(1).max(1);
    let statistic = if impossible {
        f64::INFINITY
    } else {
        pairwise_sum(&terms)
    };
    let dist = ChiSquared::new(dof as f64).expect("positive dof");
    let critical = dist.inverse_cdf(1.0 - alpha);
    let p_value = if statistic.is_finite() {
        1.0 - dist.cdf(statistic)
    } else {
        0.0
    };
    ChiSquareTest {
        statistic,
        dof,
        alpha,
        critical,
        p_value,
        pass: statistic <= critical,
    }
}

/// χ² fit of an iteration histogram to `P(i) = (1−p)^{i−1} p`.
///
/// Bins `1..=K` are kept while their expected count is at least 5; the
/// remaining mass goes into one tail bin.
pub fn geometric_fit(histogram: &BTreeMap<u64, u64>, p: f64, alpha: f64) -> ChiSquareTest {
    let total: u64 = histogram.values().sum();
    let n = total as f64;
    let mut observed = Vec::new();
    let mut expected = Vec::new();
    let mut i = 1u64;
    loop {
        let e = n * geometric_pmf(p, i);
        let tail_after = n * (1.0 - p).powf(i as f64);
        if e < 5.0 || tail_after < 5.0 {
            break;
        }
        observed.push(*histogram.get(&i).unwrap_or(&0) as f64);
        expected.push(e);
        i += 1;
    }
    let head: u64 = histogram.range(..i).map(|(_, &c)| c).sum();
    observed.push((total - head) as f64);
    expected.push(n * (1.0 - p).powf((i - 1) as f64));
    chi_square(&observed, &expected, alpha)
}

/// χ² fit of the 2×2 outcome table to `P(α, β) = (1 + αβ c) / 4`.
/// `counts[x][y]` indexes `x, y ∈ {0: +1, 1: −1}`.
pub fn outcome_table_fit(counts: &[[u64; 2]; 2], correlation: f64, alpha: f64) -> ChiSquareTest {
    let total: u64 = counts.iter().flatten().sum();
    let n = total as f64;
    let mut observed = Vec::with_capacity(4);
    let mut expected = Vec::with_capacity(4);
    for (x, row) in counts.iter().enumerate() {
        for (y, &c) in row.iter().enumerate() {
            let same = if x == y { 1.0 } else { -1.0 };
            observed.push(c as f64);
            expected.push(n * ((1.0 + same * correlation) / 4.0).max(0.0));
        }
    }
    chi_square(&observed, &expected, alpha)
}
