//! Two-sample tests on per-trajectory metrics.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::AnalysisError;

/// Label assignments at or below this count are enumerated exactly.
pub const EXACT_LIMIT: u128 = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PermutationMethod {
    Exact { assignments: u64 },
    MonteCarlo { iterations: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PermutationOutcome {
    pub p_value: f64,
    /// Difference in means, `a - b`.
    pub observed: f64,
    pub method: PermutationMethod,
}

/// Two-sided permutation p-value for the difference in means.
pub fn permutation_test(group_a: &[f64], group_b: &[f64], iterations: usize, seed: u64) -> Result<f64, AnalysisError> {
    permutation_test_detailed(group_a, group_b, iterations, seed).map(|o| o.p_value)
}

/// Like [`permutation_test`] but also reports the statistic and whether the
/// p-value is exact.
///
/// When the number of distinct label assignments `C(n_a + n_b, n_a)` is at
/// most [`EXACT_LIMIT`] every assignment is enumerated and `p` is the share
/// with `|mean difference|` at least the observed one. Otherwise `iterations`
/// random relabelings are drawn and `p = (hits + 1) / (iterations + 1)`.
pub fn permutation_test_detailed(
    group_a: &[f64],
    group_b: &[f64],
    iterations: usize,
    seed: u64,
) -> Result<PermutationOutcome, AnalysisError> {
    if group_a.is_empty() || group_b.is_empty() {
        return Err(AnalysisError::EmptyGroup);
    }
    if group_a.iter().chain(group_b).any(|v| !v.is_finite()) {
        return Err(AnalysisError::NonFinite);
    }
    let observed = mean(group_a) - mean(group_b);

    // canonical order keeps the test symmetric in its arguments
    let (first, second) = if canonical_key(group_a) <= canonical_key(group_b) {
        (group_a, group_b)
    } else {
        (group_b, group_a)
    };
    let pooled: Vec<f64> = first.iter().chain(second).copied().collect();
    let n_first = first.len();
    let total: f64 = pooled.iter().sum();
    let threshold = observed.abs() * (1.0 - 1e-9) - 1e-12;
    let stat = |sum_first: f64| (sum_first / n_first as f64 - (total - sum_first) / (pooled.len() - n_first) as f64).abs();

    let assignments = binomial(pooled.len() as u64, n_first as u64);
    if assignments <= EXACT_LIMIT {
        let mut hits = 0u64;
        let mut count = 0u64;
        for_each_subset_sum(&pooled, n_first, |s| {
            count += 1;
            if stat(s) >= threshold {
                hits += 1;
            }
        });
        return Ok(PermutationOutcome {
            p_value: hits as f64 / count as f64,
            observed,
            method: PermutationMethod::Exact { assignments: count },
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut shuffled = pooled.clone();
    let mut hits = 0usize;
    for _ in 0..iterations {
        shuffled.shuffle(&mut rng);
        if stat(shuffled[..n_first].iter().sum()) >= threshold {
            hits += 1;
        }
    }
    Ok(PermutationOutcome {
        p_value: (hits + 1) as f64 / (iterations + 1) as f64,
        observed,
        method: PermutationMethod::MonteCarlo { iterations },
    })
}

fn canonical_key(g: &[f64]) -> (usize, Vec<u64>) {
    let mut bits: Vec<f64> = g.to_vec();
    bits.sort_by(f64::total_cmp);
    (g.len(), bits.into_iter().map(f64::to_bits).collect())
}

fn binomial(n: u64, k: u64) -> u128 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return acc;
        }
    }
    acc
}

/// Calls `f` with the sum of every size-`k` subset of `values`.
fn for_each_subset_sum(values: &[f64], k: usize, mut f: impl FnMut(f64)) {
    let n = values.len();
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(idx.iter().map(|&i| values[i]).sum());
        // advance to the next combination in lexicographic order
        let Some(pos) = (0..k).rev().find(|&p| idx[p] < n - k + p) else {
            return;
        };
        idx[pos] += 1;
        for p in pos + 1..k {
            idx[p] = idx[p - 1] + 1;
        }
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn median(xs: &[f64]) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    Some(if v.len() % 2 == 0 { (v[mid - 1] + v[mid]) / 2.0 } else { v[mid] })
}

fn sample_variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WelchT {
    pub t: f64,
    pub df: f64,
}

/// Welch's unequal-variance t statistic with Welch-Satterthwaite degrees of
/// freedom. `None` when either group has fewer than two values or both
/// variances vanish.
pub fn welch_t(a: &[f64], b: &[f64]) -> Option<WelchT> {
    if a.len() < 2 || b.len() < 2 {
        return None;
    }
    let (va, vb) = (sample_variance(a) / a.len() as f64, sample_variance(b) / b.len() as f64);
    let se2 = va + vb;
    if se2 <= 0.0 {
        return None;
    }
    let t = (mean(a) - mean(b)) / se2.sqrt();
    let df = se2 * se2 / (va * va / (a.len() - 1) as f64 + vb * vb / (b.len() - 1) as f64);
    Some(WelchT { t, df })
}
