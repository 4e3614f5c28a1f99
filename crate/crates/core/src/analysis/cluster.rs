//! One-dimensional k-means for grouping explorers by coverage.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::AnalysisError;

/// Seed used by [`cluster_explorers`].
pub const DEFAULT_CLUSTER_SEED: u64 = 0x5EED;
const RESTARTS: usize = 8;
const MAX_ITERATIONS: usize = 200;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Clustering {
    /// Ascending.
    pub centroids: Vec<f64>,
    /// For each input value, the rank of its centroid.
    pub labels: Vec<usize>,
    /// Sum of squared distances to the assigned centroid.
    pub inertia: f64,
}

impl Clustering {
    pub fn k(&self) -> usize {
        self.centroids.len()
    }

    pub fn label_name(&self, rank: usize) -> String {
        level_name(rank, self.k())
    }

    pub fn members(&self, rank: usize) -> impl Iterator<Item = usize> + '_ {
        self.labels.iter().enumerate().filter(move |(_, &l)| l == rank).map(|(i, _)| i)
    }
}

/// `low`/`medium`/`high` for three clusters, `low`/`high` for two.
pub fn level_name(rank: usize, k: usize) -> String {
    match (k, rank) {
        (1, _) => "all".to_string(),
        (2, 0) | (3, 0) => "low".to_string(),
        (3, 1) => "medium".to_string(),
        (2, 1) | (3, 2) => "high".to_string(),
        _ => format!("cluster-{rank}"),
    }
}

/// Groups coverage fractions into `k` explorer types, named by ascending
/// centroid.
pub fn cluster_explorers(values: &[f64], k: usize) -> Result<Clustering, AnalysisError> {
    kmeans_1d(values, k, DEFAULT_CLUSTER_SEED)
}

/// Lloyd's algorithm from k-means++ seeds, best of several seeded restarts.
pub fn kmeans_1d(values: &[f64], k: usize, seed: u64) -> Result<Clustering, AnalysisError> {
    if k == 0 {
        return Err(AnalysisError::BadK);
    }
    if values.len() < k {
        return Err(AnalysisError::TooFewPoints { points: values.len(), k });
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(AnalysisError::NonFinite);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(Vec<f64>, Vec<usize>, f64)> = None;
    for _ in 0..RESTARTS {
        let seeds = plus_plus_init(values, k, &mut rng);
        let (centroids, assignment) = lloyd(values, seeds);
        let inertia = inertia(values, &centroids, &assignment);
        if best.as_ref().is_none_or(|b| inertia < b.2) {
            best = Some((centroids, assignment, inertia));
        }
    }
    let (centroids, assignment, inertia) = best.expect("at least one restart");

    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| centroids[a].total_cmp(&centroids[b]));
    let mut rank = vec![0; k];
    for (r, &c) in order.iter().enumerate() {
        rank[c] = r;
    }
    Ok(Clustering {
        centroids: order.iter().map(|&c| centroids[c]).collect(),
        labels: assignment.iter().map(|&c| rank[c]).collect(),
        inertia,
    })
}

fn plus_plus_init(values: &[f64], k: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut centers = vec![values[rng.gen_range(0..values.len())]];
    while centers.len() < k {
        let weights: Vec<f64> = values
            .iter()
            .map(|&x| centers.iter().map(|&c| (x - c) * (x - c)).fold(f64::INFINITY, f64::min))
            .collect();
        let total: f64 = weights.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.gen::<f64>() * total;
            let mut acc = 0.0;
            weights
                .iter()
                .position(|&w| {
                    acc += w;
                    w > 0.0 && acc > target
                })
                .unwrap_or_else(|| weights.iter().rposition(|&w| w > 0.0).expect("positive total"))
        } else {
            rng.gen_range(0..values.len())
        };
        centers.push(values[pick]);
    }
    centers
}

fn nearest(x: f64, centroids: &[f64]) -> usize {
    let mut best = 0;
    for (j, &c) in centroids.iter().enumerate().skip(1) {
        if (x - c).abs() < (x - centroids[best]).abs() {
            best = j;
        }
    }
    best
}

fn lloyd(values: &[f64], mut centroids: Vec<f64>) -> (Vec<f64>, Vec<usize>) {
    let mut assignment: Vec<usize> = values.iter().map(|&x| nearest(x, &centroids)).collect();
    for _ in 0..MAX_ITERATIONS {
        for (j, c) in centroids.iter_mut().enumerate() {
            let members: Vec<f64> = values.iter().zip(&assignment).filter(|(_, &a)| a == j).map(|(&x, _)| x).collect();
            if let Some(m) = anchored_mean(&members) {
                *c = m;
            }
        }
        let next: Vec<usize> = values.iter().map(|&x| nearest(x, &centroids)).collect();
        if next == assignment {
            break;
        }
        assignment = next;
    }
    (centroids, assignment)
}

/// Mean computed as offsets from the first member, so a cluster of equal
/// values has exactly that value as its centroid.
fn anchored_mean(xs: &[f64]) -> Option<f64> {
    let &first = xs.first()?;
    Some(first + xs.iter().map(|&x| x - first).sum::<f64>() / xs.len() as f64)
}

fn inertia(values: &[f64], centroids: &[f64], assignment: &[usize]) -> f64 {
    values.iter().zip(assignment).map(|(&x, &a)| (x - centroids[a]).powi(2)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Exact 1-D k-means: optimal clusters are contiguous in sorted order,
    /// so enumerate every way to cut the sorted list into `k` runs.
    fn exact_centroids(values: &[f64], k: usize) -> Vec<f64> {
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        fn cost(run: &[f64]) -> (f64, f64) {
            let m = run.iter().sum::<f64>() / run.len() as f64;
            (run.iter().map(|x| (x - m).powi(2)).sum(), m)
        }
        fn go(v: &[f64], k: usize) -> (f64, Vec<f64>) {
            if k == 1 {
                let (c, m) = cost(v);
                return (c, vec![m]);
            }
            let mut best = (f64::INFINITY, vec![]);
            for cut in 1..=v.len() - (k - 1) {
                let (c0, m0) = cost(&v[..cut]);
                let (c1, mut rest) = go(&v[cut..], k - 1);
                if c0 + c1 < best.0 {
                    rest.insert(0, m0);
                    best = (c0 + c1, rest);
                }
            }
            best
        }
        go(&v, k).1
    }

    const NINE: [f64; 9] = [0.20, 0.22, 0.24, 0.42, 0.44, 0.46, 0.69, 0.71, 0.73];

    #[test]
    fn oracle_agrees_on_three_groups() {
        let oracle = exact_centroids(&NINE, 3);
        // frozen from the enumeration above
        for (o, want) in oracle.iter().zip([0.22, 0.44, 0.71]) {
            assert!((o - want).abs() < 1e-12);
        }
        let got = cluster_explorers(&NINE, 3).unwrap();
        for (g, o) in got.centroids.iter().zip(&oracle) {
            assert!((g - o).abs() < 1e-9, "{got:?}");
        }
        assert_eq!(got.labels, vec![0, 0, 0, 1, 1, 1, 2, 2, 2]);
        assert_eq!(got.label_name(1), "medium");
    }

    #[test]
    fn point_masses_are_exact() {
        let v = [0.9, 0.1, 0.5, 0.1, 0.9, 0.5, 0.5, 0.1, 0.9];
        let got = cluster_explorers(&v, 3).unwrap();
        assert_eq!(got.centroids, vec![0.1, 0.5, 0.9]);
        assert_eq!(got.inertia, 0.0);
    }

    #[test]
    fn single_cluster_is_the_mean() {
        let v = [0.2, 0.4, 0.9];
        let got = cluster_explorers(&v, 1).unwrap();
        assert!((got.centroids[0] - 0.5).abs() < 1e-12);
        assert_eq!(got.label_name(0), "all");
    }

    #[test]
    fn too_few_points() {
        assert_eq!(cluster_explorers(&[0.1, 0.2], 3).unwrap_err(), AnalysisError::TooFewPoints { points: 2, k: 3 });
        assert_eq!(cluster_explorers(&[0.1], 0).unwrap_err(), AnalysisError::BadK);
    }

    #[test]
    fn duplicates_fewer_distinct_than_k() {
        let got = cluster_explorers(&[0.3, 0.3, 0.3, 0.7], 3).unwrap();
        assert_eq!(got.inertia, 0.0);
        assert_eq!(got.labels.len(), 4);
    }

    proptest! {
        #[test]
        fn result_is_a_lloyd_fixed_point(v in prop::collection::vec(0.0f64..1.0, 3..40)) {
            let got = cluster_explorers(&v, 3).unwrap();
            for (i, &x) in v.iter().enumerate() {
                let own = (x - got.centroids[got.labels[i]]).abs();
                prop_assert!(got.centroids.iter().all(|c| own <= (x - c).abs() + 1e-12));
            }
            for r in 0..3 {
                let members: Vec<f64> = got.members(r).map(|i| v[i]).collect();
                if !members.is_empty() {
                    let m = members.iter().sum::<f64>() / members.len() as f64;
                    prop_assert!((got.centroids[r] - m).abs() < 1e-9);
                }
            }
        }

        #[test]
        fn labels_survive_increasing_affine_maps(v in prop::collection::vec(0.0f64..1.0, 3..30), a in 0.01f64..100.0, b in -10.0f64..10.0) {
            let base = cluster_explorers(&v, 3).unwrap();
            let mapped: Vec<f64> = v.iter().map(|x| a * x + b).collect();
            let moved = cluster_explorers(&mapped, 3).unwrap();
            prop_assert_eq!(base.labels, moved.labels);
        }
    }
}
