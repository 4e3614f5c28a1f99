//! Cluster coverage values into explorer types and compare two groups with a
//! permutation test.

use explab::analysis::{cluster_explorers, permutation_test_detailed, welch_t};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let coverage = [0.18, 0.21, 0.25, 0.40, 0.45, 0.47, 0.69, 0.72, 0.74, 0.23, 0.44];
    let clusters = cluster_explorers(&coverage, 3)?;
    for rank in 0..clusters.k() {
        let members: Vec<f64> = clusters.members(rank).map(|i| coverage[i]).collect();
        println!("{:>6}: centroid {:.3}, members {members:?}", clusters.label_name(rank), clusters.centroids[rank]);
    }

    let dense = [0.31, 0.28, 0.35, 0.30, 0.26];
    let sparse = [0.52, 0.47, 0.58, 0.44, 0.61, 0.50];
    let test = permutation_test_detailed(&dense, &sparse, 10_000, 1)?;
    println!("\ndense - sparse = {:.3}, p = {:.4} ({:?})", test.observed, test.p_value, test.method);
    if let Some(t) = welch_t(&dense, &sparse) {
        println!("Welch t = {:.3}, df = {:.1}", t.t, t.df);
    }
    Ok(())
}
