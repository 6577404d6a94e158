//! Fixed inputs shared by the benchmarks.

use trademap::synth::ClusterSpec;
use trademap::{gravity_flows, planted_cluster_scenario, FlowMatrix, Matrix};

/// Deterministic dense symmetric test matrix (no RNG needed).
pub fn symmetric(n: usize) -> Matrix {
    Matrix::from_fn(n, n, |i, j| {
        let (a, b) = (i.min(j) as f64, i.max(j) as f64);
        ((a * 12.9898 + b * 78.233).sin() * 43758.5453).fract()
    })
}

/// Noiseless two-cluster gravity flows, `2 * n_per_cluster` countries.
pub fn planted_flow(n_per_cluster: usize) -> FlowMatrix {
    let spec = ClusterSpec {
        n_per_cluster,
        centers: vec![[0.0, 0.0], [10.0, 0.0]],
        spread: 1.0,
        mass_range: (1.0, 10.0),
    };
    gravity_flows(&planted_cluster_scenario(1, &spec).unwrap(), 0.0).unwrap()
}
