//! Symmetrically normalized skeleton adjacency.

use crate::nn::Mat;
use crate::sim::SkeletonTopology;

/// Builds `Â = D^(−1/2) (A + I) D^(−1/2)` for the skeleton graph, where
/// `A` is the binary bone adjacency and `D` the degree matrix of `A + I`.
/// `Â` is symmetric, non-negative, and its spectral radius never exceeds 1.
pub fn normalized_adjacency(topology: &SkeletonTopology) -> Mat {
    let n = topology.joint_count();
    let mut a = Mat::zeros(n, n);
    for i in 0..n {
        a.set(i, i, 1.0);
    }
    for &(u, v) in topology.edges() {
        a.set(u, v, 1.0);
        a.set(v, u, 1.0);
    }
    let degree: Vec<f64> = (0..n).map(|i| a.row(i).iter().sum()).collect();
    let inv_sqrt: Vec<f64> = degree.iter().map(|d| 1.0 / d.sqrt()).collect();
    let mut out = Mat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            out.set(i, j, inv_sqrt[i] * a.get(i, j) * inv_sqrt[j]);
        }
    }
    out
}
