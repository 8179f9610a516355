use crate::graph::ConflictGraph;

use super::Solution;

/// Greedy maximum-weight independent set.
///
/// Repeatedly takes the vertex maximising `w(v) / (deg(v) + 1)` in the
/// residual graph, lowest id on ties, and deletes it with its neighbours.
/// The objective is the total weight of the chosen set.
pub fn gmwis(g: &ConflictGraph, weights: &[f64]) -> Solution {
    assert_eq!(weights.len(), g.len(), "one weight per vertex");
    let n = g.len();
    let mut alive = vec![true; n];
    let mut deg: Vec<usize> = (0..n).map(|v| g.degree(v)).collect();
    let mut remaining = n;
    let mut selected = Vec::new();
    let mut iterations = 0;
    while remaining > 0 {
        iterations += 1;
        let mut best: Option<(usize, f64)> = None;
        for v in (0..n).filter(|&v| alive[v]) {
            let score = weights[v] / (deg[v] + 1) as f64;
            if best.map_or(true, |(_, s)| score > s) {
                best = Some((v, score));
            }
        }
        let (v, _) = best.expect("some vertex is alive");
        selected.push(v);
        let mut doomed = vec![v];
        doomed.extend(g.neighbors(v).iter().copied().filter(|&u| alive[u]));
        for &x in &doomed {
            alive[x] = false;
        }
        remaining -= doomed.len();
        for &x in &doomed {
            for &y in g.neighbors(x) {
                if alive[y] {
                    deg[y] -= 1;
                }
            }
        }
    }
    let weight = selected.iter().map(|&v| weights[v]).sum();
    let mut sol = Solution::from_vertices(g, selected, weight, "gmwis");
    sol.meta.iterations = iterations;
    sol
}

/// `Σ w(v) / (deg(v) + 1)` on the full graph, the weight GMWIS always reaches.
pub fn gmwis_lower_bound(g: &ConflictGraph, weights: &[f64]) -> f64 {
    (0..g.len()).map(|v| weights[v] / (g.degree(v) + 1) as f64).sum()
}
