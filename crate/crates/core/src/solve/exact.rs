use crate::error::{Error, Result};
use crate::graph::ConflictGraph;

use super::Solution;

/// Largest number of candidate sets the exhaustive solvers will visit.
pub const MAX_ENUMERATION: f64 = 2e6;

/// Dense symmetric matrix of `P(u, v) + P(v, u)`.
fn pair_matrix(g: &ConflictGraph) -> Vec<Vec<f64>> {
    let n = g.len();
    let mut m = vec![vec![0.0; n]; n];
    for (u, v, p) in g.penalties() {
        m[u][v] += p;
        m[v][u] += p;
    }
    m
}

struct Search<'a> {
    clusters: &'a [Vec<usize>],
    reward: Vec<f64>,
    pair: Vec<Vec<f64>>,
    lambda: f64,
    chosen: Vec<usize>,
    best: (f64, Vec<usize>),
    worst: f64,
}

impl Search<'_> {
    fn visit(&mut self, c: usize, value: f64) {
        if c == self.clusters.len() {
            if value > self.best.0 {
                self.best = (value, self.chosen.clone());
            }
            self.worst = self.worst.min(value);
            return;
        }
        self.visit(c + 1, value);
        for k in 0..self.clusters[c].len() {
            let v = self.clusters[c][k];
            let pen: f64 = self.chosen.iter().map(|&u| self.pair[u][v]).sum();
            self.chosen.push(v);
            self.visit(c + 1, value + self.reward[v] - self.lambda * pen);
            self.chosen.pop();
        }
    }
}

/// Exact maximum of the utility over all cluster-feasible sets, together with
/// the minimum over the same sets.
pub fn brute_force_range(g: &ConflictGraph, lambda: f64) -> Result<(Solution, f64)> {
    let clusters = g
        .clusters()
        .ok_or_else(|| Error::InvalidConfig("exhaustive search needs a clustered graph".into()))?;
    let size: f64 = clusters.iter().map(|c| (c.len() + 1) as f64).product();
    if size > MAX_ENUMERATION {
        return Err(Error::TooLarge(size));
    }
    let mut search = Search {
        clusters,
        reward: g.vertices().iter().map(|v| v.reward).collect(),
        pair: pair_matrix(g),
        lambda,
        chosen: Vec::new(),
        best: (0.0, Vec::new()),
        worst: 0.0,
    };
    search.visit(0, 0.0);
    let (value, set) = search.best;
    let mut sol = Solution::from_vertices(g, set, value, "brute_force");
    sol.meta.iterations = size as u64;
    Ok((sol, search.worst))
}

/// Exact utility maximiser by enumeration of every cluster-feasible set.
pub fn brute_force_opt(g: &ConflictGraph, lambda: f64) -> Result<Solution> {
    brute_force_range(g, lambda).map(|(sol, _)| sol)
}

/// Weight of a maximum-weight independent set, by enumeration.
pub fn brute_force_mwis(g: &ConflictGraph, weights: &[f64]) -> Result<f64> {
    let n = g.len();
    if n > 20 {
        return Err(Error::TooLarge(2f64.powi(n as i32)));
    }
    let masks: Vec<u32> = (0..n)
        .map(|v| g.neighbors(v).iter().fold(0u32, |m, &u| m | 1 << u))
        .collect();
    let mut best = 0.0f64;
    for set in 0u32..(1 << n) {
        let independent = (0..n).all(|v| set & (1 << v) == 0 || set & masks[v] == 0);
        if independent {
            let w: f64 = (0..n).filter(|&v| set & (1 << v) != 0).map(|v| weights[v]).sum();
            best = best.max(w);
        }
    }
    Ok(best)
}
