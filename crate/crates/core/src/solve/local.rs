use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::graph::ConflictGraph;
use crate::objective::utility;

use super::Solution;

/// Partition matroid over a subset of the vertices: at most one pick per cluster.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionMatroid {
    clusters: Vec<Vec<usize>>,
    /// Cluster of each vertex, `None` outside the ground set.
    cluster_of: Vec<Option<usize>>,
}

impl PartitionMatroid {
    /// The matroid given by a clustered graph's clusters.
    pub fn from_graph(g: &ConflictGraph) -> Result<Self> {
        let clusters = g
            .clusters()
            .ok_or_else(|| Error::InvalidConfig("local search needs a clustered graph".into()))?
            .to_vec();
        let cluster_of = (0..g.len()).map(|v| g.cluster_of(v)).collect();
        Ok(PartitionMatroid { clusters, cluster_of })
    }

    /// The induced matroid on the ground set minus `removed`.
    pub fn without(&self, removed: &[usize]) -> Self {
        let mut cluster_of = self.cluster_of.clone();
        for &v in removed {
            cluster_of[v] = None;
        }
        let clusters = self
            .clusters
            .iter()
            .map(|c| c.iter().copied().filter(|&v| cluster_of[v].is_some()).collect())
            .collect();
        PartitionMatroid { clusters, cluster_of }
    }

    pub fn clusters(&self) -> &[Vec<usize>] {
        &self.clusters
    }

    pub fn cluster_of(&self, v: usize) -> Option<usize> {
        self.cluster_of[v]
    }

    /// Number of ground-set elements.
    pub fn ground_size(&self) -> usize {
        self.cluster_of.iter().filter(|c| c.is_some()).count()
    }

    pub fn is_independent(&self, set: &[usize]) -> bool {
        let mut used = vec![false; self.clusters.len()];
        set.iter().all(|&v| match self.cluster_of.get(v).copied().flatten() {
            Some(c) => !std::mem::replace(&mut used[c], true),
            None => false,
        })
    }
}

/// The utility `U(I) = Σ R(v) − λ Σ P(u, v)` on a clustered graph.
#[derive(Debug, Clone, Copy)]
pub struct Utility<'a> {
    pub g: &'a ConflictGraph,
    pub lambda: f64,
}

impl Utility<'_> {
    pub fn value(&self, set: &[usize]) -> f64 {
        utility(set, self.g, self.lambda)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LsOutcome {
    /// Chosen vertices, ascending.
    pub set: Vec<usize>,
    pub value: f64,
    /// Accepted moves, greedy additions included.
    pub moves: u64,
    /// Candidate scans, accepted or not.
    pub iterations: u64,
}

/// Incremental view of `U` around a current set.
struct State<'a> {
    f: Utility<'a>,
    m: &'a PartitionMatroid,
    in_set: Vec<bool>,
    members: BTreeSet<usize>,
    occupant: Vec<Option<usize>>,
    /// `pen[v] = Σ_{u ∈ I, u ≠ v} P(u, v) + P(v, u)`.
    pen: Vec<f64>,
    value: f64,
}

impl<'a> State<'a> {
    fn new(f: Utility<'a>, m: &'a PartitionMatroid) -> Self {
        let n = f.g.len();
        State {
            f,
            m,
            in_set: vec![false; n],
            members: BTreeSet::new(),
            occupant: vec![None; m.clusters.len()],
            pen: vec![0.0; n],
            value: 0.0,
        }
    }

    /// Change in `U` from adding `v` (or minus the change from removing it).
    fn gain(&self, v: usize) -> f64 {
        self.f.g.vertex(v).reward - self.f.lambda * self.pen[v]
    }

    fn pair_penalty(&self, a: usize, b: usize) -> f64 {
        self.f.g.penalty(a, b) + self.f.g.penalty(b, a)
    }

    fn insert(&mut self, v: usize) {
        self.value += self.gain(v);
        self.in_set[v] = true;
        self.members.insert(v);
        self.occupant[self.m.cluster_of(v).expect("ground element")] = Some(v);
        for (u, out, inc) in self.f.g.penalty_neighbors(v) {
            self.pen[u] += out + inc;
        }
    }

    fn remove(&mut self, v: usize) {
        self.value -= self.gain(v);
        self.in_set[v] = false;
        self.members.remove(&v);
        self.occupant[self.m.cluster_of(v).expect("ground element")] = None;
        for (u, out, inc) in self.f.g.penalty_neighbors(v) {
            self.pen[u] -= out + inc;
        }
    }
}

/// Smallest improvement a move must bring at current value `f`.
fn slack(f: f64, eps: f64, n: usize) -> f64 {
    if eps == 0.0 {
        // strict improvement, with room for rounding in the running value
        1e-12 * f.abs().max(1.0)
    } else {
        let scale = if f > 0.0 { f } else { f.abs().max(1.0) };
        eps / (n * n) as f64 * scale
    }
}

/// Local search over `m` for the utility `f`.
///
/// A greedy phase adds the best feasible vertex while it improves `f` by more
/// than the slack. Then delete moves, and add or swap moves, are tried in
/// ascending vertex order and the first one improving `f` by the slack is
/// taken, until none is left. With `eps = 0` every move must strictly improve.
pub fn ls(m: &PartitionMatroid, f: Utility<'_>, eps: f64) -> LsOutcome {
    assert!(eps >= 0.0, "eps must be non-negative");
    let n = m.ground_size().max(1);
    let ground: Vec<usize> = (0..f.g.len()).filter(|&v| m.cluster_of(v).is_some()).collect();
    let mut st = State::new(f, m);
    let (mut moves, mut iterations) = (0u64, 0u64);
    let passes = |delta: f64, cur: f64| {
        let s = slack(cur, eps, n);
        if eps == 0.0 {
            delta > s
        } else {
            delta >= s
        }
    };

    loop {
        iterations += 1;
        let mut best: Option<(usize, f64)> = None;
        for &v in &ground {
            if st.occupant[m.cluster_of(v).unwrap()].is_none() {
                let g = st.gain(v);
                if best.map_or(true, |(_, b)| g > b) {
                    best = Some((v, g));
                }
            }
        }
        match best {
            // f(I + v) > (1 + eps/N^2) f(I), taken literally
            Some((v, g)) if g > eps / (n * n) as f64 * st.value => {
                st.insert(v);
                moves += 1;
            }
            _ => break,
        }
    }

    'search: loop {
        iterations += 1;
        let cur = st.value;
        let members: Vec<usize> = st.members.iter().copied().collect();
        for &d in &members {
            if passes(-st.gain(d), cur) {
                st.remove(d);
                moves += 1;
                continue 'search;
            }
        }
        let min_gain = members.iter().map(|&d| st.gain(d)).fold(f64::INFINITY, f64::min);
        for &a in &ground {
            if st.in_set[a] {
                continue;
            }
            let ga = st.gain(a);
            if let Some(d) = st.occupant[m.cluster_of(a).unwrap()] {
                let delta = ga + f.lambda * st.pair_penalty(d, a) - st.gain(d);
                if passes(delta, cur) {
                    st.remove(d);
                    st.insert(a);
                    moves += 1;
                    continue 'search;
                }
                continue;
            }
            if passes(ga, cur) {
                st.insert(a);
                moves += 1;
                continue 'search;
            }
            // swapping out d only helps through the penalty d and a share,
            // unless some member is cheap enough to drop on its own merits
            let swap_out = if passes(ga - min_gain, cur) {
                members
                    .iter()
                    .copied()
                    .find(|&d| passes(ga + f.lambda * st.pair_penalty(d, a) - st.gain(d), cur))
            } else {
                f.g.neighbors(a)
                    .iter()
                    .copied()
                    .filter(|&d| st.in_set[d])
                    .find(|&d| passes(ga + f.lambda * st.pair_penalty(d, a) - st.gain(d), cur))
            };
            if let Some(d) = swap_out {
                st.remove(d);
                st.insert(a);
                moves += 1;
                continue 'search;
            }
        }
        break;
    }

    let set: Vec<usize> = st.members.into_iter().collect();
    LsOutcome {
        value: f.value(&set),
        set,
        moves,
        iterations,
    }
}

/// Utility maximisation: local search on `m`, again on `m` without the first
/// answer, and the better of the two.
pub fn um(m: &PartitionMatroid, f: Utility<'_>, eps: f64) -> Solution {
    let first = ls(m, f, eps);
    let second = ls(&m.without(&first.set), f, eps);
    let (moves, iterations) = (first.moves + second.moves, first.iterations + second.iterations);
    let best = if second.value > first.value { second } else { first };
    let mut sol = Solution::from_vertices(f.g, best.set, best.value, "um");
    sol.meta.moves = moves;
    sol.meta.iterations = iterations;
    sol
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::solve::testutil::{random_clustered, vertex};
    use crate::solve::{brute_force_range, verify, Mode};

    fn graph(rewards: &[(usize, f64)], pens: &[(usize, usize, f64)]) -> ConflictGraph {
        let vs: Vec<_> = rewards.iter().enumerate().map(|(i, &(c, r))| vertex(i, c, 1, 1, r)).collect();
        let n_clusters = rewards.iter().map(|r| r.0).max().map_or(0, |c| c + 1);
        let clusters = (0..n_clusters)
            .map(|c| (0..rewards.len()).filter(|&i| rewards[i].0 == c).collect())
            .collect();
        ConflictGraph::clustered(vs, clusters, pens.iter().copied()).unwrap()
    }

    #[test]
    fn single_cluster_takes_the_best() {
        let g = graph(&[(0, 5.0), (0, 3.0)], &[]);
        let m = PartitionMatroid::from_graph(&g).unwrap();
        let out = ls(&m, Utility { g: &g, lambda: 1.0 }, 0.0);
        assert_eq!(out.set, vec![0]);
        assert_eq!(out.value, 5.0);
    }

    #[test]
    fn heavy_mutual_penalty_keeps_one() {
        let g = graph(&[(0, 2.0), (1, 2.0)], &[(0, 1, 10.0), (1, 0, 10.0)]);
        let m = PartitionMatroid::from_graph(&g).unwrap();
        let f = Utility { g: &g, lambda: 1.0 };
        let sol = um(&m, f, 0.0);
        assert_eq!(sol.selected.len(), 1);
        assert_eq!(sol.objective, 2.0);
        let (opt, _) = brute_force_range(&g, 1.0).unwrap();
        assert_eq!(opt.objective, 2.0);
    }

    #[test]
    fn zero_rewards_give_zero() {
        let g = graph(&[(0, 0.0), (1, 0.0), (1, 0.0)], &[(0, 1, 1.0)]);
        let m = PartitionMatroid::from_graph(&g).unwrap();
        let sol = um(&m, Utility { g: &g, lambda: 1.0 }, 0.1);
        assert_eq!(sol.objective, 0.0);
        assert!(verify(&g, &sol.selected, Mode::ClusterFeasible));
    }

    #[test]
    fn swap_escapes_a_penalised_pick() {
        // greedy takes 0 then 2 for 3 + 3 - 1; trading 0 for the
        // unpenalised 1 is worth 0.5 more
        let g = graph(&[(0, 3.0), (0, 2.5), (1, 3.0)], &[(0, 2, 0.5), (2, 0, 0.5)]);
        let m = PartitionMatroid::from_graph(&g).unwrap();
        let f = Utility { g: &g, lambda: 1.0 };
        let out = ls(&m, f, 0.0);
        assert_eq!(out.value, 5.5);
        assert_eq!(out.set, vec![1, 2]);
    }

    #[test]
    fn restricted_matroid_drops_elements() {
        let g = graph(&[(0, 1.0), (0, 2.0), (1, 1.0)], &[]);
        let m = PartitionMatroid::from_graph(&g).unwrap();
        let r = m.without(&[1, 2]);
        assert_eq!(r.ground_size(), 1);
        assert_eq!(r.clusters(), &[vec![0], vec![]]);
        assert!(r.is_independent(&[0]));
        assert!(!r.is_independent(&[1]));
        assert!(!m.is_independent(&[0, 1]));
    }

    #[test]
    fn approximation_on_small_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..150 {
            let n = rng.gen_range(1..=12);
            let g = random_clustered(&mut rng, n, 3, 0.4, 1.5);
            let lambda = rng.gen_range(0.0..2.0);
            let m = PartitionMatroid::from_graph(&g).unwrap();
            let (opt, min) = brute_force_range(&g, lambda).unwrap();
            for eps in [0.0, 0.5] {
                let sol = um(&m, Utility { g: &g, lambda }, eps);
                assert!(verify(&g, &sol.selected, Mode::ClusterFeasible));
                assert!((sol.objective - utility(&sol.selected, &g, lambda)).abs() < 1e-9);
                assert!(sol.objective <= opt.objective + 1e-9);
                assert!(sol.objective >= (opt.objective + 2.0 * min) / (4.0 + 2.0 * eps) - 1e-9, "um {} opt {} min {min}", sol.objective, opt.objective);
            }
        }
    }

    #[test]
    fn accepted_moves_never_lower_the_value() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let g = random_clustered(&mut rng, 30, 4, 0.3, 1.0);
            let m = PartitionMatroid::from_graph(&g).unwrap();
            let f = Utility { g: &g, lambda: 1.0 };
            let out = ls(&m, f, 0.1);
            // the final set is a local optimum: no single add, delete or swap helps
            let n = m.ground_size() as f64;
            let tol = 0.1 / (n * n) * out.value.abs().max(1.0);
            for v in 0..g.len() {
                let mut s = out.set.clone();
                if let Some(p) = s.iter().position(|&x| x == v) {
                    s.remove(p);
                    assert!(f.value(&s) < out.value + tol);
                } else {
                    s.retain(|&x| g.cluster_of(x) != g.cluster_of(v));
                    s.push(v);
                    assert!(f.value(&s) < out.value + tol);
                }
            }
            assert!(out.value >= 0.0);
            assert!(out.iterations <= out.moves + 2);
        }
    }

    #[test]
    fn deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let g = random_clustered(&mut rng, 40, 5, 0.3, 1.0);
        let m = PartitionMatroid::from_graph(&g).unwrap();
        let f = Utility { g: &g, lambda: 0.7 };
        assert_eq!(um(&m, f, 0.1), um(&m, f, 0.1));
    }
}
