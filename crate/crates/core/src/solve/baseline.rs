use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::channel::ChannelBlock;
use crate::error::{Error, Result};
use crate::graph::{ConflictGraph, Vertex};
use crate::objective::utility;

use super::{gmwis, Solution};

/// Trials used by random selection unless configured otherwise.
pub const DEFAULT_TRIALS: usize = 10_000;

/// Non-preemptive sum multi-colouring on a job conflict graph.
///
/// Jobs with different demands are made to conflict, then rounds of
/// unit-weight GMWIS pick groups of equal demand. Each group gets the next
/// `demand` colours from a shared cursor. Colouring stops at the first group
/// that no longer fits in `1..=n_colors`.
pub fn npsmc_jobs(adj: &[Vec<usize>], demands: &[u8], n_colors: u8) -> Result<Vec<Option<ChannelBlock>>> {
    if n_colors < 1 {
        return Err(Error::InvalidConfig("npSMC needs at least one colour".into()));
    }
    assert_eq!(adj.len(), demands.len(), "one demand per job");
    let n = adj.len();
    let mut colour = vec![None; n];
    let mut remaining: Vec<usize> = (0..n).collect();
    let mut cursor = 1u16;
    while !remaining.is_empty() {
        let local: BTreeMap<usize, usize> = remaining.iter().enumerate().map(|(k, &j)| (j, k)).collect();
        let vertices: Vec<Vertex> = remaining
            .iter()
            .enumerate()
            .map(|(k, &j)| Vertex {
                id: k,
                members: vec![j],
                block: ChannelBlock { lo: 1, len: demands[j].max(1) },
                reward: 1.0,
            })
            .collect();
        let mut edges = Vec::new();
        for (a, &j) in remaining.iter().enumerate() {
            for &i in &adj[j] {
                if let Some(&b) = local.get(&i) {
                    edges.push((a, b));
                }
            }
            for (b, &i) in remaining.iter().enumerate().skip(a + 1) {
                if demands[i] != demands[j] {
                    edges.push((a, b));
                }
            }
        }
        let residual = ConflictGraph::from_edges(vertices, edges);
        let group = gmwis(&residual, &vec![1.0; residual.len()]).selected;
        let len = demands[remaining[group[0]]];
        if len == 0 || cursor + len as u16 - 1 > n_colors as u16 {
            break;
        }
        for &k in &group {
            colour[remaining[k]] = Some(ChannelBlock { lo: cursor as u8, len });
        }
        cursor += len as u16;
        let done: Vec<usize> = group.iter().map(|&k| remaining[k]).collect();
        remaining.retain(|j| !done.contains(j));
    }
    Ok(colour)
}

/// npSMC on a PA conflict graph with uniform channel availability.
///
/// Each service area becomes one job demanding its PAL count; two jobs
/// conflict when any of their vertices do. The objective is the number of
/// areas served.
pub fn npsmc(g: &ConflictGraph, n_colors: u8) -> Result<Solution> {
    let owners: Vec<usize> = {
        let mut o: Vec<usize> = g.vertices().iter().map(|v| v.owner()).collect();
        o.sort_unstable();
        o.dedup();
        o
    };
    let job_of = |node: usize| owners.binary_search(&node).expect("known owner");
    let mut demands = vec![0u8; owners.len()];
    for v in g.vertices() {
        demands[job_of(v.owner())] = v.block.len;
    }
    let mut adj = vec![Vec::new(); owners.len()];
    for (u, v) in g.edges() {
        let (a, b) = (job_of(g.vertex(u).owner()), job_of(g.vertex(v).owner()));
        if a != b {
            adj[a].push(b);
            adj[b].push(a);
        }
    }
    for l in &mut adj {
        l.sort_unstable();
        l.dedup();
    }
    let colours = npsmc_jobs(&adj, &demands, n_colors)?;
    let index: BTreeMap<(usize, ChannelBlock), usize> =
        g.vertices().iter().map(|v| ((v.owner(), v.block), v.id)).collect();
    let selected: Vec<usize> = colours
        .iter()
        .enumerate()
        .filter_map(|(j, c)| c.and_then(|b| index.get(&(owners[j], b)).copied()))
        .collect();
    let mut sol = Solution::from_vertices(g, selected, 0.0, "npsmc");
    for (j, c) in colours.iter().enumerate() {
        if let Some(b) = c {
            sol.per_node.insert(owners[j], *b);
        }
    }
    sol.objective = sol.per_node.len() as f64;
    Ok(sol)
}

/// Max-revenue greedy: keep adding the highest-reward vertex that conflicts
/// with nothing chosen so far, lowest id on ties.
pub fn mra(g: &ConflictGraph) -> Solution {
    let mut order: Vec<usize> = (0..g.len()).collect();
    order.sort_by(|&a, &b| g.vertex(b).reward.total_cmp(&g.vertex(a).reward).then(a.cmp(&b)));
    let mut blocked = vec![false; g.len()];
    let mut selected = Vec::new();
    for v in order {
        if blocked[v] {
            continue;
        }
        selected.push(v);
        blocked[v] = true;
        for &u in g.neighbors(v) {
            blocked[u] = true;
        }
    }
    let total = selected.iter().map(|&v| g.vertex(v).reward).sum();
    let mut sol = Solution::from_vertices(g, selected, total, "mra");
    sol.meta.iterations = g.len() as u64;
    sol
}

/// Best of `trials` draws of one uniform vertex per cluster.
pub fn random_select(g: &ConflictGraph, lambda: f64, trials: usize, seed: u64) -> Result<Solution> {
    let clusters = g
        .clusters()
        .ok_or_else(|| Error::InvalidConfig("random selection needs a clustered graph".into()))?;
    if trials < 1 {
        return Err(Error::InvalidConfig("random selection needs at least one trial".into()));
    }
    // clusters whose vertices share a penalty edge
    let nbr_clusters: Vec<Vec<usize>> = clusters
        .iter()
        .map(|c| {
            let mut l: Vec<usize> = c
                .iter()
                .flat_map(|&v| g.neighbors(v).iter().map(|&u| g.cluster_of(u).expect("clustered")))
                .collect();
            l.sort_unstable();
            l.dedup();
            l
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pick = vec![usize::MAX; clusters.len()];
    let mut best: Option<(f64, Vec<usize>)> = None;
    for _ in 0..trials {
        for (c, members) in clusters.iter().enumerate() {
            if !members.is_empty() {
                pick[c] = members[rng.gen_range(0..members.len())];
            }
        }
        let mut value = 0.0;
        for (c, &v) in pick.iter().enumerate() {
            if v == usize::MAX {
                continue;
            }
            let pen: f64 = nbr_clusters[c]
                .iter()
                .map(|&d| pick[d])
                .filter(|&u| u != usize::MAX)
                .map(|u| g.penalty(v, u))
                .sum();
            value += g.vertex(v).reward - lambda * pen;
        }
        if best.as_ref().map_or(true, |(b, _)| value > *b) {
            best = Some((value, pick.iter().copied().filter(|&v| v != usize::MAX).collect()));
        }
    }
    let (_, set) = best.expect("at least one trial");
    let value = utility(&set, g, lambda);
    let mut sol = Solution::from_vertices(g, set, value, "random");
    sol.meta.iterations = trials as u64;
    Ok(sol)
}
