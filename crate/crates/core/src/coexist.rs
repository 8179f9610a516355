//! Super-node formation.
//!
//! On each channel block, GAA nodes that have the block available and sit in
//! each other's carrier-sense range form a CS graph. Its maximal cliques are
//! enumerated, every node joins one of its cliques at random, and each clique
//! is split into bins of bounded total activity by first-fit decreasing.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::channel::ChannelBlock;
use crate::error::{Error, Result};
use crate::graph::Vertex;
use crate::scenario::{classify_conflict, gaa_blocks_in_use, ConflictClass, GaaScenario};

/// Floor applied to zero activities so every node stays packable.
pub const MIN_ACTIVITY: f64 = 1e-9;

/// Slack on bin capacity comparisons.
const CAPACITY_EPS: f64 = 1e-9;

/// Undirected graph over the nodes that can use one channel block.
#[derive(Debug, Clone, PartialEq)]
pub struct CsGraph {
    pub block: ChannelBlock,
    /// Scenario node indices, ascending.
    pub nodes: Vec<usize>,
    /// Adjacency in local indices (positions in `nodes`), each list ascending.
    pub adj: Vec<Vec<usize>>,
}

impl CsGraph {
    /// Nodes with `block` usable, linked when each is in the other's CS range.
    pub fn build(s: &GaaScenario, block: ChannelBlock) -> Self {
        let mutual = mutual_cs(s);
        Self::from_mutual(s, block, &mutual)
    }

    fn from_mutual(s: &GaaScenario, block: ChannelBlock, mutual: &[Vec<usize>]) -> Self {
        let nodes: Vec<usize> = s
            .nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| n.availability.contains_block(&block) && n.demand_set.contains(&block.len))
            .map(|(i, _)| i)
            .collect();
        let adj = nodes
            .iter()
            .map(|&i| {
                mutual[i]
                    .iter()
                    .filter_map(|j| nodes.binary_search(j).ok())
                    .collect()
            })
            .collect();
        CsGraph { block, nodes, adj }
    }
}

/// For each node, the nodes with a type-II conflict in both directions.
fn mutual_cs(s: &GaaScenario) -> Vec<Vec<usize>> {
    let n = s.nodes.len();
    let mut out = vec![Vec::new(); n];
    for i in 0..n {
        for j in i + 1..n {
            let (a, b) = (&s.nodes[i], &s.nodes[j]);
            if classify_conflict(a, b) == ConflictClass::TypeII
                && classify_conflict(b, a) == ConflictClass::TypeII
            {
                out[i].push(j);
                out[j].push(i);
            }
        }
    }
    out
}

fn intersect(a: &[usize], b: &[usize]) -> Vec<usize> {
    let (mut i, mut j, mut out) = (0, 0, Vec::new());
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

/// All maximal cliques of the graph given by sorted adjacency lists.
///
/// Bron-Kerbosch with Tomita pivoting. Each clique is sorted and the list is
/// in lexicographic order.
pub fn bron_kerbosch(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    fn expand(adj: &[Vec<usize>], r: &mut Vec<usize>, p: Vec<usize>, mut x: Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if p.is_empty() {
            if x.is_empty() {
                let mut c = r.clone();
                c.sort_unstable();
                out.push(c);
            }
            return;
        }
        let pivot = p
            .iter()
            .chain(x.iter())
            .copied()
            .max_by_key(|&u| (intersect(&p, &adj[u]).len(), std::cmp::Reverse(u)))
            .expect("p is nonempty");
        let candidates: Vec<usize> = p
            .iter()
            .copied()
            .filter(|v| adj[pivot].binary_search(v).is_err())
            .collect();
        let mut p = p;
        for v in candidates {
            r.push(v);
            expand(adj, r, intersect(&p, &adj[v]), intersect(&x, &adj[v]), out);
            r.pop();
            p.retain(|&w| w != v);
            let pos = x.binary_search(&v).unwrap_or_else(|e| e);
            x.insert(pos, v);
        }
    }
    let mut out = Vec::new();
    expand(adj, &mut Vec::new(), (0..adj.len()).collect(), Vec::new(), &mut out);
    out.sort();
    out
}

/// Picks, for every vertex `0..n`, one clique containing it uniformly at random.
pub fn assign_cliques<R: Rng>(cliques: &[Vec<usize>], n: usize, rng: &mut R) -> Result<Vec<usize>> {
    let mut containing: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (q, clique) in cliques.iter().enumerate() {
        for &v in clique {
            containing[v].push(q);
        }
    }
    containing
        .iter()
        .enumerate()
        .map(|(v, qs)| match qs.len() {
            0 => Err(Error::Unassigned(v)),
            1 => Ok(qs[0]),
            k => Ok(qs[rng.gen_range(0..k)]),
        })
        .collect()
}

/// Activity of a node spread over a block of `block_len` channels, capped at one.
pub fn mapped_activity(alpha: f64, block_len: u8) -> f64 {
    (alpha / block_len.max(1) as f64).min(1.0).max(MIN_ACTIVITY)
}

/// A bin produced by [`ffd_pack`]: `(item id, size)` pairs and their total.
#[derive(Debug, Clone, PartialEq)]
pub struct Bin {
    pub items: Vec<(usize, f64)>,
    pub load: f64,
}

/// First-fit decreasing: items sorted by size (ties by id), each placed in
/// the lowest-indexed bin with room.
pub fn ffd_pack(items: &[(usize, f64)], capacity: f64) -> Result<Vec<Bin>> {
    if let Some(&(_, size)) = items.iter().find(|(_, s)| *s > capacity + CAPACITY_EPS) {
        return Err(Error::ItemTooLarge { size, capacity });
    }
    let mut order = items.to_vec();
    order.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    let mut bins: Vec<Bin> = Vec::new();
    for (id, size) in order {
        match bins.iter_mut().find(|b| fits(b.load, size, capacity)) {
            Some(bin) => {
                bin.items.push((id, size));
                bin.load += size;
            }
            None => bins.push(Bin {
                items: vec![(id, size)],
                load: size,
            }),
        }
    }
    Ok(bins)
}

pub(crate) fn fits(load: f64, size: f64, capacity: f64) -> bool {
    load + size <= capacity + CAPACITY_EPS
}

/// Super-NC pairs on one channel block.
pub fn form_super_nodes(s: &GaaScenario, block: ChannelBlock, alpha_bar: f64, seed: u64) -> Result<Vec<Vertex>> {
    let mutual = mutual_cs(s);
    form_on_block(s, block, alpha_bar, seed, &mutual)
}

fn block_stream(block: ChannelBlock) -> u64 {
    ((block.len as u64) << 8) | block.lo as u64
}

fn form_on_block(
    s: &GaaScenario,
    block: ChannelBlock,
    alpha_bar: f64,
    seed: u64,
    mutual: &[Vec<usize>],
) -> Result<Vec<Vertex>> {
    if !(alpha_bar > 0.0) {
        return Err(Error::InvalidConfig(format!("activity limit must be positive, got {alpha_bar}")));
    }
    let cs = CsGraph::from_mutual(s, block, mutual);
    if cs.adj.iter().all(Vec::is_empty) {
        return Ok(Vec::new());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block_stream(block));
    let cliques = bron_kerbosch(&cs.adj);
    let joined = assign_cliques(&cliques, cs.nodes.len(), &mut rng)?;
    let mut supers = Vec::new();
    for q in 0..cliques.len() {
        // a node too active for any shared bin can only ever sit alone
        let items: Vec<(usize, f64)> = (0..cs.nodes.len())
            .filter(|&v| joined[v] == q)
            .map(|v| {
                let node = cs.nodes[v];
                (node, mapped_activity(s.nodes[node].activity, block.len))
            })
            .filter(|&(_, size)| size <= alpha_bar + CAPACITY_EPS)
            .collect();
        if items.len() < 2 {
            continue;
        }
        for bin in ffd_pack(&items, alpha_bar)? {
            if bin.items.len() > 1 {
                let mut members: Vec<usize> = bin.items.iter().map(|&(id, _)| id).collect();
                members.sort_unstable();
                supers.push(Vertex {
                    id: 0,
                    reward: (members.len() * block.len as usize) as f64,
                    members,
                    block,
                });
            }
        }
    }
    supers.sort_by(|a, b| a.members.cmp(&b.members));
    Ok(supers)
}

/// Super-NC pairs over every block some node can use, in canonical block order.
pub fn form_all_super_nodes(s: &GaaScenario, alpha_bar: f64, seed: u64) -> Result<Vec<Vertex>> {
    let mutual = mutual_cs(s);
    let blocks = gaa_blocks_in_use(s);
    let per_block: Vec<Result<Vec<Vertex>>> = blocks
        .par_iter()
        .map(|&b| form_on_block(s, b, alpha_bar, seed, &mutual))
        .collect();
    let mut out = Vec::new();
    for r in per_block {
        out.extend(r?);
    }
    Ok(out)
}
