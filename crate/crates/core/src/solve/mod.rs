//! Solvers over conflict graphs.
//!
//! Every solver returns a [`Solution`]; [`verify`] re-checks its constraint
//! from scratch.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::channel::ChannelBlock;
use crate::graph::ConflictGraph;

mod baseline;
mod exact;
mod gmwis;
mod local;

pub use baseline::{mra, npsmc, npsmc_jobs, random_select, DEFAULT_TRIALS};
pub use exact::{brute_force_mwis, brute_force_opt, brute_force_range, MAX_ENUMERATION};
pub use gmwis::{gmwis, gmwis_lower_bound};
pub use local::{ls, um, LsOutcome, PartitionMatroid, Utility};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveMeta {
    pub solver: String,
    /// Candidate scans performed.
    pub iterations: u64,
    /// Accepted improving moves (local search only).
    pub moves: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub runtime_ms: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    /// Selected vertex ids, ascending.
    pub selected: Vec<usize>,
    pub objective: f64,
    /// Block served to each node. Members of a selected super pair all map
    /// to its block.
    pub per_node: BTreeMap<usize, ChannelBlock>,
    pub meta: SolveMeta,
}

impl Solution {
    /// Solution for the vertex set `selected`, with per-node blocks read off the graph.
    pub fn from_vertices(g: &ConflictGraph, mut selected: Vec<usize>, objective: f64, solver: &str) -> Self {
        selected.sort_unstable();
        let mut per_node = BTreeMap::new();
        for &v in &selected {
            let vx = g.vertex(v);
            for &m in &vx.members {
                per_node.insert(m, vx.block);
            }
        }
        Solution {
            selected,
            objective,
            per_node,
            meta: SolveMeta {
                solver: solver.to_owned(),
                ..Default::default()
            },
        }
    }

    pub fn empty(solver: &str) -> Self {
        Solution {
            selected: Vec::new(),
            objective: 0.0,
            per_node: BTreeMap::new(),
            meta: SolveMeta {
                solver: solver.to_owned(),
                ..Default::default()
            },
        }
    }
}

/// Constraint a solution must satisfy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// No two selected vertices adjacent.
    Independent,
    /// At most one selected vertex per cluster.
    ClusterFeasible,
}

/// Checks `selected` against `mode` on `g`.
///
/// Ids must be in range and distinct. In either mode, no node may be served
/// by two selected vertices.
pub fn verify(g: &ConflictGraph, selected: &[usize], mode: Mode) -> bool {
    let mut seen = vec![false; g.len()];
    for &v in selected {
        if v >= g.len() || seen[v] {
            return false;
        }
        seen[v] = true;
    }
    let mut served = std::collections::HashSet::new();
    for &v in selected {
        if !g.vertex(v).members.iter().all(|&m| served.insert(m)) {
            return false;
        }
    }
    match mode {
        Mode::Independent => selected
            .iter()
            .all(|&v| g.neighbors(v).iter().all(|&u| !seen[u])),
        Mode::ClusterFeasible => {
            if !g.is_clustered() {
                return false;
            }
            let mut used = std::collections::HashSet::new();
            selected
                .iter()
                .all(|&v| used.insert(g.cluster_of(v).expect("clustered graph")))
        }
    }
}
