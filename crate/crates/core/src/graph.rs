//! Node-channel pair conflict graphs.
//!
//! A vertex assigns one contiguous channel block to a node (a PA service
//! area, a GAA node, or a super-node of mutually carrier-sensing GAA nodes).
//! Edges forbid selecting both endpoints. The clustered variant has no edges
//! inside a node's cluster and carries directed penalties instead.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::channel::{ChannelBlock, ChannelSet};
use crate::error::{Error, Result};
use crate::objective::PenaltyModel;
use crate::scenario::{classify_conflict, GaaScenario, PaScenario};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vertex {
    pub id: usize,
    /// Owning node indices, ascending. One entry except for super-NC pairs.
    pub members: Vec<usize>,
    pub block: ChannelBlock,
    pub reward: f64,
}

impl Vertex {
    pub fn owner(&self) -> usize {
        self.members[0]
    }

    pub fn is_super(&self) -> bool {
        self.members.len() > 1
    }

    pub fn shares_member(&self, other: &Vertex) -> bool {
        self.members.iter().any(|m| other.members.binary_search(m).is_ok())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConflictGraph {
    vertices: Vec<Vertex>,
    adj: Vec<Vec<usize>>,
    clusters: Option<Vec<Vec<usize>>>,
    cluster_of: Option<Vec<usize>>,
    /// `out_penalty[u][k]` is P(u, adj[u][k]).
    out_penalty: Option<Vec<Vec<f64>>>,
}

impl ConflictGraph {
    /// Builds a graph from an edge list; duplicate and reversed edges are merged.
    pub fn from_edges(vertices: Vec<Vertex>, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut adj = vec![Vec::new(); vertices.len()];
        for (u, v) in edges {
            assert!(u != v, "self-loop on vertex {u}");
            adj[u].push(v);
            adj[v].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        ConflictGraph {
            vertices,
            adj,
            ..Default::default()
        }
    }

    /// Clustered graph with directed penalties `(u, v, P_uv)`, all positive.
    pub fn clustered(
        vertices: Vec<Vertex>,
        clusters: Vec<Vec<usize>>,
        penalties: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self> {
        let n = vertices.len();
        let mut cluster_of = vec![usize::MAX; n];
        for (c, members) in clusters.iter().enumerate() {
            for &v in members {
                if v >= n || cluster_of[v] != usize::MAX {
                    return Err(Error::InvalidScenario(format!(
                        "clusters do not partition the vertices (vertex {v})"
                    )));
                }
                cluster_of[v] = c;
            }
        }
        if cluster_of.contains(&usize::MAX) {
            return Err(Error::InvalidScenario("vertex outside every cluster".into()));
        }
        let mut directed: HashMap<(usize, usize), f64> = HashMap::new();
        for (u, v, p) in penalties {
            if u == v || cluster_of[u] == cluster_of[v] {
                return Err(Error::InvalidScenario(format!("intra-cluster penalty {u} -> {v}")));
            }
            if !(p >= 0.0) {
                return Err(Error::InvalidScenario(format!("negative penalty {u} -> {v}")));
            }
            *directed.entry((u, v)).or_insert(0.0) += p;
        }
        let mut g = Self::from_edges(vertices, directed.keys().copied());
        let out = g
            .adj
            .iter()
            .enumerate()
            .map(|(u, list)| {
                list.iter()
                    .map(|&v| directed.get(&(u, v)).copied().unwrap_or(0.0))
                    .collect()
            })
            .collect();
        g.clusters = Some(clusters);
        g.cluster_of = Some(cluster_of);
        g.out_penalty = Some(out);
        Ok(g)
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn vertex(&self, v: usize) -> &Vertex {
        &self.vertices[v]
    }

    pub fn set_rewards(&mut self, rewards: impl IntoIterator<Item = f64>) {
        for (v, r) in self.vertices.iter_mut().zip(rewards) {
            v.reward = r;
        }
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn n_edges(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].binary_search(&v).is_ok()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, list)| list.iter().filter(move |&&v| u < v).map(move |&v| (u, v)))
    }

    pub fn clusters(&self) -> Option<&[Vec<usize>]> {
        self.clusters.as_deref()
    }

    pub fn cluster_of(&self, v: usize) -> Option<usize> {
        self.cluster_of.as_ref().map(|c| c[v])
    }

    pub fn is_clustered(&self) -> bool {
        self.clusters.is_some()
    }

    /// Directed penalty P(u, v); zero when the edge is absent or the graph carries no penalties.
    pub fn penalty(&self, u: usize, v: usize) -> f64 {
        match &self.out_penalty {
            Some(out) => match self.adj[u].binary_search(&v) {
                Ok(k) => out[u][k],
                Err(_) => 0.0,
            },
            None => 0.0,
        }
    }

    /// Neighbours of `v` with `(P(v, u), P(u, v))` for each neighbour `u`.
    pub fn penalty_neighbors(&self, v: usize) -> impl Iterator<Item = (usize, f64, f64)> + '_ {
        self.adj[v].iter().enumerate().map(move |(k, &u)| {
            let out = self.out_penalty.as_ref().map(|o| o[v][k]).unwrap_or(0.0);
            (u, out, self.penalty(u, v))
        })
    }

    /// All directed penalties `(u, v, P_uv)` with `P_uv > 0`.
    pub fn penalties(&self) -> Vec<(usize, usize, f64)> {
        let Some(out) = &self.out_penalty else {
            return Vec::new();
        };
        let mut list = Vec::new();
        for (u, nbrs) in self.adj.iter().enumerate() {
            for (k, &v) in nbrs.iter().enumerate() {
                if out[u][k] > 0.0 {
                    list.push((u, v, out[u][k]));
                }
            }
        }
        list
    }

    /// Vertex ids owned by each node, indexed by node.
    pub fn vertices_by_node(&self) -> HashMap<usize, Vec<usize>> {
        let mut map: HashMap<usize, Vec<usize>> = HashMap::new();
        for v in &self.vertices {
            for &m in &v.members {
                map.entry(m).or_default().push(v.id);
            }
        }
        map
    }
}

/// Serialized graph layout used for debugging dumps and as solver input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphDump {
    pub vertices: Vec<Vertex>,
    pub edges: Vec<(usize, usize)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clusters: Option<Vec<Vec<usize>>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub penalties: Vec<(usize, usize, f64)>,
}

impl From<&ConflictGraph> for GraphDump {
    fn from(g: &ConflictGraph) -> Self {
        GraphDump {
            vertices: g.vertices.clone(),
            edges: g.edges().collect(),
            clusters: g.clusters.clone(),
            penalties: g.penalties(),
        }
    }
}

impl TryFrom<GraphDump> for ConflictGraph {
    type Error = Error;

    fn try_from(d: GraphDump) -> Result<Self> {
        if d.vertices.iter().enumerate().any(|(i, v)| v.id != i) {
            return Err(Error::InvalidScenario("vertex ids must be 0..n in order".into()));
        }
        let n = d.vertices.len();
        if d.edges.iter().any(|&(u, v)| u >= n || v >= n || u == v) {
            return Err(Error::InvalidScenario("edge endpoint out of range".into()));
        }
        match d.clusters {
            Some(clusters) => {
                let g = ConflictGraph::clustered(d.vertices, clusters, d.penalties)?;
                Ok(g)
            }
            None => Ok(ConflictGraph::from_edges(d.vertices, d.edges)),
        }
    }
}

impl Serialize for ConflictGraph {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        GraphDump::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for ConflictGraph {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let dump = GraphDump::deserialize(d)?;
        ConflictGraph::try_from(dump).map_err(serde::de::Error::custom)
    }
}

/// All blocks of exactly `n` channels inside `avail`, ascending by first channel.
pub fn enumerate_pa_assignments(avail: ChannelSet, n: u8) -> Vec<ChannelBlock> {
    let Some(max) = avail.max_channel() else {
        return Vec::new();
    };
    if n == 0 || n > max {
        return Vec::new();
    }
    (1..=max + 1 - n)
        .map(|lo| ChannelBlock { lo, len: n })
        .filter(|b| avail.contains_block(b))
        .collect()
}

/// Valid GAA blocks for every requested length, ordered by (length, first channel).
pub fn enumerate_gaa_assignments(avail: ChannelSet, demand: &[u8]) -> Vec<ChannelBlock> {
    let lengths: BTreeSet<u8> = demand.iter().copied().collect();
    lengths
        .into_iter()
        .flat_map(|len| enumerate_pa_assignments(avail, len))
        .collect()
}

/// PA conflict graph: one vertex per (service area, valid block), unit rewards.
pub fn build_pa_graph(s: &PaScenario) -> ConflictGraph {
    let mut vertices = Vec::new();
    for area in &s.service_areas {
        for block in enumerate_pa_assignments(area.availability, area.n_pals) {
            vertices.push(Vertex {
                id: vertices.len(),
                members: vec![area.id],
                block,
                reward: 1.0,
            });
        }
    }
    let area_of = |v: &Vertex| &s.service_areas[v.owner()];
    let mut edges = Vec::new();
    for u in 0..vertices.len() {
        for v in u + 1..vertices.len() {
            let (a, b) = (&vertices[u], &vertices[v]);
            let conflict = if a.owner() == b.owner() {
                a.block != b.block
            } else {
                a.block.intersects(&b.block) && area_of(a).overlaps(area_of(b))
            };
            if conflict {
                edges.push((u, v));
            }
        }
    }
    ConflictGraph::from_edges(vertices, edges)
}

/// Singleton vertices for every GAA node in canonical order, linear rewards.
fn gaa_vertices(s: &GaaScenario) -> Vec<Vertex> {
    let mut vertices = Vec::new();
    for (i, node) in s.nodes.iter().enumerate() {
        for block in enumerate_gaa_assignments(node.availability, &node.demand_set) {
            vertices.push(Vertex {
                id: vertices.len(),
                members: vec![i],
                block,
                reward: block.len as f64,
            });
        }
    }
    vertices
}

/// Index ranges of each node's vertices in a canonical singleton vertex list.
fn node_ranges(vertices: &[Vertex], n_nodes: usize) -> Vec<std::ops::Range<usize>> {
    let mut ranges = vec![0..0; n_nodes];
    let mut start = 0;
    while start < vertices.len() {
        let owner = vertices[start].owner();
        let mut end = start;
        while end < vertices.len() && vertices[end].owner() == owner {
            end += 1;
        }
        ranges[owner] = start..end;
        start = end;
    }
    ranges
}

/// Binary GAA conflict graph without super-NC pairs.
pub fn build_gaa_binary_graph(s: &GaaScenario) -> ConflictGraph {
    let vertices = gaa_vertices(s);
    let ranges = node_ranges(&vertices, s.nodes.len());
    let mut edges = Vec::new();
    for r in &ranges {
        for u in r.clone() {
            for v in u + 1..r.end {
                edges.push((u, v));
            }
        }
    }
    let n = s.nodes.len();
    for i in 0..n {
        for j in i + 1..n {
            let conflict = classify_conflict(&s.nodes[i], &s.nodes[j]).is_conflict()
                || classify_conflict(&s.nodes[j], &s.nodes[i]).is_conflict();
            if !conflict {
                continue;
            }
            for u in ranges[i].clone() {
                for v in ranges[j].clone() {
                    if vertices[u].block.intersects(&vertices[v].block) {
                        edges.push((u, v));
                    }
                }
            }
        }
    }
    ConflictGraph::from_edges(vertices, edges)
}

/// Adds super-NC pairs to a binary graph.
///
/// Each super vertex inherits every edge of its children, conflicts with every
/// vertex sharing a member, and the edges among its own children are removed.
pub fn augment_coexistence(g: &ConflictGraph, supers: &[Vertex]) -> Result<ConflictGraph> {
    if supers.is_empty() {
        return Ok(g.clone());
    }
    let mut child_index: HashMap<(usize, ChannelBlock), usize> = HashMap::new();
    for v in g.vertices() {
        if !v.is_super() {
            child_index.insert((v.owner(), v.block), v.id);
        }
    }
    let by_node = g.vertices_by_node();
    let base = g.len();

    let mut children: Vec<Vec<usize>> = Vec::with_capacity(supers.len());
    for sup in supers {
        let mut kids = Vec::with_capacity(sup.members.len());
        for &m in &sup.members {
            let id = child_index
                .get(&(m, sup.block))
                .copied()
                .ok_or_else(|| Error::MissingChild {
                    node: m,
                    block: sup.block.to_string(),
                })?;
            kids.push(id);
        }
        children.push(kids);
    }

    let mut vertices = g.vertices.clone();
    for sup in supers {
        let mut members = sup.members.clone();
        members.sort_unstable();
        members.dedup();
        vertices.push(Vertex {
            id: vertices.len(),
            members,
            block: sup.block,
            reward: sup.reward,
        });
    }

    let mut adj: Vec<BTreeSet<usize>> = g.adj.iter().map(|l| l.iter().copied().collect()).collect();
    adj.resize(vertices.len(), BTreeSet::new());
    let link = |adj: &mut Vec<BTreeSet<usize>>, a: usize, b: usize| {
        if a != b {
            adj[a].insert(b);
            adj[b].insert(a);
        }
    };

    for (k, kids) in children.iter().enumerate() {
        let x = base + k;
        for &c in kids {
            for &nb in g.neighbors(c) {
                link(&mut adj, x, nb);
            }
        }
        for m in &vertices[x].members {
            if let Some(list) = by_node.get(m) {
                for &v in list {
                    link(&mut adj, x, v);
                }
            }
        }
    }
    // super to super: shared member, or some pair of children in conflict
    for a in 0..supers.len() {
        for b in a + 1..supers.len() {
            let (xa, xb) = (base + a, base + b);
            let linked = vertices[xa].shares_member(&vertices[xb])
                || children[a]
                    .iter()
                    .any(|&ca| children[b].iter().any(|&cb| g.has_edge(ca, cb)));
            if linked {
                link(&mut adj, xa, xb);
            }
        }
    }
    for kids in &children {
        for (i, &a) in kids.iter().enumerate() {
            for &b in &kids[i + 1..] {
                adj[a].remove(&b);
                adj[b].remove(&a);
            }
        }
    }

    Ok(ConflictGraph {
        vertices,
        adj: adj.into_iter().map(|s| s.into_iter().collect()).collect(),
        ..Default::default()
    })
}

/// Clustered GAA graph with directed penalties and no intra-cluster edges.
///
/// `P(u, v)` is set for every ordered pair of vertices of different nodes with
/// overlapping blocks where `u`'s node conflicts with `v`'s node.
pub fn build_nonbinary_graph<M: PenaltyModel + ?Sized>(s: &GaaScenario, model: &M) -> Result<ConflictGraph> {
    let vertices = gaa_vertices(s);
    let ranges = node_ranges(&vertices, s.nodes.len());
    let clusters: Vec<Vec<usize>> = ranges
        .iter()
        .filter(|r| !r.is_empty())
        .map(|r| r.clone().collect())
        .collect();
    let n = s.nodes.len();
    let mut pairs = Vec::new();
    for victim in 0..n {
        for interferer in 0..n {
            if victim == interferer
                || !classify_conflict(&s.nodes[victim], &s.nodes[interferer]).is_conflict()
            {
                continue;
            }
            for u in ranges[interferer].clone() {
                for v in ranges[victim].clone() {
                    if vertices[u].block.intersects(&vertices[v].block) {
                        pairs.push((u, v));
                    }
                }
            }
        }
    }
    let values = model.penalties(s, &vertices, &pairs);
    ConflictGraph::clustered(
        vertices,
        clusters,
        pairs.into_iter().zip(values).map(|((u, v), p)| (u, v, p)),
    )
}
