//! Vertex rewards, directed edge penalties, and the utility function.
//!
//! Capacity figures come from a deterministic polar quadrature over the
//! node's service disk: equal-area annuli sampled at their area centroids,
//! crossed with evenly spaced angles.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::graph::{ConflictGraph, Vertex};
use crate::radio::{dbm_to_watts, Point, MIN_DISTANCE_KM};
use crate::scenario::{GaaNode, GaaScenario};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum RewardKind {
    #[default]
    Linear,
    Log,
    Capacity,
    Unit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PenaltyKind {
    /// Received interference power times channel overlap, normalised by the scenario maximum.
    #[default]
    #[serde(rename = "interference", alias = "normalized_interference")]
    NormalizedInterference,
    /// Capacity lost by the victim in Mbit/s.
    #[serde(rename = "capacity", alias = "capacity_loss")]
    CapacityLoss,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Weights {
    pub lambda: f64,
    pub reward_kind: RewardKind,
    pub penalty_kind: PenaltyKind,
}

impl Default for Weights {
    fn default() -> Self {
        Weights {
            lambda: 0.0,
            reward_kind: RewardKind::Linear,
            penalty_kind: PenaltyKind::NormalizedInterference,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapacityParams {
    /// Noise power spectral density (W/Hz).
    pub noise_density: f64,
    /// Channel bandwidth (Hz).
    pub w0: f64,
    pub quad_angles: usize,
    pub quad_radii: usize,
}

impl Default for CapacityParams {
    fn default() -> Self {
        CapacityParams {
            noise_density: dbm_to_watts(-174.0),
            w0: 1e7,
            quad_angles: 24,
            quad_radii: 12,
        }
    }
}

pub fn reward_linear(v: &Vertex) -> f64 {
    v.members.len() as f64 * v.block.len as f64
}

pub fn reward_log(v: &Vertex) -> f64 {
    v.members.len() as f64 * (1.0 + (v.block.len as f64).ln())
}

/// Max-reward vertex weight: reward plus `lambda` per served node.
pub fn weight_max_reward(v: &Vertex, lambda: f64) -> f64 {
    v.reward + lambda * v.members.len() as f64
}

/// Sample points and their area weights over a disk of radius `r` about `c`.
///
/// Annuli of equal width, each sampled at its area centroid radius and
/// weighted by its share of the disk area.
fn quadrature(c: Point, r: f64, p: &CapacityParams) -> Vec<(Point, f64)> {
    let (na, nr) = (p.quad_angles.max(1), p.quad_radii.max(1));
    let mut pts = Vec::with_capacity(na * nr);
    for k in 0..nr {
        let r0 = r * k as f64 / nr as f64;
        let r1 = r * (k + 1) as f64 / nr as f64;
        let rho = 2.0 / 3.0 * (r1.powi(3) - r0.powi(3)) / (r1 * r1 - r0 * r0);
        let w = (r1 * r1 - r0 * r0) / (r * r) / na as f64;
        for a in 0..na {
            let theta = (a as f64 + 0.5) * std::f64::consts::TAU / na as f64;
            pts.push((Point::new(c.x_km + rho * theta.cos(), c.y_km + rho * theta.sin()), w));
        }
    }
    pts
}

/// Area-averaged single-channel capacity (Mbit/s) of `node`'s service disk
/// with the given co-channel interferers.
pub fn channel_capacity(node: &GaaNode, interferers: &[&GaaNode], p: &CapacityParams) -> f64 {
    let noise = p.noise_density * p.w0;
    let r = node.params.service_radius_km();
    let mut bits = 0.0;
    for (x, w) in quadrature(node.pos, r, p) {
        let signal = node.params.received_watts(node.pos.distance(&x));
        let interference: f64 = interferers
            .iter()
            .map(|j| j.params.received_watts(j.pos.distance(&x)))
            .sum();
        bits += w * (1.0 + signal / (noise + interference)).log2();
    }
    p.w0 * bits / 1e6
}

/// Interference-free capacity of a singleton vertex, summed over its channels.
pub fn capacity_reward(v: &Vertex, s: &GaaScenario, p: &CapacityParams) -> f64 {
    let node = &s.nodes[v.owner()];
    v.block.len as f64 * channel_capacity(node, &[], p)
}

/// Capacity lost at `v`'s node when `u`'s node transmits on the shared channels.
pub fn capacity_penalty(u: &Vertex, v: &Vertex, s: &GaaScenario, p: &CapacityParams) -> f64 {
    let overlap = u.block.overlap(&v.block);
    if overlap == 0 {
        return 0.0;
    }
    let victim = &s.nodes[v.owner()];
    let interferer = &s.nodes[u.owner()];
    overlap as f64 * capacity_loss_per_channel(victim, interferer, p)
}

fn capacity_loss_per_channel(victim: &GaaNode, interferer: &GaaNode, p: &CapacityParams) -> f64 {
    let clean = channel_capacity(victim, &[], p);
    let dirty = channel_capacity(victim, &[interferer], p);
    (clean - dirty).max(0.0)
}

/// Interference power (W) received from `interferer` at the victim's position,
/// or at the point of its service contour nearest the interferer.
pub fn received_interference(victim: &GaaNode, interferer: &GaaNode, at_contour: bool) -> f64 {
    let d = victim.pos.distance(&interferer.pos);
    let d = if at_contour {
        (d - victim.params.service_radius_km()).max(MIN_DISTANCE_KM)
    } else {
        d
    };
    interferer.params.received_watts(d)
}

/// Un-normalised interference penalty of `u` on `v`.
pub fn raw_interference(u: &Vertex, v: &Vertex, s: &GaaScenario) -> f64 {
    let overlap = u.block.overlap(&v.block) as f64;
    overlap * received_interference(&s.nodes[v.owner()], &s.nodes[u.owner()], false)
}

/// Interference penalty of `u` on `v` normalised by the largest penalty edge of the scenario.
pub fn penalty_interference(u: &Vertex, v: &Vertex, s: &GaaScenario) -> f64 {
    if u.owner() == v.owner() || !u.block.intersects(&v.block) {
        return 0.0;
    }
    let g = crate::graph::build_nonbinary_graph(s, &RawInterference).expect("valid scenario");
    let max = g.penalties().iter().map(|e| e.2).fold(0.0, f64::max);
    let raw = raw_interference(u, v, s);
    if max > 0.0 {
        raw / max
    } else {
        0.0
    }
}

/// Computes directed penalties for a batch of vertex pairs `(u, v)`.
pub trait PenaltyModel {
    fn penalties(&self, s: &GaaScenario, vertices: &[Vertex], pairs: &[(usize, usize)]) -> Vec<f64>;
}

struct RawInterference;

impl PenaltyModel for RawInterference {
    fn penalties(&self, s: &GaaScenario, vertices: &[Vertex], pairs: &[(usize, usize)]) -> Vec<f64> {
        pairs
            .iter()
            .map(|&(u, v)| raw_interference(&vertices[u], &vertices[v], s))
            .collect()
    }
}

/// Penalty model with its tunables.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct PenaltySpec {
    pub kind: PenaltyKind,
    #[serde(default)]
    pub capacity: CapacityParams,
    /// Evaluate interference at the victim's nearest service-contour point.
    #[serde(default)]
    pub at_contour: bool,
}

impl PenaltyModel for PenaltySpec {
    fn penalties(&self, s: &GaaScenario, vertices: &[Vertex], pairs: &[(usize, usize)]) -> Vec<f64> {
        // per (victim node, interferer node) single-channel value
        let mut cache: HashMap<(usize, usize), f64> = HashMap::new();
        let mut per_channel = |victim: usize, interferer: usize| -> f64 {
            *cache.entry((victim, interferer)).or_insert_with(|| {
                let (vn, un) = (&s.nodes[victim], &s.nodes[interferer]);
                match self.kind {
                    PenaltyKind::NormalizedInterference => received_interference(vn, un, self.at_contour),
                    PenaltyKind::CapacityLoss => capacity_loss_per_channel(vn, un, &self.capacity),
                }
            })
        };
        let raw: Vec<f64> = pairs
            .iter()
            .map(|&(u, v)| {
                let (a, b) = (&vertices[u], &vertices[v]);
                a.block.overlap(&b.block) as f64 * per_channel(b.owner(), a.owner())
            })
            .collect();
        match self.kind {
            PenaltyKind::NormalizedInterference => {
                let max = raw.iter().copied().fold(0.0, f64::max);
                if max > 0.0 {
                    raw.into_iter().map(|p| p / max).collect()
                } else {
                    raw
                }
            }
            PenaltyKind::CapacityLoss => raw,
        }
    }
}

impl PenaltyModel for PenaltyKind {
    fn penalties(&self, s: &GaaScenario, vertices: &[Vertex], pairs: &[(usize, usize)]) -> Vec<f64> {
        PenaltySpec {
            kind: *self,
            ..Default::default()
        }
        .penalties(s, vertices, pairs)
    }
}

/// Fills every vertex's reward. Capacity rewards need the scenario.
pub fn assign_rewards(
    g: &mut ConflictGraph,
    kind: RewardKind,
    s: Option<&GaaScenario>,
    cap: &CapacityParams,
) {
    let mut per_node: HashMap<usize, f64> = HashMap::new();
    let rewards: Vec<f64> = g
        .vertices()
        .iter()
        .map(|v| match kind {
            RewardKind::Linear => reward_linear(v),
            RewardKind::Log => reward_log(v),
            RewardKind::Unit => 1.0,
            RewardKind::Capacity => {
                let s = s.expect("capacity rewards need a GAA scenario");
                let per: f64 = v
                    .members
                    .iter()
                    .map(|&m| {
                        *per_node
                            .entry(m)
                            .or_insert_with(|| channel_capacity(&s.nodes[m], &[], cap))
                    })
                    .sum();
                per * v.block.len as f64
            }
        })
        .collect();
    g.set_rewards(rewards);
}

/// Total reward of `set` minus `lambda` times the directed penalties among its members.
pub fn utility(set: &[usize], g: &ConflictGraph, lambda: f64) -> f64 {
    let mut members = set.to_vec();
    members.sort_unstable();
    members.dedup();
    let reward: f64 = members.iter().map(|&v| g.vertex(v).reward).sum();
    let mut penalty = 0.0;
    for &v in &members {
        for (u, out, _) in g.penalty_neighbors(v) {
            if u != v && members.binary_search(&u).is_ok() {
                penalty += out;
            }
        }
    }
    reward - lambda * penalty
}
