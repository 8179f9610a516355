//! Seeded experiments, metrics and result tables.
//!
//! A run is a grid of (seed, axis value) cells. Each cell builds one scenario
//! and feeds it to every configured solver, so all solvers in a row see the
//! same instance. Cells are independent and run in parallel; rows are emitted
//! in (seed, value, solver) order followed by one mean row per (value, solver).

use std::fmt;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::PA_CHANNELS;
use crate::coexist::form_all_super_nodes;
use crate::error::{Error, Result};
use crate::graph::{augment_coexistence, build_gaa_binary_graph, build_nonbinary_graph, build_pa_graph, ConflictGraph};
use crate::objective::{
    assign_rewards, channel_capacity, received_interference, weight_max_reward, CapacityParams, PenaltyKind,
    PenaltySpec, RewardKind,
};
use crate::scenario::{classify_conflict, generate_gaa_scenario, generate_pa_scenario, GaaScenario, GaaScenarioConfig, Scenario};
use crate::solve::{gmwis, mra, npsmc, random_select, um, verify, Mode, PartitionMatroid, Solution, Utility, DEFAULT_TRIALS};

/// CSV header of every results table.
pub const COLUMNS: [&str; 13] = [
    "seed",
    "axis_value",
    "solver",
    "n_nodes",
    "n_vertices",
    "n_edges",
    "p",
    "p1",
    "p2",
    "utility",
    "total_interference_w",
    "capacity_mbps",
    "runtime_ms",
];

const SCENARIO_STREAM: u64 = 0;
const SUPER_NODE_STREAM: u64 = 1;
const SOLVER_STREAM_BASE: u64 = 2;

/// Seed for `stream` of run `seed`, counter-derived from `master`.
///
/// Streams are independent, so adding a solver never changes the scenario
/// drawn for a seed.
pub fn derive_seed(master: u64, seed: u64, stream: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(stream);
    rng.set_word_pos(2 * seed as u128);
    rng.next_u64()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PaSpec {
    /// Grid width in tracts.
    pub m: u32,
    /// Service-area radius in tract widths.
    pub r_s: f64,
}

impl Default for PaSpec {
    fn default() -> Self {
        PaSpec { m: 10, r_s: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "tier", rename_all = "snake_case")]
pub enum ScenarioSpec {
    Pa(PaSpec),
    Gaa(GaaScenarioConfig),
}

impl Default for ScenarioSpec {
    fn default() -> Self {
        ScenarioSpec::Gaa(GaaScenarioConfig::default())
    }
}

impl ScenarioSpec {
    /// The scenario for run `seed` under `master`.
    pub fn build(&self, master: u64, seed: u64) -> Result<Scenario> {
        let s = derive_seed(master, seed, SCENARIO_STREAM);
        Ok(match self {
            ScenarioSpec::Pa(p) => Scenario::Pa(generate_pa_scenario(p.m, p.r_s, s)),
            ScenarioSpec::Gaa(cfg) => Scenario::Gaa(generate_gaa_scenario(cfg, s)?),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    /// Greedy MWIS on `R(v) + λ|S(v)|`; max cardinality on PA graphs.
    Gmwis,
    Um,
    Npsmc,
    Mra,
    Random,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Gmwis => "gmwis",
            Algorithm::Um => "um",
            Algorithm::Npsmc => "npsmc",
            Algorithm::Mra => "mra",
            Algorithm::Random => "random",
        }
    }

    pub fn uses_penalties(self) -> bool {
        matches!(self, Algorithm::Um | Algorithm::Random)
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.to_owned()))
            .map_err(|_| Error::InvalidConfig(format!("unknown solver {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverSpec {
    pub algorithm: Algorithm,
    /// Name in the `solver` column; defaults to the algorithm name.
    pub label: Option<String>,
    pub lambda: f64,
    /// Activity cap per super-NC pair; 0 disables super pairs.
    pub alpha_bar: f64,
    pub epsilon: f64,
    pub reward: RewardKind,
    pub penalty: PenaltyKind,
    pub trials: usize,
}

impl Default for SolverSpec {
    fn default() -> Self {
        SolverSpec {
            algorithm: Algorithm::Gmwis,
            label: None,
            lambda: 0.0,
            alpha_bar: 0.0,
            epsilon: 0.1,
            reward: RewardKind::Linear,
            penalty: PenaltyKind::NormalizedInterference,
            trials: DEFAULT_TRIALS,
        }
    }
}

impl SolverSpec {
    pub fn label(&self) -> &str {
        self.label.as_deref().unwrap_or(self.algorithm.name())
    }

    fn validate(&self, scenario: &ScenarioSpec) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(format!("solver {}: {msg}", self.label())));
        for (name, v) in [("lambda", self.lambda), ("alpha_bar", self.alpha_bar), ("epsilon", self.epsilon)] {
            if !(v >= 0.0) || !v.is_finite() {
                return bad(format!("{name} must be finite and non-negative, got {v}"));
            }
        }
        if self.trials < 1 {
            return bad("trials must be at least 1".into());
        }
        match (scenario, self.algorithm) {
            (ScenarioSpec::Pa(_), Algorithm::Um | Algorithm::Random) => bad("needs a GAA scenario".into()),
            (ScenarioSpec::Gaa(_), Algorithm::Npsmc) => bad("needs a PA scenario".into()),
            (_, Algorithm::Mra) if self.alpha_bar > 0.0 => bad("runs on the coexistence-unaware graph".into()),
            _ => Ok(()),
        }
    }
}

/// Parameter a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    Lambda,
    AlphaBar,
    Epsilon,
    /// GAA region radius in km.
    Radius,
    /// PA grid width.
    M,
    /// PA service-area radius.
    RS,
    /// Synthetic GAA node density per km².
    Density,
}

impl Axis {
    /// Sets this parameter to `value` throughout `cfg`.
    pub fn apply(self, cfg: &mut ExperimentConfig, value: f64) -> Result<()> {
        let mismatch = || Error::InvalidConfig(format!("axis {self} does not apply to this scenario"));
        match self {
            Axis::Lambda => cfg.solvers.iter_mut().for_each(|s| s.lambda = value),
            Axis::AlphaBar => cfg.solvers.iter_mut().for_each(|s| s.alpha_bar = value),
            Axis::Epsilon => cfg.solvers.iter_mut().for_each(|s| s.epsilon = value),
            Axis::Radius => match &mut cfg.scenario {
                ScenarioSpec::Gaa(g) => g.radius_km = value,
                _ => return Err(mismatch()),
            },
            Axis::M => match &mut cfg.scenario {
                ScenarioSpec::Pa(p) if value >= 0.0 && value.fract() == 0.0 => p.m = value as u32,
                _ => return Err(mismatch()),
            },
            Axis::RS => match &mut cfg.scenario {
                ScenarioSpec::Pa(p) => p.r_s = value,
                _ => return Err(mismatch()),
            },
            Axis::Density => match &mut cfg.scenario {
                ScenarioSpec::Gaa(GaaScenarioConfig {
                    source: crate::scenario::NodeSource::Synthetic { density_per_km2 },
                    ..
                }) => *density_per_km2 = value,
                _ => return Err(mismatch()),
            },
        }
        Ok(())
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).map_err(|_| fmt::Error)?;
        write!(f, "{}", s.as_str().unwrap_or_default())
    }
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.replace('-', "_").to_lowercase();
        let norm = if norm == "rs" { "r_s".to_owned() } else { norm };
        serde_json::from_value(serde_json::Value::String(norm))
            .map_err(|_| Error::InvalidConfig(format!("unknown axis {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub axis: Axis,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub scenario: ScenarioSpec,
    #[serde(default = "default_solvers")]
    pub solvers: Vec<SolverSpec>,
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub master_seed: u64,
    /// Record solver wall-clock time in `runtime_ms`. Off keeps tables byte-stable.
    #[serde(default)]
    pub timing: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

fn default_solvers() -> Vec<SolverSpec> {
    vec![SolverSpec::default()]
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            scenario: ScenarioSpec::default(),
            solvers: default_solvers(),
            seeds: vec![0],
            master_seed: 0,
            timing: false,
            sweep: None,
            output: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(Error::InvalidConfig("seed list is empty".into()));
        }
        if self.solvers.is_empty() {
            return Err(Error::InvalidConfig("no solvers configured".into()));
        }
        self.solvers.iter().try_for_each(|s| s.validate(&self.scenario))
    }
}

/// Quality measures of one solution.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Metrics {
    /// Fraction of service areas (PA) or nodes (GAA) served.
    pub p: f64,
    /// Fraction of nodes served.
    pub p1: f64,
    /// Channels assigned over total demand `Σ max D(i)`.
    pub p2: f64,
    /// The solver's own objective value.
    pub utility: f64,
    /// Received power summed over ordered pairs of served, conflicting nodes
    /// on overlapping blocks, times the overlap.
    pub total_interference_w: f64,
    /// Area-averaged capacity summed over served nodes and their channels,
    /// with co-channel conflicting served nodes as interferers.
    pub capacity_mbps: f64,
}

fn ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

/// Metrics of `sol` on `scenario` with default capacity parameters.
pub fn compute_metrics(sol: &Solution, scenario: &Scenario) -> Metrics {
    compute_metrics_with(sol, scenario, &CapacityParams::default())
}

pub fn compute_metrics_with(sol: &Solution, scenario: &Scenario, cap: &CapacityParams) -> Metrics {
    let served_len: f64 = sol.per_node.values().map(|b| b.len as f64).sum();
    match scenario {
        Scenario::Pa(s) => {
            let n = s.service_areas.len() as f64;
            let p = ratio(sol.per_node.len() as f64, n);
            Metrics {
                p,
                p1: p,
                p2: ratio(served_len, s.total_demand() as f64),
                utility: sol.objective,
                ..Default::default()
            }
        }
        Scenario::Gaa(s) => {
            let p1 = ratio(sol.per_node.len() as f64, s.nodes.len() as f64);
            let (interference, capacity) = gaa_link_metrics(sol, s, cap);
            Metrics {
                p: p1,
                p1,
                p2: ratio(served_len, s.total_demand() as f64),
                utility: sol.objective,
                total_interference_w: interference,
                capacity_mbps: capacity,
            }
        }
    }
}

fn gaa_link_metrics(sol: &Solution, s: &GaaScenario, cap: &CapacityParams) -> (f64, f64) {
    let served: Vec<(usize, crate::channel::ChannelBlock)> = sol.per_node.iter().map(|(&n, &b)| (n, b)).collect();
    let mut interference = 0.0;
    let mut capacity = 0.0;
    for &(i, bi) in &served {
        let victim = &s.nodes[i];
        let hitters: Vec<(usize, crate::channel::ChannelBlock)> = served
            .iter()
            .copied()
            .filter(|&(j, bj)| j != i && bi.intersects(&bj) && classify_conflict(victim, &s.nodes[j]).is_conflict())
            .collect();
        for &(j, bj) in &hitters {
            interference += bi.overlap(&bj) as f64 * received_interference(victim, &s.nodes[j], false);
        }
        for ch in bi.channels() {
            let on_channel: Vec<&crate::scenario::GaaNode> = hitters
                .iter()
                .filter(|(_, bj)| bj.mask().contains(ch))
                .map(|&(j, _)| &s.nodes[j])
                .collect();
            capacity += channel_capacity(victim, &on_channel, cap);
        }
    }
    (interference, capacity)
}

/// Graph `spec` solves on `scenario`, rewards filled in.
pub fn build_graph(scenario: &Scenario, spec: &SolverSpec, super_seed: u64) -> Result<ConflictGraph> {
    match scenario {
        Scenario::Pa(s) => Ok(build_pa_graph(s)),
        Scenario::Gaa(s) => {
            let mut g = if spec.algorithm.uses_penalties() {
                build_nonbinary_graph(s, &PenaltySpec { kind: spec.penalty, ..Default::default() })?
            } else {
                let base = build_gaa_binary_graph(s);
                if spec.alpha_bar > 0.0 {
                    augment_coexistence(&base, &form_all_super_nodes(s, spec.alpha_bar, super_seed)?)?
                } else {
                    base
                }
            };
            assign_rewards(&mut g, spec.reward, Some(s), &CapacityParams::default());
            Ok(g)
        }
    }
}

/// Runs one solver on a prepared graph and re-checks its constraint.
pub fn solve_graph(g: &ConflictGraph, spec: &SolverSpec, seed: u64) -> Result<Solution> {
    let sol = match spec.algorithm {
        Algorithm::Gmwis => {
            let w: Vec<f64> = g.vertices().iter().map(|v| weight_max_reward(v, spec.lambda)).collect();
            gmwis(g, &w)
        }
        Algorithm::Mra => mra(g),
        Algorithm::Npsmc => npsmc(g, PA_CHANNELS)?,
        Algorithm::Um => um(&PartitionMatroid::from_graph(g)?, Utility { g, lambda: spec.lambda }, spec.epsilon),
        Algorithm::Random => random_select(g, spec.lambda, spec.trials, seed)?,
    };
    let mode = if g.is_clustered() { Mode::ClusterFeasible } else { Mode::Independent };
    if !verify(g, &sol.selected, mode) {
        return Err(Error::InvalidConfig(format!("{} returned an infeasible solution", spec.label())));
    }
    Ok(sol)
}

/// One line of a results table. Metric fields are empty on skipped rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    /// Run seed, or `mean` on aggregate rows.
    pub seed: String,
    pub axis_value: Option<f64>,
    pub solver: String,
    pub n_nodes: Option<f64>,
    pub n_vertices: Option<f64>,
    pub n_edges: Option<f64>,
    pub metrics: Option<Metrics>,
    pub runtime_ms: Option<f64>,
}

impl Row {
    pub fn is_mean(&self) -> bool {
        self.seed == "mean"
    }

    fn fields(&self) -> Vec<String> {
        let num = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
        let m = self.metrics;
        vec![
            self.seed.clone(),
            num(self.axis_value),
            self.solver.clone(),
            num(self.n_nodes),
            num(self.n_vertices),
            num(self.n_edges),
            num(m.map(|m| m.p)),
            num(m.map(|m| m.p1)),
            num(m.map(|m| m.p2)),
            num(m.map(|m| m.utility)),
            num(m.map(|m| m.total_interference_w)),
            num(m.map(|m| m.capacity_mbps)),
            self.runtime_ms.map(|t| format!("{t:.3}")).unwrap_or_default(),
        ]
    }
}

/// Rows of a run, data rows first and mean rows last.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Table {
    pub rows: Vec<Row>,
}

impl Table {
    pub fn data_rows(&self) -> impl Iterator<Item = &Row> {
        self.rows.iter().filter(|r| !r.is_mean())
    }

    pub fn mean_rows(&self) -> impl Iterator<Item = &Row> {
        self.rows.iter().filter(|r| r.is_mean())
    }

    /// Mean row for `solver` at `axis_value`.
    pub fn mean(&self, solver: &str, axis_value: Option<f64>) -> Option<&Row> {
        self.mean_rows().find(|r| r.solver == solver && r.axis_value == axis_value)
    }

    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(COLUMNS)?;
        for r in &self.rows {
            w.write_record(r.fields())?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }
}

fn mean_of(rows: &[&Row], f: impl Fn(&Row) -> Option<f64>) -> Option<f64> {
    let vals: Vec<f64> = rows.iter().filter_map(|r| f(r)).collect();
    (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
}

fn mean_row(axis_value: Option<f64>, solver: &str, rows: &[&Row]) -> Row {
    let ok: Vec<&Row> = rows.iter().copied().filter(|r| r.metrics.is_some()).collect();
    let metric = |f: fn(&Metrics) -> f64| mean_of(&ok, |r| r.metrics.as_ref().map(f));
    let metrics = (!ok.is_empty()).then(|| Metrics {
        p: metric(|m| m.p).unwrap_or_default(),
        p1: metric(|m| m.p1).unwrap_or_default(),
        p2: metric(|m| m.p2).unwrap_or_default(),
        utility: metric(|m| m.utility).unwrap_or_default(),
        total_interference_w: metric(|m| m.total_interference_w).unwrap_or_default(),
        capacity_mbps: metric(|m| m.capacity_mbps).unwrap_or_default(),
    });
    Row {
        seed: "mean".into(),
        axis_value,
        solver: solver.to_owned(),
        n_nodes: mean_of(&ok, |r| r.n_nodes),
        n_vertices: mean_of(&ok, |r| r.n_vertices),
        n_edges: mean_of(&ok, |r| r.n_edges),
        metrics,
        runtime_ms: mean_of(&ok, |r| r.runtime_ms),
    }
}

fn n_nodes(s: &Scenario) -> usize {
    match s {
        Scenario::Pa(p) => p.service_areas.len(),
        Scenario::Gaa(g) => g.nodes.len(),
    }
}

/// All solvers on the scenario of one (seed, value) cell.
fn run_cell(cfg: &ExperimentConfig, seed: u64, axis_value: Option<f64>) -> Result<Vec<Row>> {
    let skipped = |spec: &SolverSpec| Row {
        seed: seed.to_string(),
        axis_value,
        solver: spec.label().to_owned(),
        n_nodes: None,
        n_vertices: None,
        n_edges: None,
        metrics: None,
        runtime_ms: None,
    };
    let scenario = match cfg.scenario.build(cfg.master_seed, seed) {
        Ok(s) => s,
        Err(_) => return Ok(cfg.solvers.iter().map(skipped).collect()),
    };
    let super_seed = derive_seed(cfg.master_seed, seed, SUPER_NODE_STREAM);
    let mut rows = Vec::with_capacity(cfg.solvers.len());
    for (k, spec) in cfg.solvers.iter().enumerate() {
        let g = build_graph(&scenario, spec, super_seed)?;
        let solver_seed = derive_seed(cfg.master_seed, seed, SOLVER_STREAM_BASE + k as u64);
        let start = Instant::now();
        let mut sol = solve_graph(&g, spec, solver_seed)?;
        let elapsed = start.elapsed().as_secs_f64() * 1e3;
        if cfg.timing {
            sol.meta.runtime_ms = Some(elapsed);
        }
        rows.push(Row {
            seed: seed.to_string(),
            axis_value,
            solver: spec.label().to_owned(),
            n_nodes: Some(n_nodes(&scenario) as f64),
            n_vertices: Some(g.len() as f64),
            n_edges: Some(g.n_edges() as f64),
            metrics: Some(compute_metrics(&sol, &scenario)),
            runtime_ms: sol.meta.runtime_ms,
        });
    }
    Ok(rows)
}

fn run_grid(cfg: &ExperimentConfig, axis: Option<(Axis, &[f64])>) -> Result<Table> {
    cfg.validate()?;
    let values: Vec<Option<f64>> = match axis {
        Some((_, vs)) => vs.iter().map(|&v| Some(v)).collect(),
        None => vec![None],
    };
    if values.is_empty() {
        return Err(Error::InvalidConfig("sweep has no values".into()));
    }
    let mut per_value = Vec::with_capacity(values.len());
    for &v in &values {
        let mut c = cfg.clone();
        if let (Some((ax, _)), Some(v)) = (axis, v) {
            ax.apply(&mut c, v)?;
        }
        c.validate()?;
        per_value.push(c);
    }
    let cells: Vec<(u64, usize)> = cfg
        .seeds
        .iter()
        .flat_map(|&s| (0..values.len()).map(move |k| (s, k)))
        .collect();
    let results: Vec<Result<Vec<Row>>> = cells
        .par_iter()
        .map(|&(seed, k)| run_cell(&per_value[k], seed, values[k]))
        .collect();
    let mut rows = Vec::new();
    for r in results {
        rows.extend(r?);
    }
    let mut means = Vec::new();
    for &v in &values {
        for spec in &cfg.solvers {
            let group: Vec<&Row> = rows
                .iter()
                .filter(|r| r.axis_value == v && r.solver == spec.label())
                .collect();
            means.push(mean_row(v, spec.label(), &group));
        }
    }
    rows.extend(means);
    Ok(Table { rows })
}

/// Every seed through every solver, plus one mean row per solver.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Table> {
    match &cfg.sweep {
        Some(sw) => run_grid(cfg, Some((sw.axis, &sw.values))),
        None => run_grid(cfg, None),
    }
}

/// [`run_experiment`] once per value of `axis`, in long format.
pub fn sweep(cfg: &ExperimentConfig, axis: Axis, values: &[f64]) -> Result<Table> {
    run_grid(cfg, Some((axis, values)))
}

#[derive(Debug, Clone, Serialize)]
struct Manifest<'a> {
    config: &'a ExperimentConfig,
    version: &'static str,
    csv: String,
    rows: usize,
    started_unix_s: u64,
    wall_clock_s: f64,
}

/// Manifest path next to a results CSV: `out.csv` gives `out.manifest.json`.
pub fn manifest_path(csv: &Path) -> PathBuf {
    csv.with_extension("manifest.json")
}

/// Runs `cfg` (sweeping if `axis` is given) and writes the CSV and its manifest.
pub fn run_to_files(cfg: &ExperimentConfig, axis: Option<(Axis, &[f64])>, out: &Path) -> Result<Table> {
    let started = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let clock = Instant::now();
    let table = match axis {
        Some((a, vs)) => sweep(cfg, a, vs)?,
        None => run_experiment(cfg)?,
    };
    let mut f = std::io::BufWriter::new(std::fs::File::create(out)?);
    table.write_csv(&mut f)?;
    f.flush()?;
    let manifest = Manifest {
        config: cfg,
        version: env!("CARGO_PKG_VERSION"),
        csv: out.display().to_string(),
        rows: table.rows.len(),
        started_unix_s: started,
        wall_clock_s: clock.elapsed().as_secs_f64(),
    };
    std::fs::write(manifest_path(out), serde_json::to_string_pretty(&manifest)?)?;
    Ok(table)
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::channel::ChannelBlock;
    use crate::graph::tests::node;
    use crate::radio::Point;
    use crate::scenario::Region;

    fn gaa_cfg(solvers: Vec<SolverSpec>, seeds: Vec<u64>) -> ExperimentConfig {
        ExperimentConfig {
            scenario: ScenarioSpec::Gaa(GaaScenarioConfig {
                radius_km: 0.4,
                ..Default::default()
            }),
            solvers,
            seeds,
            ..Default::default()
        }
    }

    fn spec(algorithm: Algorithm) -> SolverSpec {
        SolverSpec {
            algorithm,
            trials: 50,
            ..Default::default()
        }
    }

    #[test]
    fn derived_seeds_are_independent_per_stream() {
        assert_eq!(derive_seed(1, 5, 0), derive_seed(1, 5, 0));
        assert_ne!(derive_seed(1, 5, 0), derive_seed(1, 5, 1));
        assert_ne!(derive_seed(1, 5, 0), derive_seed(1, 6, 0));
        assert_ne!(derive_seed(1, 5, 0), derive_seed(2, 5, 0));
    }

    #[test]
    fn metric_definitions() {
        let s = GaaScenario {
            nodes: vec![node(0.0, &[1, 2, 3, 4], &[1, 2, 3, 4]), node(5.0, &[1, 2, 3, 4], &[1, 2, 3, 4])],
            pa_nodes: vec![],
            region: Region { center: Point::ORIGIN, radius_km: 10.0 },
        };
        let scen = Scenario::Gaa(s);
        let mut sol = Solution::empty("t");
        let m = compute_metrics(&sol, &scen);
        assert_eq!((m.p, m.p1, m.p2), (0.0, 0.0, 0.0));
        sol.per_node = BTreeMap::from([(0, ChannelBlock { lo: 1, len: 2 })]);
        let m = compute_metrics(&sol, &scen);
        assert_eq!((m.p1, m.p2), (0.5, 0.25));
        assert_eq!(m.total_interference_w, 0.0);
        assert!(m.capacity_mbps > 0.0);
    }

    #[test]
    fn pa_all_served_is_one() {
        let s = crate::graph::tests::fig3_pa();
        let mut sol = Solution::empty("t");
        sol.per_node = BTreeMap::from([(0, ChannelBlock { lo: 1, len: 1 }), (1, ChannelBlock { lo: 2, len: 2 })]);
        let m = compute_metrics(&sol, &Scenario::Pa(s));
        assert_eq!((m.p, m.p2), (1.0, 1.0));
    }

    #[test]
    fn co_channel_neighbours_interfere() {
        let s = GaaScenario {
            nodes: vec![node(0.0, &[1, 2], &[1, 2]), node(0.05, &[1, 2], &[1, 2])],
            pa_nodes: vec![],
            region: Region { center: Point::ORIGIN, radius_km: 1.0 },
        };
        let scen = Scenario::Gaa(s);
        let mut sol = Solution::empty("t");
        sol.per_node = BTreeMap::from([(0, ChannelBlock { lo: 1, len: 2 }), (1, ChannelBlock { lo: 2, len: 1 })]);
        let shared = compute_metrics(&sol, &scen);
        sol.per_node.insert(1, ChannelBlock { lo: 3, len: 1 });
        let apart = compute_metrics(&sol, &scen);
        assert!(shared.total_interference_w > 0.0);
        assert_eq!(apart.total_interference_w, 0.0);
        assert!(shared.capacity_mbps < apart.capacity_mbps);
    }

    #[test]
    fn one_seed_one_solver_gives_two_rows() {
        let t = run_experiment(&gaa_cfg(vec![spec(Algorithm::Gmwis)], vec![3])).unwrap();
        assert_eq!(t.rows.len(), 2);
        assert!(t.rows[1].is_mean());
        assert_eq!(t.rows[0].metrics, t.rows[1].metrics);
        let csv = t.to_csv_string().unwrap();
        assert!(csv.starts_with(&COLUMNS.join(",")));
        assert_eq!(csv.lines().count(), 3);
    }

    #[test]
    fn reruns_are_identical() {
        let cfg = gaa_cfg(vec![spec(Algorithm::Gmwis), spec(Algorithm::Um), spec(Algorithm::Random)], vec![0, 1]);
        let a = run_experiment(&cfg).unwrap().to_csv_string().unwrap();
        let b = run_experiment(&cfg).unwrap().to_csv_string().unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn adding_a_solver_keeps_existing_rows() {
        let one = run_experiment(&gaa_cfg(vec![spec(Algorithm::Gmwis)], vec![4])).unwrap();
        let two = run_experiment(&gaa_cfg(vec![spec(Algorithm::Gmwis), spec(Algorithm::Mra)], vec![4])).unwrap();
        assert_eq!(one.rows[0], two.rows[0]);
    }

    #[test]
    fn row_counts_for_a_sweep() {
        let cfg = gaa_cfg(vec![spec(Algorithm::Gmwis), spec(Algorithm::Mra)], vec![0, 1, 2]);
        let t = sweep(&cfg, Axis::Lambda, &[0.0, 4.0]).unwrap();
        assert_eq!(t.data_rows().count(), 3 * 2 * 2);
        assert_eq!(t.mean_rows().count(), 2 * 2);
        let single = sweep(&cfg, Axis::Lambda, &[0.0]).unwrap();
        let plain = run_experiment(&cfg).unwrap();
        for (a, b) in single.rows.iter().zip(&plain.rows) {
            assert_eq!(a.metrics, b.metrics);
        }
    }

    #[test]
    fn failed_generation_is_a_skipped_row() {
        let mut cfg = gaa_cfg(vec![spec(Algorithm::Gmwis)], vec![0]);
        if let ScenarioSpec::Gaa(g) = &mut cfg.scenario {
            g.source = crate::scenario::NodeSource::Csv {
                path: "/nonexistent/nodes.csv".into(),
                center_lat: 40.0,
                center_lon: -74.0,
            };
        }
        let t = run_experiment(&cfg).unwrap();
        assert_eq!(t.rows.len(), 2);
        assert!(t.rows.iter().all(|r| r.metrics.is_none()));
    }

    #[test]
    fn invalid_configs_are_rejected() {
        assert!(run_experiment(&gaa_cfg(vec![spec(Algorithm::Gmwis)], vec![])).is_err());
        assert!(run_experiment(&gaa_cfg(vec![spec(Algorithm::Npsmc)], vec![0])).is_err());
        let mut bad = spec(Algorithm::Mra);
        bad.alpha_bar = 1.0;
        assert!(run_experiment(&gaa_cfg(vec![bad], vec![0])).is_err());
        let mut neg = spec(Algorithm::Um);
        neg.lambda = -1.0;
        assert!(run_experiment(&gaa_cfg(vec![neg], vec![0])).is_err());
        let cfg = ExperimentConfig {
            scenario: ScenarioSpec::Pa(PaSpec::default()),
            solvers: vec![spec(Algorithm::Um)],
            ..Default::default()
        };
        assert!(run_experiment(&cfg).is_err());
        assert!(sweep(&gaa_cfg(vec![spec(Algorithm::Gmwis)], vec![0]), Axis::M, &[3.0]).is_err());
    }

    #[test]
    fn timing_fills_runtime_only_when_asked() {
        let mut cfg = gaa_cfg(vec![spec(Algorithm::Gmwis)], vec![0]);
        assert!(run_experiment(&cfg).unwrap().rows[0].runtime_ms.is_none());
        cfg.timing = true;
        assert!(run_experiment(&cfg).unwrap().rows[0].runtime_ms.is_some());
    }

    #[test]
    fn config_json_roundtrip_and_defaults() {
        let cfg: ExperimentConfig = serde_json::from_str(r#"{"seeds": [1, 2]}"#).unwrap();
        assert_eq!(cfg.solvers, default_solvers());
        assert!(matches!(cfg.scenario, ScenarioSpec::Gaa(_)));
        let cfg: ExperimentConfig = serde_json::from_str(
            r#"{"scenario": {"tier": "pa", "m": 6}, "solvers": [{"algorithm": "npsmc"}], "seeds": [0]}"#,
        )
        .unwrap();
        assert_eq!(cfg.scenario, ScenarioSpec::Pa(PaSpec { m: 6, r_s: 1.0 }));
        let back: ExperimentConfig = serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);
        assert_eq!("alpha-bar".parse::<Axis>().unwrap(), Axis::AlphaBar);
        assert_eq!("rs".parse::<Axis>().unwrap(), Axis::RS);
        assert_eq!(Axis::RS.to_string(), "r_s");
        assert_eq!("um".parse::<Algorithm>().unwrap(), Algorithm::Um);
        assert!("ilp".parse::<Algorithm>().is_err());
    }

    #[test]
    fn files_and_manifest_are_written() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("res.csv");
        let cfg = gaa_cfg(vec![spec(Algorithm::Gmwis)], vec![0]);
        run_to_files(&cfg, None, &out).unwrap();
        assert!(std::fs::read_to_string(&out).unwrap().starts_with("seed,"));
        let m: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(manifest_path(&out)).unwrap()).unwrap();
        assert_eq!(m["rows"], 2);
        assert_eq!(m["config"]["seeds"][0], 0);
    }
}
