//! PA and GAA scenarios: domain model, generators, ingestion, channel
//! availability and pairwise conflict classification.

use std::collections::{BTreeSet, HashSet, VecDeque};
use std::path::Path;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{ChannelBlock, ChannelSet, GAA_CHANNELS, PA_CHANNELS};
use crate::error::{Error, Result};
use crate::radio::{contour_radius, project_equirectangular, Point, RadioParams};

/// Maximum number of PALs in any one census tract.
pub const MAX_PALS_PER_TRACT: u32 = 7;

/// Longest contiguous block a GAA node may request.
pub const MAX_GAA_DEMAND: u8 = 4;

/// Consecutive rejected placements after which PA generation stops.
pub const PA_MAX_FAILED_TRIALS: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServiceArea {
    pub id: usize,
    pub licensee_id: usize,
    /// Row-major tract indices (`y * m + x`), sorted ascending.
    pub tract_ids: Vec<u32>,
    pub n_pals: u8,
    pub availability: ChannelSet,
}

impl ServiceArea {
    pub fn overlaps(&self, other: &ServiceArea) -> bool {
        let (mut i, mut j) = (0, 0);
        while i < self.tract_ids.len() && j < other.tract_ids.len() {
            match self.tract_ids[i].cmp(&other.tract_ids[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => return true,
            }
        }
        false
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PaScenario {
    pub grid_width: u32,
    pub service_areas: Vec<ServiceArea>,
    pub channels: ChannelSet,
}

impl PaScenario {
    /// PAL load per tract.
    pub fn tract_loads(&self) -> Vec<u32> {
        let m = self.grid_width as usize;
        let mut load = vec![0u32; m * m];
        for area in &self.service_areas {
            for &t in &area.tract_ids {
                load[t as usize] += area.n_pals as u32;
            }
        }
        load
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.grid_width;
        for area in &self.service_areas {
            if area.tract_ids.is_empty() {
                return Err(Error::InvalidScenario(format!("area {} has no tracts", area.id)));
            }
            if !(1..=4).contains(&area.n_pals) {
                return Err(Error::InvalidScenario(format!(
                    "area {} demands {} PALs",
                    area.id, area.n_pals
                )));
            }
            if area.tract_ids.iter().any(|&t| t >= m * m) {
                return Err(Error::InvalidScenario(format!("area {} leaves the grid", area.id)));
            }
            if !is_four_connected(&area.tract_ids, m) {
                return Err(Error::InvalidScenario(format!("area {} is not contiguous", area.id)));
            }
            if !area.availability.is_subset(&ChannelSet::full(PA_CHANNELS)) {
                return Err(Error::InvalidScenario(format!(
                    "area {} availability outside the PAL channels",
                    area.id
                )));
            }
        }
        if let Some(t) = self.tract_loads().iter().position(|&l| l > MAX_PALS_PER_TRACT) {
            return Err(Error::InvalidScenario(format!("tract {t} exceeds the PAL cap")));
        }
        Ok(())
    }

    /// Total channels demanded over all areas.
    pub fn total_demand(&self) -> usize {
        self.service_areas.iter().map(|a| a.n_pals as usize).sum()
    }
}

/// True if the tract set is nonempty and 4-connected on an `m`-wide grid.
pub fn is_four_connected(tracts: &[u32], m: u32) -> bool {
    let set: HashSet<u32> = tracts.iter().copied().collect();
    let Some(&start) = tracts.first() else {
        return false;
    };
    let mut seen = HashSet::from([start]);
    let mut queue = VecDeque::from([start]);
    while let Some(t) = queue.pop_front() {
        let (x, y) = (t % m, t / m);
        let mut nbrs = Vec::with_capacity(4);
        if x > 0 {
            nbrs.push(t - 1);
        }
        if x + 1 < m {
            nbrs.push(t + 1);
        }
        if y > 0 {
            nbrs.push(t - m);
        }
        if y + 1 < m {
            nbrs.push(t + m);
        }
        for n in nbrs {
            if set.contains(&n) && seen.insert(n) {
                queue.push_back(n);
            }
        }
    }
    seen.len() == set.len()
}

/// Tracts of an `m`-wide unit grid overlapping the open disk of radius `r` at `c`.
fn tracts_overlapping(c: Point, r: f64, m: u32) -> Vec<u32> {
    let lo_x = ((c.x_km - r).floor().max(0.0)) as u32;
    let hi_x = ((c.x_km + r).ceil().min(m as f64)) as u32;
    let lo_y = ((c.y_km - r).floor().max(0.0)) as u32;
    let hi_y = ((c.y_km + r).ceil().min(m as f64)) as u32;
    let mut out = Vec::new();
    for y in lo_y..hi_y {
        for x in lo_x..hi_x {
            let nx = c.x_km.clamp(x as f64, x as f64 + 1.0);
            let ny = c.y_km.clamp(y as f64, y as f64 + 1.0);
            if (c.x_km - nx).hypot(c.y_km - ny) < r {
                out.push(y * m + x);
            }
        }
    }
    out
}

/// Random PA scenario on an `m` x `m` tract grid with circular service areas of radius `r_s`.
///
/// Placement continues until `PA_MAX_FAILED_TRIALS` consecutive trials violate
/// the per-tract PAL cap, or until every tract is full.
pub fn generate_pa_scenario(m: u32, r_s: f64, seed: u64) -> PaScenario {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut areas: Vec<ServiceArea> = Vec::new();
    if m == 0 || !(r_s > 0.0) {
        return PaScenario {
            grid_width: m,
            service_areas: areas,
            channels: ChannelSet::full(PA_CHANNELS),
        };
    }
    let mut load = vec![0u32; (m * m) as usize];
    let mut failures = 0;
    while failures < PA_MAX_FAILED_TRIALS && load.iter().any(|&l| l < MAX_PALS_PER_TRACT) {
        let c = Point::new(rng.gen::<f64>() * m as f64, rng.gen::<f64>() * m as f64);
        let n_pals: u8 = rng.gen_range(1..=4);
        let tracts = tracts_overlapping(c, r_s, m);
        let fits = !tracts.is_empty()
            && tracts
                .iter()
                .all(|&t| load[t as usize] + n_pals as u32 <= MAX_PALS_PER_TRACT);
        if !fits {
            failures += 1;
            continue;
        }
        failures = 0;
        for &t in &tracts {
            load[t as usize] += n_pals as u32;
        }
        let id = areas.len();
        areas.push(ServiceArea {
            id,
            licensee_id: id,
            tract_ids: tracts,
            n_pals,
            availability: compute_pal_availability(ChannelSet::EMPTY),
        });
    }
    PaScenario {
        grid_width: m,
        service_areas: areas,
        channels: ChannelSet::full(PA_CHANNELS),
    }
}

/// PAL channels left after removing the channels masked by active DPAs.
pub fn compute_pal_availability(dpa_mask: ChannelSet) -> ChannelSet {
    ChannelSet::full(PA_CHANNELS).difference(&dpa_mask)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaaNode {
    /// External identifier (for example the CSV `id` column).
    pub id: u64,
    pub pos: Point,
    pub params: RadioParams,
    pub availability: ChannelSet,
    /// Acceptable block lengths, ascending.
    pub demand_set: Vec<u8>,
    pub activity: f64,
}

impl GaaNode {
    pub fn max_demand(&self) -> u8 {
        self.demand_set.iter().copied().max().unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PaNode {
    pub pos: Point,
    pub block: ChannelBlock,
    pub ppa_radius_km: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub center: Point,
    pub radius_km: f64,
}

impl Region {
    pub fn contains(&self, p: Point) -> bool {
        self.center.distance(&p) <= self.radius_km
    }

    pub fn area_km2(&self) -> f64 {
        std::f64::consts::PI * self.radius_km * self.radius_km
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> Point {
        let r = self.radius_km * rng.gen::<f64>().sqrt();
        let theta = rng.gen::<f64>() * std::f64::consts::TAU;
        Point::new(
            self.center.x_km + r * theta.cos(),
            self.center.y_km + r * theta.sin(),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaaScenario {
    pub nodes: Vec<GaaNode>,
    pub pa_nodes: Vec<PaNode>,
    pub region: Region,
}

impl GaaScenario {
    /// Builds a scenario and fills in every node's channel availability.
    pub fn assemble(mut nodes: Vec<GaaNode>, pa_nodes: Vec<PaNode>, region: Region) -> Result<Self> {
        if let Some(n) = nodes.iter().find(|n| !region.contains(n.pos)) {
            return Err(Error::InvalidScenario(format!("node {} lies outside the region", n.id)));
        }
        for n in &nodes {
            n.params.validate()?;
            if n.demand_set.is_empty()
                || n.demand_set.iter().any(|&d| d == 0 || d > MAX_GAA_DEMAND)
            {
                return Err(Error::InvalidScenario(format!("node {} has an invalid demand set", n.id)));
            }
            if !(n.activity >= 0.0) {
                return Err(Error::InvalidScenario(format!("node {} has negative activity", n.id)));
            }
        }
        let avail: Vec<ChannelSet> = nodes
            .iter()
            .map(|n| gaa_availability(n, &pa_nodes))
            .collect();
        for (n, a) in nodes.iter_mut().zip(avail) {
            n.availability = a;
        }
        Ok(GaaScenario {
            nodes,
            pa_nodes,
            region,
        })
    }

    pub fn total_demand(&self) -> usize {
        self.nodes.iter().map(|n| n.max_demand() as usize).sum()
    }
}

/// Pairwise conflict of node `j` on node `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ConflictClass {
    None,
    /// Hidden interferer: inside the victim's protection distance, outside its CS range.
    TypeI,
    /// Interferer the victim can detect by carrier sense or energy detection.
    TypeII,
}

impl ConflictClass {
    pub fn is_conflict(self) -> bool {
        self != ConflictClass::None
    }
}

/// Classifies the impact of interferer `j` on victim `i`.
///
/// Distances are compared against the victim's service radius plus the
/// interferer's interference radius, and against the distance at which the
/// interferer's signal drops to the victim's CS threshold.
pub fn classify_conflict(i: &GaaNode, j: &GaaNode) -> ConflictClass {
    classify_at_distance(i.pos.distance(&j.pos), &i.params, &j.params)
}

pub(crate) fn classify_at_distance(d: f64, victim: &RadioParams, interferer: &RadioParams) -> ConflictClass {
    let r_i = victim.service_radius_km();
    let r_j_int = interferer.interference_radius_km();
    if d >= r_i + r_j_int {
        return ConflictClass::None;
    }
    let r_cs = contour_radius(interferer.tx_power_dbm, victim.cs_threshold_dbm, interferer)
        .unwrap_or(0.0);
    if d < r_cs {
        ConflictClass::TypeII
    } else {
        ConflictClass::TypeI
    }
}

/// GAA channels usable by `node` given the PA deployment in `scenario`.
pub fn compute_gaa_availability(node: &GaaNode, scenario: &GaaScenario) -> ChannelSet {
    gaa_availability(node, &scenario.pa_nodes)
}

fn gaa_availability(node: &GaaNode, pa_nodes: &[PaNode]) -> ChannelSet {
    let r_int = node.params.interference_radius_km();
    let mut avail = ChannelSet::full(GAA_CHANNELS);
    for pa in pa_nodes {
        if node.pos.distance(&pa.pos) < pa.ppa_radius_km + r_int {
            for c in pa.block.channels() {
                avail.remove(c);
            }
        }
    }
    avail
}

/// How node attributes not present in the input are filled in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeTemplate {
    pub params: RadioParams,
    pub demand_set: Vec<u8>,
    /// Activities are drawn uniformly from `[0, activity_max]`.
    pub activity_max: f64,
}

impl Default for NodeTemplate {
    fn default() -> Self {
        NodeTemplate {
            params: RadioParams::default(),
            demand_set: (1..=MAX_GAA_DEMAND).collect(),
            activity_max: 4.0,
        }
    }
}

impl NodeTemplate {
    fn instantiate<R: Rng>(&self, id: u64, pos: Point, rng: &mut R) -> GaaNode {
        GaaNode {
            id,
            pos,
            params: self.params,
            availability: ChannelSet::full(GAA_CHANNELS),
            demand_set: self.demand_set.clone(),
            activity: rng.gen::<f64>() * self.activity_max,
        }
    }
}

/// Circular service region given in WGS84 degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoRegion {
    pub center_lat: f64,
    pub center_lon: f64,
    pub radius_km: f64,
}

impl GeoRegion {
    /// The same region in planar coordinates centred on the origin.
    pub fn planar(&self) -> Region {
        Region {
            center: Point::ORIGIN,
            radius_km: self.radius_km,
        }
    }
}

/// Reads `id,lat,lon` rows, projects them about the region centre and keeps
/// the ones inside the region.
pub fn load_gaa_nodes<R: Rng>(
    csv_path: &Path,
    region: &GeoRegion,
    template: &NodeTemplate,
    rng: &mut R,
) -> Result<Vec<GaaNode>> {
    let file = std::fs::File::open(csv_path)?;
    read_gaa_nodes(file, csv_path, region, template, rng)
}

pub(crate) fn read_gaa_nodes<R: Rng>(
    input: impl std::io::Read,
    csv_path: &Path,
    region: &GeoRegion,
    template: &NodeTemplate,
    rng: &mut R,
) -> Result<Vec<GaaNode>> {
    let err = |line: u64, msg: String| Error::Csv {
        path: csv_path.to_path_buf(),
        line,
        msg,
    };
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let headers = reader.headers().map_err(|e| err(1, e.to_string()))?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h.eq_ignore_ascii_case(name))
            .ok_or_else(|| err(1, format!("missing `{name}` column")))
    };
    let (id_col, lat_col, lon_col) = (col("id")?, col("lat")?, col("lon")?);
    let planar = region.planar();
    let mut seen = HashSet::new();
    let mut nodes = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            err(line, e.to_string())
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let field = |c: usize, name: &str| {
            record
                .get(c)
                .ok_or_else(|| err(line, format!("missing {name}")))
        };
        let id: u64 = field(id_col, "id")?
            .parse()
            .map_err(|e| err(line, format!("bad id: {e}")))?;
        let lat: f64 = field(lat_col, "lat")?
            .parse()
            .map_err(|e| err(line, format!("bad lat: {e}")))?;
        let lon: f64 = field(lon_col, "lon")?
            .parse()
            .map_err(|e| err(line, format!("bad lon: {e}")))?;
        if !lat.is_finite() || !lon.is_finite() {
            return Err(err(line, "non-finite coordinate".into()));
        }
        if !seen.insert(id) {
            return Err(Error::DuplicateNode { id, line });
        }
        let pos = project_equirectangular(lat, lon, region.center_lat, region.center_lon);
        if planar.contains(pos) {
            nodes.push(template.instantiate(id, pos, rng));
        }
    }
    Ok(nodes)
}

/// PA deployment used to carve location-dependent GAA availability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PaDeployment {
    /// Channel block held by each licensee.
    pub licensee_blocks: Vec<ChannelBlock>,
    pub nodes_per_licensee: usize,
    pub params: RadioParams,
}

impl Default for PaDeployment {
    fn default() -> Self {
        PaDeployment {
            licensee_blocks: vec![ChannelBlock { lo: 1, len: 4 }, ChannelBlock { lo: 5, len: 3 }],
            nodes_per_licensee: 10,
            params: RadioParams::default(),
        }
    }
}

impl PaDeployment {
    /// PA nodes placed uniformly in `region`, licensee by licensee.
    pub fn place<R: Rng>(&self, region: &Region, rng: &mut R) -> Vec<PaNode> {
        let ppa = self.params.service_radius_km();
        let mut out = Vec::with_capacity(self.licensee_blocks.len() * self.nodes_per_licensee);
        for block in &self.licensee_blocks {
            for _ in 0..self.nodes_per_licensee {
                out.push(PaNode {
                    pos: region.sample(rng),
                    block: *block,
                    ppa_radius_km: ppa,
                });
            }
        }
        out
    }
}

/// Where GAA node locations come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeSource {
    /// Uniform points in the region disk, `round(density * area)` of them.
    Synthetic { density_per_km2: f64 },
    /// Hotspot locations from an `id,lat,lon` CSV.
    Csv {
        path: std::path::PathBuf,
        center_lat: f64,
        center_lon: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaaScenarioConfig {
    pub radius_km: f64,
    pub source: NodeSource,
    #[serde(default)]
    pub template: NodeTemplate,
    #[serde(default)]
    pub pa: PaDeployment,
}

impl Default for GaaScenarioConfig {
    fn default() -> Self {
        GaaScenarioConfig {
            radius_km: 0.8,
            source: NodeSource::Synthetic {
                density_per_km2: 75.0,
            },
            template: NodeTemplate::default(),
            pa: PaDeployment::default(),
        }
    }
}

/// Builds a GAA scenario; a pure function of `(cfg, seed)`.
pub fn generate_gaa_scenario(cfg: &GaaScenarioConfig, seed: u64) -> Result<GaaScenario> {
    if !(cfg.radius_km > 0.0) {
        return Err(Error::InvalidScenario("region radius must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (nodes, region) = match &cfg.source {
        NodeSource::Synthetic { density_per_km2 } => {
            let region = Region {
                center: Point::ORIGIN,
                radius_km: cfg.radius_km,
            };
            let n = (density_per_km2 * region.area_km2()).round().max(0.0) as usize;
            let nodes = (0..n)
                .map(|i| {
                    let pos = region.sample(&mut rng);
                    cfg.template.instantiate(i as u64, pos, &mut rng)
                })
                .collect();
            (nodes, region)
        }
        NodeSource::Csv {
            path,
            center_lat,
            center_lon,
        } => {
            let geo = GeoRegion {
                center_lat: *center_lat,
                center_lon: *center_lon,
                radius_km: cfg.radius_km,
            };
            let nodes = load_gaa_nodes(path, &geo, &cfg.template, &mut rng)?;
            (nodes, geo.planar())
        }
    };
    let pa_nodes = cfg.pa.place(&region, &mut rng);
    GaaScenario::assemble(nodes, pa_nodes, region)
}

/// Either tier, tagged for JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "tier", rename_all = "snake_case")]
pub enum Scenario {
    Pa(PaScenario),
    Gaa(GaaScenario),
}

/// Distinct channel blocks, in canonical order, appearing in any node's valid assignments.
pub fn gaa_blocks_in_use(s: &GaaScenario) -> Vec<ChannelBlock> {
    let mut set = BTreeSet::new();
    for n in &s.nodes {
        for b in crate::graph::enumerate_gaa_assignments(n.availability, &n.demand_set) {
            set.insert(b.canonical_key());
        }
    }
    set.into_iter()
        .map(|(len, lo)| ChannelBlock { lo, len })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radio::contour_radius;
    use std::io::Cursor;

    fn node_at(id: u64, x: f64, y: f64) -> GaaNode {
        GaaNode {
            id,
            pos: Point::new(x, y),
            params: RadioParams::default(),
            availability: ChannelSet::full(GAA_CHANNELS),
            demand_set: vec![1, 2, 3, 4],
            activity: 1.0,
        }
    }

    #[test]
    fn single_tract_grid_respects_cap() {
        for seed in 0..20 {
            let s = generate_pa_scenario(1, 0.1, seed);
            assert!(s.service_areas.iter().all(|a| a.tract_ids == vec![0]));
            assert!(s.total_demand() <= 7);
            s.validate().unwrap();
        }
    }

    #[test]
    fn pa_generation_is_deterministic() {
        let a = serde_json::to_string(&generate_pa_scenario(10, 1.0, 42)).unwrap();
        let b = serde_json::to_string(&generate_pa_scenario(10, 1.0, 42)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn pa_areas_are_contiguous() {
        for seed in 0..100 {
            let s = generate_pa_scenario(10, 1.0, seed);
            assert!(!s.service_areas.is_empty());
            for a in &s.service_areas {
                assert!(!a.tract_ids.is_empty());
                assert!(is_four_connected(&a.tract_ids, 10), "seed {seed} area {}", a.id);
            }
            s.validate().unwrap();
        }
    }

    #[test]
    fn degenerate_inputs_give_empty_scenarios() {
        assert!(generate_pa_scenario(0, 1.0, 1).service_areas.is_empty());
        assert!(generate_pa_scenario(5, 0.0, 1).service_areas.is_empty());
    }

    #[test]
    fn four_connectivity() {
        assert!(is_four_connected(&[0, 1, 4], 3));
        assert!(!is_four_connected(&[0, 4], 3)); // diagonal only
        assert!(!is_four_connected(&[], 3));
    }

    #[test]
    fn pal_availability() {
        assert_eq!(compute_pal_availability(ChannelSet::EMPTY), ChannelSet::full(10));
        assert!(compute_pal_availability(ChannelSet::full(10)).is_empty());
        let five: ChannelSet = [5].into_iter().collect();
        assert_eq!(
            compute_pal_availability(five).iter().collect::<Vec<_>>(),
            vec![1, 2, 3, 4, 6, 7, 8, 9, 10]
        );
    }

    fn pa_node(x: f64, block: ChannelBlock) -> PaNode {
        PaNode {
            pos: Point::new(x, 0.0),
            block,
            ppa_radius_km: RadioParams::default().service_radius_km(),
        }
    }

    #[test]
    fn availability_far_from_pa_is_full() {
        let region = Region { center: Point::ORIGIN, radius_km: 10.0 };
        let s = GaaScenario::assemble(
            vec![node_at(0, 0.0, 0.0)],
            vec![pa_node(5.0, ChannelBlock { lo: 1, len: 4 })],
            region,
        )
        .unwrap();
        assert_eq!(s.nodes[0].availability, ChannelSet::full(15));
    }

    #[test]
    fn availability_colocated_with_pa_loses_block() {
        let region = Region { center: Point::ORIGIN, radius_km: 10.0 };
        let s = GaaScenario::assemble(
            vec![node_at(0, 0.0, 0.0)],
            vec![pa_node(0.0, ChannelBlock { lo: 1, len: 4 })],
            region,
        )
        .unwrap();
        let a = s.nodes[0].availability;
        assert!(a.intersection(&ChannelSet::range(1, 4)).is_empty());
        assert_eq!(a, ChannelSet::range(5, 15));
    }

    #[test]
    fn availability_boundary_is_available() {
        let p = RadioParams::default();
        let boundary = p.service_radius_km() + p.interference_radius_km();
        let region = Region { center: Point::ORIGIN, radius_km: 10.0 };
        let n = node_at(0, 0.0, 0.0);
        let pa = PaNode {
            pos: Point::new(boundary, 0.0),
            block: ChannelBlock { lo: 5, len: 3 },
            ppa_radius_km: p.service_radius_km(),
        };
        let s = GaaScenario::assemble(vec![n], vec![pa], region).unwrap();
        assert_eq!(s.nodes[0].availability, ChannelSet::full(15));
    }

    #[test]
    fn conflict_classes() {
        let p = RadioParams::default();
        let r_cs = contour_radius(p.tx_power_dbm, p.cs_threshold_dbm, &p).unwrap();
        let reach = p.service_radius_km() + p.interference_radius_km();
        let i = node_at(0, 0.0, 0.0);
        let at = |d: f64| node_at(1, d, 0.0);
        assert_eq!(classify_conflict(&i, &at(r_cs * 0.999)), ConflictClass::TypeII);
        assert_eq!(classify_conflict(&i, &at(r_cs)), ConflictClass::TypeI);
        assert_eq!(classify_conflict(&i, &at(reach * 0.999)), ConflictClass::TypeI);
        assert_eq!(classify_conflict(&i, &at(reach)), ConflictClass::None);
        assert_eq!(classify_conflict(&i, &at(0.0)), ConflictClass::TypeII);
    }

    #[test]
    fn conflict_symmetric_for_equal_params() {
        for k in 0..200 {
            let d = k as f64 * 0.001;
            let a = node_at(0, 0.0, 0.0);
            let b = node_at(1, d * 0.6, d * 0.8);
            assert_eq!(classify_conflict(&a, &b), classify_conflict(&b, &a));
        }
    }

    #[test]
    fn conflict_direction_depends_on_power() {
        let loud = GaaNode {
            params: RadioParams { tx_power_dbm: 40.0, ..RadioParams::default() },
            ..node_at(1, 0.25, 0.0)
        };
        let quiet = node_at(0, 0.0, 0.0);
        // the loud node's wider service area takes in the quiet node's
        // interference range, but not the other way round
        assert_eq!(classify_conflict(&loud, &quiet), ConflictClass::TypeI);
        assert_eq!(classify_conflict(&quiet, &loud), ConflictClass::None);
    }

    const REGION: GeoRegion = GeoRegion { center_lat: 40.74, center_lon: -73.99, radius_km: 1.0 };

    fn read(text: &str) -> Result<Vec<GaaNode>> {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        read_gaa_nodes(Cursor::new(text.to_owned()), Path::new("nodes.csv"), &REGION, &NodeTemplate::default(), &mut rng)
    }

    #[test]
    fn csv_header_only_is_empty() {
        assert!(read("id,lat,lon\n").unwrap().is_empty());
    }

    #[test]
    fn csv_region_filter() {
        // 2 km north of the centre is 0.017986 degrees of latitude
        let nodes = read("id,lat,lon\n1,40.74,-73.99\n2,40.757986,-73.99\n").unwrap();
        assert_eq!(nodes.len(), 1);
        assert_eq!(nodes[0].id, 1);
        assert_eq!(nodes[0].pos, Point::ORIGIN);
        assert!((0.0..=4.0).contains(&nodes[0].activity));
    }

    #[test]
    fn csv_duplicate_id_is_rejected() {
        let e = read("id,lat,lon\n7,40.74,-73.99\n7,40.741,-73.99\n").unwrap_err();
        assert!(matches!(e, Error::DuplicateNode { id: 7, line: 3 }), "{e}");
    }

    #[test]
    fn csv_malformed_row_names_line() {
        let e = read("id,lat,lon\n1,40.74,-73.99\n2,abc,-73.99\n").unwrap_err();
        match e {
            Error::Csv { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn gaa_generation_deterministic_and_inside() {
        let cfg = GaaScenarioConfig::default();
        let a = generate_gaa_scenario(&cfg, 9).unwrap();
        let b = generate_gaa_scenario(&cfg, 9).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.nodes.len(), 151);
        assert_eq!(a.pa_nodes.len(), 20);
        assert!(a.nodes.iter().all(|n| a.region.contains(n.pos)));
        assert!(a
            .nodes
            .iter()
            .all(|n| n.availability.is_subset(&ChannelSet::full(15))
                && ChannelSet::range(8, 15).is_subset(&n.availability)));
    }

    #[test]
    fn scenario_json_roundtrip_is_exact() {
        let s = Scenario::Gaa(generate_gaa_scenario(&GaaScenarioConfig::default(), 3).unwrap());
        let text = serde_json::to_string(&s).unwrap();
        let back: Scenario = serde_json::from_str(&text).unwrap();
        assert_eq!(back, s);
        assert_eq!(serde_json::to_string(&back).unwrap(), text);
        let p = Scenario::Pa(generate_pa_scenario(6, 0.7, 3));
        let text = serde_json::to_string(&p).unwrap();
        assert_eq!(serde_json::from_str::<Scenario>(&text).unwrap(), p);
    }
}
