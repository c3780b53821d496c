//! The layered relay network and its age-of-information metrics.
//!
//! Nodes belong to one of six ordered groups and may only transmit to a node
//! of a strictly higher group, so every relay graph is a DAG with paths of at
//! most six nodes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::constants::{EARTH_RADIUS_KM, MOON_RADIUS_KM, SPEED_OF_LIGHT_KM_S, UNREACHABLE_AOI};
use crate::coverage::{above_mask, segment_clears, Sphere};
use crate::error::{CoreError, Result};
use crate::frames::Epoch;
use crate::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Group {
    Source = 0,
    Eml2 = 1,
    Ordinary = 2,
    Eml1 = 3,
    Geo = 4,
    Egs = 5,
}

impl Group {
    pub const ALL: [Group; 6] = [
        Group::Source,
        Group::Eml2,
        Group::Ordinary,
        Group::Eml1,
        Group::Geo,
        Group::Egs,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Group> {
        Group::ALL.get(i).copied()
    }

    /// Lunar surface sources and lunar-vicinity relays.
    pub fn is_lunar_side(self) -> bool {
        self.index() <= Group::Eml1.index()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Node {
    pub group: Group,
    /// ECI position, km.
    pub position: Vec3,
}

/// All nodes at one instant. Node ids are indices into `nodes`.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkSnapshot {
    pub epoch: Epoch,
    pub moon_center: Vec3,
    pub nodes: Vec<Node>,
}

impl NetworkSnapshot {
    /// Earth at the origin and the Moon at its center.
    pub fn occluders(&self) -> [Sphere; 2] {
        [
            Sphere {
                center: Vec3::zeros(),
                radius: EARTH_RADIUS_KM,
            },
            Sphere {
                center: self.moon_center,
                radius: MOON_RADIUS_KM,
            },
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinkModel {
    /// Bit error rate of links between the lunar side and the Earth side.
    pub ber_lunar_earth: f64,
    /// Bit error rate of every other link.
    pub ber_other: f64,
    pub packet_bits: u32,
    pub rate_bps: f64,
    /// Distance that corresponds to one unit of age.
    pub unit_distance_km: f64,
    /// Update generation interval, in age units.
    pub sigma: f64,
}

impl Default for LinkModel {
    fn default() -> Self {
        LinkModel {
            ber_lunar_earth: 1e-5,
            ber_other: 1e-6,
            packet_bits: 8192,
            rate_bps: 2e6,
            unit_distance_km: 3000.0,
            sigma: 1.0,
        }
    }
}

impl LinkModel {
    pub fn validate(&self) -> Result<()> {
        for (what, ber) in [("lunar-earth BER", self.ber_lunar_earth), ("BER", self.ber_other)] {
            if !(0.0..1.0).contains(&ber) {
                return Err(CoreError::domain(what, format!("{ber} outside [0, 1)")));
            }
        }
        if self.packet_bits == 0 {
            return Err(CoreError::domain("packet size", "must be positive"));
        }
        for (what, v) in [
            ("transmission rate", self.rate_bps),
            ("unit distance", self.unit_distance_km),
            ("sigma", self.sigma),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(CoreError::domain(what, format!("{v} must be positive")));
            }
        }
        Ok(())
    }

    /// Per-hop transmission delay in age units.
    pub fn transmission_delay(&self) -> f64 {
        (self.packet_bits as f64 / self.rate_bps) / (self.unit_distance_km / SPEED_OF_LIGHT_KM_S)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LinkClass {
    LunarEarth,
    Other,
}

impl LinkClass {
    pub fn between(a: Group, b: Group) -> LinkClass {
        if a.is_lunar_side() != b.is_lunar_side() {
            LinkClass::LunarEarth
        } else {
            LinkClass::Other
        }
    }
}

/// Packet loss probability of one hop under independent bit errors.
pub fn link_failure_prob(class: LinkClass, model: &LinkModel) -> f64 {
    let ber = match class {
        LinkClass::LunarEarth => model.ber_lunar_earth,
        LinkClass::Other => model.ber_other,
    };
    -(model.packet_bits as f64 * (-ber).ln_1p()).exp_m1()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GraphOptions {
    /// Ground stations accept packets only from GEO relays.
    pub force_geo_relay: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelayGraph {
    nodes: Vec<Node>,
    successors: Vec<Vec<usize>>,
}

impl RelayGraph {
    /// Graph over `nodes` with explicit edges; used to test path search on
    /// arbitrary layered graphs. Edges must go from a lower to a higher group.
    pub fn from_edges(nodes: Vec<Node>, edges: &[(usize, usize)]) -> Result<Self> {
        let mut successors = vec![Vec::new(); nodes.len()];
        for &(u, v) in edges {
            if u >= nodes.len() || v >= nodes.len() {
                return Err(CoreError::domain("edge", format!("({u}, {v}) out of range")));
            }
            if nodes[u].group >= nodes[v].group {
                return Err(CoreError::domain(
                    "edge",
                    format!("({u}, {v}) does not go to a higher group"),
                ));
            }
            if !successors[u].contains(&v) {
                successors[u].push(v);
            }
        }
        Ok(RelayGraph { nodes, successors })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn successors(&self, u: usize) -> &[usize] {
        &self.successors[u]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.successors[u].contains(&v)
    }

    pub fn edge_count(&self) -> usize {
        self.successors.iter().map(Vec::len).sum()
    }
}

/// Whether `u` may transmit to `v` in `snapshot`.
pub fn link_allowed(
    snapshot: &NetworkSnapshot,
    u: &Node,
    v: &Node,
    sin_theta_c: f64,
    occluders: &[Sphere],
    options: &GraphOptions,
) -> bool {
    if u.group >= v.group {
        return false;
    }
    if options.force_geo_relay && v.group == Group::Egs && u.group != Group::Geo {
        return false;
    }
    if u.group == Group::Source {
        let normal = u.position - snapshot.moon_center;
        if !above_mask(&normal, &u.position, &v.position, sin_theta_c) {
            return false;
        }
    }
    if v.group == Group::Egs && !above_mask(&v.position, &v.position, &u.position, sin_theta_c) {
        return false;
    }
    occluders
        .iter()
        .all(|s| segment_clears(&u.position, &v.position, s))
}

pub fn build_relay_graph(
    snapshot: &NetworkSnapshot,
    theta_c_deg: f64,
    occluders: &[Sphere],
    options: &GraphOptions,
) -> RelayGraph {
    let sin_c = theta_c_deg.to_radians().sin();
    let nodes = &snapshot.nodes;
    let successors = nodes
        .iter()
        .map(|u| {
            nodes
                .iter()
                .enumerate()
                .filter(|(_, v)| link_allowed(snapshot, u, v, sin_c, occluders, options))
                .map(|(j, _)| j)
                .collect()
        })
        .collect();
    RelayGraph {
        nodes: nodes.clone(),
        successors,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathMetrics {
    pub hops: usize,
    pub distance_km: f64,
    /// End-to-end delivery probability.
    pub success_prob: f64,
    /// Propagation plus transmission delay, age units.
    pub delay: f64,
}

/// Metrics of the node sequence `path`, accumulated from the first hop.
pub fn path_metrics(nodes: &[Node], path: &[usize], model: &LinkModel) -> Result<PathMetrics> {
    if path.len() < 2 {
        return Err(CoreError::DegeneratePath);
    }
    if let Some(&bad) = path.iter().find(|&&i| i >= nodes.len()) {
        return Err(CoreError::domain("path", format!("node {bad} out of range")));
    }
    let mut distance_km = 0.0;
    let mut success_prob = 1.0;
    for w in path.windows(2) {
        let (a, b) = (&nodes[w[0]], &nodes[w[1]]);
        distance_km += (b.position - a.position).norm();
        success_prob *= 1.0 - link_failure_prob(LinkClass::between(a.group, b.group), model);
    }
    let hops = path.len() - 1;
    Ok(PathMetrics {
        hops,
        distance_km,
        success_prob,
        delay: distance_km / model.unit_distance_km + hops as f64 * model.transmission_delay(),
    })
}

/// Closed-form average age of a path: `sigma / (2 p) + T`.
pub fn path_average_aoi(metrics: &PathMetrics, sigma: f64) -> Result<f64> {
    if !(metrics.success_prob > 0.0) {
        return Err(CoreError::ZeroSuccessProbability);
    }
    Ok(sigma / (2.0 * metrics.success_prob) + metrics.delay)
}

const MAX_PATH: usize = 6;

#[derive(Debug, Clone, Copy)]
struct Label {
    success_prob: f64,
    delay: f64,
    path: [u32; MAX_PATH],
    len: u8,
}

impl Label {
    fn nodes(&self) -> impl Iterator<Item = usize> + '_ {
        self.path[..self.len as usize].iter().map(|&i| i as usize)
    }
}

/// Clearly better in one criterion and no worse in the other. Near-ties are
/// kept so the final choice is made on forward-accumulated values.
fn label_dominates(a: &Label, b: &Label) -> bool {
    const REL: f64 = 1e-9;
    let p_ge = a.success_prob >= b.success_prob * (1.0 - REL);
    let t_le = a.delay <= b.delay + REL * b.delay.abs();
    let p_gt = a.success_prob > b.success_prob * (1.0 + REL);
    let t_lt = a.delay < b.delay - REL * b.delay.abs();
    p_ge && t_le && (p_gt || t_lt)
}

fn insert_label(set: &mut Vec<Label>, cand: Label) {
    if set.iter().any(|l| label_dominates(l, &cand)) {
        return;
    }
    set.retain(|l| !label_dominates(&cand, l));
    set.push(cand);
}

/// Best achievable (delivery probability, delay) trade-offs from every node
/// to any ground station. The average-age objective is increasing in delay
/// and decreasing in probability, so the optimum is always among these.
#[derive(Debug, Clone)]
pub struct PathLabels {
    labels: Vec<Vec<Label>>,
}

impl PathLabels {
    pub fn compute(graph: &RelayGraph, model: &LinkModel) -> Self {
        let n = graph.nodes.len();
        let t_tran = model.transmission_delay();
        let fail = [
            link_failure_prob(LinkClass::LunarEarth, model),
            link_failure_prob(LinkClass::Other, model),
        ];
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&i| std::cmp::Reverse(graph.nodes[i].group));
        let mut labels: Vec<Vec<Label>> = vec![Vec::new(); n];
        for &v in &order {
            let node = &graph.nodes[v];
            if node.group == Group::Egs {
                let mut path = [0u32; MAX_PATH];
                path[0] = v as u32;
                labels[v].push(Label {
                    success_prob: 1.0,
                    delay: 0.0,
                    path,
                    len: 1,
                });
                continue;
            }
            let mut set = Vec::new();
            for &w in &graph.successors[v] {
                let next = &graph.nodes[w];
                let pj = match LinkClass::between(node.group, next.group) {
                    LinkClass::LunarEarth => fail[0],
                    LinkClass::Other => fail[1],
                };
                let hop = (next.position - node.position).norm() / model.unit_distance_km + t_tran;
                for l in &labels[w] {
                    if l.len as usize >= MAX_PATH {
                        continue;
                    }
                    let mut path = [0u32; MAX_PATH];
                    path[0] = v as u32;
                    path[1..=l.len as usize].copy_from_slice(&l.path[..l.len as usize]);
                    insert_label(
                        &mut set,
                        Label {
                            success_prob: (1.0 - pj) * l.success_prob,
                            delay: hop + l.delay,
                            path,
                            len: l.len + 1,
                        },
                    );
                }
            }
            labels[v] = set;
        }
        PathLabels { labels }
    }

    /// Lowest-age path from `source`, re-evaluated hop by hop from the source.
    pub fn best_from(&self, graph: &RelayGraph, source: usize, model: &LinkModel) -> Option<BestPath> {
        let mut best: Option<BestPath> = None;
        for l in &self.labels[source] {
            let path: Vec<usize> = l.nodes().collect();
            let Ok(metrics) = path_metrics(&graph.nodes, &path, model) else {
                continue;
            };
            let Ok(aoi) = path_average_aoi(&metrics, model.sigma) else {
                continue;
            };
            if best.as_ref().map_or(true, |b| aoi < b.aoi) {
                best = Some(BestPath { path, metrics, aoi });
            }
        }
        best
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BestPath {
    pub path: Vec<usize>,
    pub metrics: PathMetrics,
    pub aoi: f64,
}

pub fn best_path(graph: &RelayGraph, source: usize, model: &LinkModel) -> Option<BestPath> {
    PathLabels::compute(graph, model).best_from(graph, source, model)
}

/// Minimum average age over all paths from `source` to a ground station, or
/// the unreachable sentinel.
pub fn best_path_aoi(graph: &RelayGraph, source: usize, model: &LinkModel) -> f64 {
    best_path(graph, source, model).map_or(UNREACHABLE_AOI, |b| b.aoi)
}

/// Mean over graphs and their source nodes of the best-path age.
pub fn average_per_device_aoi(graphs: &[RelayGraph], model: &LinkModel) -> Result<f64> {
    let mut sum = 0.0;
    let mut count = 0usize;
    for g in graphs {
        let labels = PathLabels::compute(g, model);
        for (i, node) in g.nodes.iter().enumerate() {
            if node.group == Group::Source {
                sum += labels.best_from(g, i, model).map_or(UNREACHABLE_AOI, |b| b.aoi);
                count += 1;
            }
        }
    }
    if count == 0 {
        return Err(CoreError::domain("average AoI", "no source nodes in any snapshot"));
    }
    Ok(sum / count as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationResult {
    /// Mean of the age sampled at slot boundaries.
    pub sampled_mean: f64,
    /// Time average of the continuous-time sawtooth (sampled mean plus half a
    /// slot).
    pub integrated_mean: f64,
    pub slots: u64,
}

/// Slot-level age simulation of one path.
///
/// An update is generated every `sigma` slots and delivered `round(delay)`
/// slots later with probability `success_prob`; on delivery the age drops to
/// the delay, otherwise it grows by one per slot. The horizon is rounded up to
/// a whole number of generation periods, and the age at slot 0 is that of a
/// loss-free steady state.
pub fn simulate_aoi_discrete(
    success_prob: f64,
    delay: f64,
    sigma: u32,
    n_slots: u64,
    seed: u64,
) -> Result<SimulationResult> {
    if !(success_prob > 0.0 && success_prob <= 1.0) {
        return Err(CoreError::domain(
            "success probability",
            format!("{success_prob} outside (0, 1]"),
        ));
    }
    if sigma == 0 || n_slots == 0 {
        return Err(CoreError::domain("simulation", "sigma and slot count must be positive"));
    }
    if !(delay >= 0.0 && delay.is_finite()) {
        return Err(CoreError::domain("delay", format!("{delay} must be non-negative")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sigma = sigma as i64;
    let d = delay.round() as i64;
    let slots = (n_slots as i64 + sigma - 1) / sigma * sigma;
    let mut age = d + (-d).rem_euclid(sigma);
    let mut sum: u128 = 0;
    for t in 0..slots {
        let generated = t - d;
        if t > 0 && generated.rem_euclid(sigma) == 0 {
            if success_prob >= 1.0 || rng.gen::<f64>() < success_prob {
                age = d;
            } else {
                age += 1;
            }
        } else if t > 0 {
            age += 1;
        }
        sum += age as u128;
    }
    let sampled_mean = sum as f64 / slots as f64;
    Ok(SimulationResult {
        sampled_mean,
        integrated_mean: sampled_mean + 0.5,
        slots: slots as u64,
    })
}

/// Exact long-run mean age for geometric losses: `sigma (2 - p) / (2 p) + T`.
pub fn renewal_average_aoi(success_prob: f64, sigma: f64, delay: f64) -> f64 {
    sigma * (2.0 - success_prob) / (2.0 * success_prob) + delay
}
