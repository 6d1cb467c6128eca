//! Per-timestep multi-layer snapshot: satellites, beams, gateways, users and typed links.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::ground::GroundSegment;
use crate::orbital::{
    bearing_deg, elevation_from_ecef, line_of_sight_with_margin, propagation_delay, EcefPosition,
    GeodeticPosition, DEFAULT_GRAZING_MARGIN_KM, SPEED_OF_LIGHT_KM_S,
};
use crate::time::EpochTime;

pub type NodeId = usize;
pub type EdgeId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NodeKind {
    Satellite,
    UserBeam,
    FeederBeam,
    Gateway,
    User,
}

impl NodeKind {
    pub const ALL: [NodeKind; 5] = [
        NodeKind::Satellite,
        NodeKind::UserBeam,
        NodeKind::FeederBeam,
        NodeKind::Gateway,
        NodeKind::User,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            NodeKind::Satellite => "satellite",
            NodeKind::UserBeam => "userbeam",
            NodeKind::FeederBeam => "feederbeam",
            NodeKind::Gateway => "gateway",
            NodeKind::User => "user",
        }
    }

    pub fn is_beam(self) -> bool {
        matches!(self, NodeKind::UserBeam | NodeKind::FeederBeam)
    }

    /// Users are demand endpoints and never take part in risk ranking.
    pub fn is_risk_eligible(self) -> bool {
        self != NodeKind::User
    }
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UserProfile {
    pub pop_weight: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: NodeId,
    pub label: String,
    pub kind: NodeKind,
    pub position: EcefPosition,
    /// Ground position for ground nodes, sub-satellite point for space nodes.
    pub geodetic: Option<GeodeticPosition>,
    /// Effective service capacity in Mbps. Infinite for users.
    pub capacity: f64,
    pub hardware_cap: Option<f64>,
    /// Parent satellite of a beam.
    pub parent: Option<NodeId>,
    pub profile: Option<UserProfile>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EdgeKind {
    Isl,
    Feeder,
    Access,
    Internal,
}

impl EdgeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EdgeKind::Isl => "isl",
            EdgeKind::Feeder => "feeder",
            EdgeKind::Access => "access",
            EdgeKind::Internal => "internal",
        }
    }

    fn joins(self, a: NodeKind, b: NodeKind) -> bool {
        use NodeKind::*;
        let pair = |x, y| (a == x && b == y) || (a == y && b == x);
        match self {
            EdgeKind::Isl => pair(Satellite, Satellite),
            EdgeKind::Feeder => pair(FeederBeam, Gateway),
            EdgeKind::Access => pair(UserBeam, User),
            EdgeKind::Internal => pair(UserBeam, Satellite) || pair(FeederBeam, Satellite),
        }
    }
}

impl fmt::Display for EdgeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Undirected link between two nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub src: NodeId,
    pub dst: NodeId,
    pub kind: EdgeKind,
    pub capacity: f64,
    pub delay_ms: f64,
    pub length_km: f64,
}

impl Edge {
    pub fn other(&self, n: NodeId) -> NodeId {
        if self.src == n {
            self.dst
        } else {
            self.src
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TopologyConfig {
    pub isl_max_km: f64,
    pub ground_max_km: f64,
    pub isl_k_max: usize,
    pub min_elevation_deg: f64,
    pub grazing_margin_km: f64,
    pub beams_per_sat: usize,
    pub user_top_k: usize,
    pub gateway_top_k: usize,
    /// Neighbourhood expansion depth; 0 disables expansion.
    pub expand_hops: usize,
    /// Count feeder beams against the per-satellite beam budget.
    pub merge_feeder_beams: bool,
}

impl Default for TopologyConfig {
    fn default() -> Self {
        Self {
            isl_max_km: 5_000.0,
            ground_max_km: 2_500.0,
            isl_k_max: 4,
            min_elevation_deg: 25.0,
            grazing_margin_km: DEFAULT_GRAZING_MARGIN_KM,
            beams_per_sat: 12,
            user_top_k: 3,
            gateway_top_k: 3,
            expand_hops: 2,
            merge_feeder_beams: false,
        }
    }
}

/// Capacities in Mbps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacityConfig {
    pub isl: f64,
    pub feeder_link: f64,
    pub access_link: f64,
    pub user_beam: f64,
    pub feeder_beam: f64,
    pub gateway: f64,
    pub satellite_hw: f64,
}

impl Default for CapacityConfig {
    fn default() -> Self {
        Self {
            isl: 40_000.0,
            feeder_link: 20_000.0,
            access_link: 2_000.0,
            user_beam: 2_000.0,
            feeder_beam: 2_000.0,
            gateway: 50_000.0,
            satellite_hw: 200_000.0,
        }
    }
}

impl CapacityConfig {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("capacity.isl_mbps", self.isl),
            ("capacity.feeder_link_mbps", self.feeder_link),
            ("capacity.access_link_mbps", self.access_link),
            ("capacity.user_beam_mbps", self.user_beam),
            ("capacity.feeder_beam_mbps", self.feeder_beam),
            ("capacity.gateway_mbps", self.gateway),
            ("capacity.satellite_hw_mbps", self.satellite_hw),
        ];
        for (key, v) in fields {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::config(key, format!("must be positive and finite, got {v}")));
            }
        }
        Ok(())
    }
}

/// Immutable multi-layer graph at one instant, with a compressed adjacency index.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub time: EpochTime,
    pub nodes: Vec<Node>,
    pub edges: Vec<Edge>,
    offsets: Vec<usize>,
    adjacency: Vec<(NodeId, EdgeId)>,
}

impl Snapshot {
    /// Assembles a snapshot and checks its structural invariants.
    pub fn new(time: EpochTime, nodes: Vec<Node>, edges: Vec<Edge>) -> Result<Self> {
        let n = nodes.len();
        let mut degree = vec![0usize; n + 1];
        for e in &edges {
            if e.src >= n || e.dst >= n {
                return Err(Error::Integrity(format!(
                    "edge {}-{} references a missing node",
                    e.src, e.dst
                )));
            }
            degree[e.src] += 1;
            degree[e.dst] += 1;
        }
        let mut offsets = vec![0usize; n + 1];
        for i in 0..n {
            offsets[i + 1] = offsets[i] + degree[i];
        }
        let mut fill = offsets.clone();
        let mut adjacency = vec![(0, 0); offsets[n]];
        for (id, e) in edges.iter().enumerate() {
            adjacency[fill[e.src]] = (e.dst, id);
            fill[e.src] += 1;
            adjacency[fill[e.dst]] = (e.src, id);
            fill[e.dst] += 1;
        }
        let snapshot = Snapshot {
            time,
            nodes,
            edges,
            offsets,
            adjacency,
        };
        snapshot.validate()?;
        Ok(snapshot)
    }

    pub fn empty(time: EpochTime) -> Self {
        Snapshot {
            time,
            nodes: Vec::new(),
            edges: Vec::new(),
            offsets: vec![0],
            adjacency: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `(neighbour, edge)` pairs incident to `n`.
    pub fn neighbors(&self, n: NodeId) -> &[(NodeId, EdgeId)] {
        &self.adjacency[self.offsets[n]..self.offsets[n + 1]]
    }

    pub fn kind(&self, n: NodeId) -> NodeKind {
        self.nodes[n].kind
    }

    pub fn nodes_of(&self, kind: NodeKind) -> impl Iterator<Item = &Node> + '_ {
        self.nodes.iter().filter(move |n| n.kind == kind)
    }

    pub fn count(&self, kind: NodeKind) -> usize {
        self.nodes_of(kind).count()
    }

    pub fn risk_node_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.kind.is_risk_eligible()).count()
    }

    /// Number of incident links other than beam-satellite bookkeeping links.
    pub fn physical_degree(&self, n: NodeId) -> usize {
        self.neighbors(n)
            .iter()
            .filter(|&&(_, e)| self.edges[e].kind != EdgeKind::Internal)
            .count()
    }

    /// Beams hanging off satellite `sat`.
    pub fn children(&self, sat: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.neighbors(sat)
            .iter()
            .filter(move |&&(m, e)| {
                self.edges[e].kind == EdgeKind::Internal && self.nodes[m].parent == Some(sat)
            })
            .map(|&(m, _)| m)
    }

    pub fn find(&self, label: &str) -> Option<NodeId> {
        self.nodes.iter().position(|n| n.label == label)
    }

    pub fn isl_degree(&self, n: NodeId) -> usize {
        self.neighbors(n)
            .iter()
            .filter(|&&(_, e)| self.edges[e].kind == EdgeKind::Isl)
            .count()
    }

    /// Structural checks: typed endpoints, no loops or parallel links, beam parents.
    pub fn validate(&self) -> Result<()> {
        let mut seen = HashSet::with_capacity(self.edges.len());
        for (i, node) in self.nodes.iter().enumerate() {
            if node.id != i {
                return Err(Error::Integrity(format!("node {} stored at index {i}", node.id)));
            }
            if node.kind.is_beam() {
                match node.parent {
                    Some(p) if p < self.nodes.len() && self.nodes[p].kind == NodeKind::Satellite => {}
                    _ => {
                        return Err(Error::Integrity(format!(
                            "beam {} has no parent satellite",
                            node.label
                        )))
                    }
                }
            }
            if node.kind != NodeKind::User && node.kind != NodeKind::Satellite && !(node.capacity > 0.0) {
                return Err(Error::Integrity(format!("node {} has no capacity", node.label)));
            }
        }
        for e in &self.edges {
            let (a, b) = (self.nodes[e.src].kind, self.nodes[e.dst].kind);
            if e.src == e.dst {
                return Err(Error::Integrity(format!("self loop on node {}", e.src)));
            }
            if !e.kind.joins(a, b) {
                return Err(Error::Integrity(format!("{} edge cannot join {a} and {b}", e.kind)));
            }
            if e.kind == EdgeKind::Internal {
                let (beam, sat) = if a.is_beam() { (e.src, e.dst) } else { (e.dst, e.src) };
                if self.nodes[beam].parent != Some(sat) || e.delay_ms != 0.0 {
                    return Err(Error::Integrity(format!(
                        "internal edge {}-{} does not join a beam to its parent",
                        e.src, e.dst
                    )));
                }
            }
            if !(e.capacity > 0.0) {
                return Err(Error::Integrity(format!("edge {}-{} has no capacity", e.src, e.dst)));
            }
            let key = (e.src.min(e.dst), e.src.max(e.dst), e.kind);
            if !seen.insert(key) {
                return Err(Error::Integrity(format!("parallel {} edges {}-{}", e.kind, e.src, e.dst)));
            }
        }
        Ok(())
    }
}

fn rank_by_elevation(a: &(f64, f64, usize), b: &(f64, f64, usize)) -> Ordering {
    b.0.total_cmp(&a.0)
        .then(a.1.total_cmp(&b.1))
        .then(a.2.cmp(&b.2))
}

/// Top-`k` satellites visible from `ground`, ranked by elevation then distance then index.
pub fn top_visible(
    ground: &EcefPosition,
    sats: &[EcefPosition],
    k: usize,
    cfg: &TopologyConfig,
) -> Vec<usize> {
    let mut candidates: Vec<(f64, f64, usize)> = sats
        .iter()
        .enumerate()
        .filter_map(|(i, s)| {
            let d = ground.distance_to(s);
            if d > cfg.ground_max_km {
                return None;
            }
            let el = elevation_from_ecef(ground, s);
            (el >= cfg.min_elevation_deg).then_some((el, d, i))
        })
        .collect();
    candidates.sort_by(rank_by_elevation);
    candidates.truncate(k);
    candidates.into_iter().map(|c| c.2).collect()
}

/// Satellites visible from `ground`, nearest first.
fn nearest_visible(ground: &EcefPosition, sats: &[EcefPosition], cfg: &TopologyConfig) -> Vec<usize> {
    let mut candidates: Vec<(f64, usize)> = sats
        .iter()
        .enumerate()
        .filter_map(|(i, s)| {
            let d = ground.distance_to(s);
            (d <= cfg.ground_max_km && elevation_from_ecef(ground, s) >= cfg.min_elevation_deg)
                .then_some((d, i))
        })
        .collect();
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    candidates.into_iter().map(|c| c.1).collect()
}

/// The `k` nearest satellites to `from` (excluding itself) within ISL range and line of sight.
fn isl_neighbors(from: usize, sats: &[EcefPosition], k: usize, cfg: &TopologyConfig) -> Vec<(f64, usize)> {
    let p = &sats[from];
    let mut candidates: Vec<(f64, usize)> = sats
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != from)
        .filter_map(|(j, q)| {
            let d = p.distance_to(q);
            (d <= cfg.isl_max_km && line_of_sight_with_margin(p, q, cfg.grazing_margin_km)).then_some((d, j))
        })
        .collect();
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    candidates.truncate(k);
    candidates
}

/// Active satellite selection over constellation indices; result is sorted ascending.
pub fn select_active_satellites(
    sats: &[EcefPosition],
    users: &[EcefPosition],
    gateways: &[EcefPosition],
    cfg: &TopologyConfig,
) -> Vec<usize> {
    let mut active = BTreeSet::new();
    for u in users {
        active.extend(top_visible(u, sats, cfg.user_top_k, cfg));
    }
    for g in gateways {
        active.extend(nearest_visible(g, sats, cfg).into_iter().take(cfg.gateway_top_k));
    }
    let mut frontier: Vec<usize> = active.iter().copied().collect();
    for _ in 0..cfg.expand_hops {
        let mut next = Vec::new();
        for &s in &frontier {
            for (_, j) in isl_neighbors(s, sats, cfg.isl_k_max, cfg) {
                if active.insert(j) {
                    next.push(j);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    active.into_iter().collect()
}

/// ISL edges among `active` (indices into `sats`) under greedy shortest-first mutual capping.
pub fn build_isl_mesh(active: &[usize], sats: &[EcefPosition], cfg: &TopologyConfig) -> Vec<(usize, usize, f64)> {
    let subset: Vec<EcefPosition> = active.iter().map(|&i| sats[i]).collect();
    let mut proposals = BTreeSet::new();
    for i in 0..subset.len() {
        for (_, j) in isl_neighbors(i, &subset, cfg.isl_k_max, cfg) {
            proposals.insert((i.min(j), i.max(j)));
        }
    }
    let mut ranked: Vec<(f64, usize, usize)> = proposals
        .into_iter()
        .map(|(i, j)| (subset[i].distance_to(&subset[j]), i, j))
        .collect();
    ranked.sort_by(|a, b| a.0.total_cmp(&b.0).then((a.1, a.2).cmp(&(b.1, b.2))));
    let mut degree = vec![0usize; subset.len()];
    let mut out = Vec::new();
    for (d, i, j) in ranked {
        if degree[i] < cfg.isl_k_max && degree[j] < cfg.isl_k_max {
            degree[i] += 1;
            degree[j] += 1;
            out.push((active[i], active[j], d));
        }
    }
    out
}

/// Azimuth sector of `target` as seen from the sub-satellite point, sector 0 starting at north.
pub fn beam_sector(subsat: &GeodeticPosition, target: &GeodeticPosition, sectors: usize) -> usize {
    if sectors == 0 {
        return 0;
    }
    let width = 360.0 / sectors as f64;
    ((bearing_deg(subsat, target) / width).floor() as usize).min(sectors - 1)
}

/// Per-satellite beams and the feeder assignments they imply.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamPlan {
    pub satellite: usize,
    pub user_beams: usize,
    /// Gateway indices this satellite runs a feeder beam to.
    pub feeder_gateways: Vec<usize>,
}

pub fn instantiate_beams(
    active: &[usize],
    sats: &[EcefPosition],
    gateways: &[EcefPosition],
    cfg: &TopologyConfig,
) -> Vec<BeamPlan> {
    active
        .iter()
        .map(|&s| {
            let feeder_gateways: Vec<usize> = gateways
                .iter()
                .enumerate()
                .filter(|(_, g)| {
                    g.distance_to(&sats[s]) <= cfg.ground_max_km
                        && elevation_from_ecef(g, &sats[s]) >= cfg.min_elevation_deg
                })
                .map(|(i, _)| i)
                .collect();
            let user_beams = if cfg.merge_feeder_beams {
                cfg.beams_per_sat.saturating_sub(feeder_gateways.len())
            } else {
                cfg.beams_per_sat
            };
            BeamPlan {
                satellite: s,
                user_beams,
                feeder_gateways,
            }
        })
        .collect()
}

/// Constellation-side input to [`build_snapshot`].
#[derive(Debug, Clone, Copy)]
pub struct SpaceSegment<'a> {
    /// Earth-fixed satellite positions; the index is the constellation slot.
    pub positions: &'a [EcefPosition],
}

pub fn build_snapshot(
    t: EpochTime,
    space: SpaceSegment<'_>,
    ground: &GroundSegment,
    cfg: &TopologyConfig,
    caps: &CapacityConfig,
) -> Result<Snapshot> {
    let sats = space.positions;
    let user_ecef: Vec<EcefPosition> = ground.users.iter().map(|u| u.position.to_ecef()).collect();
    let gw_ecef: Vec<EcefPosition> = ground.gateways.iter().map(|g| g.position.to_ecef()).collect();
    if user_ecef.is_empty() && gw_ecef.is_empty() {
        return Ok(Snapshot::empty(t));
    }

    let active = select_active_satellites(sats, &user_ecef, &gw_ecef, cfg);
    let plans = instantiate_beams(&active, sats, &gw_ecef, cfg);

    let mut nodes = Vec::new();
    let mut edges = Vec::new();
    let mut sat_node = vec![usize::MAX; sats.len()];
    let subsat: Vec<GeodeticPosition> = active.iter().map(|&s| GeodeticPosition::from_ecef(&sats[s])).collect();
    for (k, &s) in active.iter().enumerate() {
        sat_node[s] = nodes.len();
        nodes.push(Node {
            id: nodes.len(),
            label: format!("sat-{s:04}"),
            kind: NodeKind::Satellite,
            position: sats[s],
            geodetic: Some(subsat[k]),
            capacity: 0.0,
            hardware_cap: Some(caps.satellite_hw),
            parent: None,
            profile: None,
        });
    }

    // user_beam_base[k] is the node id of sector 0 on active satellite k.
    let mut user_beam_base = vec![0usize; active.len()];
    let mut feeder_links = Vec::new();
    for (k, plan) in plans.iter().enumerate() {
        let parent = sat_node[plan.satellite];
        user_beam_base[k] = nodes.len();
        for sector in 0..plan.user_beams {
            let id = nodes.len();
            nodes.push(Node {
                id,
                label: format!("ub-{:04}-{sector:02}", plan.satellite),
                kind: NodeKind::UserBeam,
                position: sats[plan.satellite],
                geodetic: Some(subsat[k]),
                capacity: caps.user_beam,
                hardware_cap: None,
                parent: Some(parent),
                profile: None,
            });
            edges.push(internal_edge(id, parent, caps.satellite_hw));
        }
        for &g in &plan.feeder_gateways {
            let id = nodes.len();
            nodes.push(Node {
                id,
                label: format!("fb-{:04}-{g:02}", plan.satellite),
                kind: NodeKind::FeederBeam,
                position: sats[plan.satellite],
                geodetic: Some(subsat[k]),
                capacity: caps.feeder_beam,
                hardware_cap: None,
                parent: Some(parent),
                profile: None,
            });
            edges.push(internal_edge(id, parent, caps.satellite_hw));
            feeder_links.push((id, g, gw_ecef[g].distance_to(&sats[plan.satellite])));
        }
    }

    let gw_base = nodes.len();
    for (g, site) in ground.gateways.iter().enumerate() {
        nodes.push(Node {
            id: nodes.len(),
            label: format!("gw-{g:02}"),
            kind: NodeKind::Gateway,
            position: gw_ecef[g],
            geodetic: Some(site.position),
            capacity: caps.gateway,
            hardware_cap: None,
            parent: None,
            profile: None,
        });
    }
    for (fb, g, d) in feeder_links {
        edges.push(Edge {
            src: fb,
            dst: gw_base + g,
            kind: EdgeKind::Feeder,
            capacity: caps.feeder_link,
            delay_ms: propagation_delay(d)?,
            length_km: d,
        });
    }

    for (i, j, d) in build_isl_mesh(&active, sats, cfg) {
        edges.push(Edge {
            src: sat_node[i],
            dst: sat_node[j],
            kind: EdgeKind::Isl,
            capacity: caps.isl,
            delay_ms: propagation_delay(d)?,
            length_km: d,
        });
    }

    let active_slot: Vec<usize> = {
        let mut slot = vec![usize::MAX; sats.len()];
        for (k, &s) in active.iter().enumerate() {
            slot[s] = k;
        }
        slot
    };
    for (u, site) in ground.users.iter().enumerate() {
        let id = nodes.len();
        nodes.push(Node {
            id,
            label: format!("user-{u:03}"),
            kind: NodeKind::User,
            position: user_ecef[u],
            geodetic: Some(site.position),
            capacity: f64::INFINITY,
            hardware_cap: None,
            parent: None,
            profile: Some(UserProfile {
                pop_weight: site.pop_weight,
                beta: site.beta,
            }),
        });
        for s in top_visible(&user_ecef[u], sats, cfg.user_top_k, cfg) {
            let k = active_slot[s];
            let beams = plans[k].user_beams;
            if beams == 0 {
                continue;
            }
            let beam = user_beam_base[k] + beam_sector(&subsat[k], &site.position, beams);
            let d = user_ecef[u].distance_to(&sats[s]);
            edges.push(Edge {
                src: id,
                dst: beam,
                kind: EdgeKind::Access,
                capacity: caps.access_link,
                delay_ms: propagation_delay(d)?,
                length_km: d,
            });
        }
    }

    let mut snapshot = Snapshot::new(t, nodes, edges)?;
    assign_capacities(&mut snapshot, caps);
    Ok(snapshot)
}

fn internal_edge(beam: NodeId, sat: NodeId, capacity: f64) -> Edge {
    Edge {
        src: beam,
        dst: sat,
        kind: EdgeKind::Internal,
        capacity,
        delay_ms: 0.0,
        length_km: 0.0,
    }
}

/// Fills node capacities from config. A satellite's effective capacity is the smaller of its
/// hardware limit and the summed capacity of its physical links, including those of its beams.
/// Isolated satellites end up with zero capacity.
pub fn assign_capacities(snapshot: &mut Snapshot, caps: &CapacityConfig) {
    for e in &mut snapshot.edges {
        e.capacity = match e.kind {
            EdgeKind::Isl => caps.isl,
            EdgeKind::Feeder => caps.feeder_link,
            EdgeKind::Access => caps.access_link,
            EdgeKind::Internal => caps.satellite_hw,
        };
    }
    let mut link_sum = vec![0.0f64; snapshot.nodes.len()];
    for e in &snapshot.edges {
        if e.kind == EdgeKind::Internal {
            continue;
        }
        for end in [e.src, e.dst] {
            let owner = match snapshot.nodes[end].kind {
                NodeKind::Satellite => Some(end),
                k if k.is_beam() => snapshot.nodes[end].parent,
                _ => None,
            };
            if let Some(s) = owner {
                link_sum[s] += e.capacity;
            }
        }
    }
    for node in &mut snapshot.nodes {
        node.capacity = match node.kind {
            NodeKind::Satellite => {
                let hw = *node.hardware_cap.get_or_insert(caps.satellite_hw);
                hw.min(link_sum[node.id])
            }
            NodeKind::UserBeam => caps.user_beam,
            NodeKind::FeederBeam => caps.feeder_beam,
            NodeKind::Gateway => caps.gateway,
            NodeKind::User => f64::INFINITY,
        };
    }
}

/// Shannon-Hartley limit in Mbps for a bandwidth in MHz.
pub fn shannon_capacity(bandwidth_mhz: f64, snr: f64) -> Result<f64> {
    if !(bandwidth_mhz > 0.0) || !(snr >= 0.0) {
        return Err(Error::Domain(format!(
            "bandwidth must be positive and SNR non-negative (got {bandwidth_mhz} MHz, {snr})"
        )));
    }
    Ok(bandwidth_mhz * (1.0 + snr).log2())
}

/// Linear SNR of a free-space link.
pub fn link_snr(
    tx_power_w: f64,
    gain_tx: f64,
    gain_rx: f64,
    noise_density_w_hz: f64,
    bandwidth_hz: f64,
    distance_km: f64,
    frequency_ghz: f64,
) -> Result<f64> {
    let inputs = [tx_power_w, gain_tx, gain_rx, noise_density_w_hz, bandwidth_hz, distance_km, frequency_ghz];
    if inputs.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::Domain("link budget inputs must be positive and finite".into()));
    }
    let wavelength_km = SPEED_OF_LIGHT_KM_S / (frequency_ghz * 1e9);
    let path_loss = (4.0 * std::f64::consts::PI * distance_km / wavelength_km).powi(2);
    Ok(tx_power_w * gain_tx * gain_rx / (noise_density_w_hz * bandwidth_hz * path_loss))
}
