//! Load-aware shortest-path routing and load aggregation.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::topology::{EdgeId, NodeId, NodeKind, Snapshot};
use crate::traffic::Flow;

/// Residual capacity (Mbps) at or below which a link is unusable.
pub const RESIDUAL_EPSILON: f64 = 1e-9;

/// Default delay weighting per millisecond.
pub const DEFAULT_DELTA: f64 = 1e-4;

/// Residual capacity enters the link weight in Gbps.
const MBPS_PER_WEIGHT_UNIT: f64 = 1_000.0;

#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    pub nodes: Vec<NodeId>,
    pub edges: Vec<EdgeId>,
}

impl Path {
    pub fn hops(&self) -> usize {
        self.edges.len()
    }

    pub fn contains(&self, n: NodeId) -> bool {
        self.nodes.contains(&n)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoutedFlow {
    pub flow: Flow,
    /// `None` when no usable path exists.
    pub path: Option<Arc<Path>>,
}

impl RoutedFlow {
    pub fn is_served(&self) -> bool {
        self.path.is_some()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadState {
    pub node_load: Vec<f64>,
    pub edge_load: Vec<f64>,
}

impl LoadState {
    pub fn zeros(nodes: usize, edges: usize) -> Self {
        Self {
            node_load: vec![0.0; nodes],
            edge_load: vec![0.0; edges],
        }
    }

    pub fn for_snapshot(snapshot: &Snapshot) -> Self {
        Self::zeros(snapshot.nodes.len(), snapshot.edges.len())
    }

    pub(crate) fn add_path(&mut self, path: &Path, demand: f64) {
        for &n in &path.nodes {
            self.node_load[n] += demand;
        }
        for &e in &path.edges {
            self.edge_load[e] += demand;
        }
    }

    pub(crate) fn remove_path(&mut self, path: &Path, demand: f64) {
        for &n in &path.nodes {
            self.node_load[n] = (self.node_load[n] - demand).max(0.0);
        }
        for &e in &path.edges {
            self.edge_load[e] = (self.edge_load[e] - demand).max(0.0);
        }
    }
}

/// Working view of a snapshot for routing: which nodes are up and the effective
/// capacity of each edge.
#[derive(Debug, Clone, Copy)]
pub struct GraphView<'a> {
    pub snapshot: &'a Snapshot,
    pub node_up: &'a [bool],
    pub edge_capacity: &'a [f64],
}

impl<'a> GraphView<'a> {
    pub fn new(snapshot: &'a Snapshot, node_up: &'a [bool], edge_capacity: &'a [f64]) -> Self {
        Self {
            snapshot,
            node_up,
            edge_capacity,
        }
    }
}

/// Which neighbour kinds a path may continue into from a node of kind `from`.
///
/// Paths run user, user beam, satellite, (satellites), feeder beam, gateway. Users and
/// gateways are endpoints only and user beams are entered only from users.
fn may_step(from: NodeKind, to: NodeKind, is_source: bool) -> bool {
    use NodeKind::*;
    match from {
        User => is_source && to == UserBeam,
        UserBeam => to == Satellite,
        Satellite => matches!(to, Satellite | FeederBeam),
        FeederBeam => matches!(to, Gateway | Satellite),
        Gateway => false,
    }
}

#[derive(Clone, Copy, PartialEq)]
struct Entry {
    cost: f64,
    node: NodeId,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .cost
            .total_cmp(&self.cost)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Dijkstra with scratch buffers reused across queries.
#[derive(Debug, Default)]
pub struct Router {
    dist: Vec<f64>,
    prev: Vec<(NodeId, EdgeId)>,
    stamp: Vec<u32>,
    settled: Vec<u32>,
    epoch: u32,
    heap: BinaryHeap<Entry>,
}

impl std::fmt::Debug for Entry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {})", self.node, self.cost)
    }
}

/// Where a flow may terminate.
#[derive(Debug, Clone, Copy)]
pub enum Destination {
    Gateway(NodeId),
    /// Any gateway that is up.
    AnyGateway,
}

impl Router {
    pub fn new() -> Self {
        Self::default()
    }

    fn reset(&mut self, n: usize) {
        if self.dist.len() < n {
            self.dist.resize(n, f64::INFINITY);
            self.prev.resize(n, (usize::MAX, usize::MAX));
            self.stamp.resize(n, 0);
            self.settled.resize(n, 0);
        }
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.stamp.iter_mut().for_each(|s| *s = 0);
            self.settled.iter_mut().for_each(|s| *s = 0);
            self.epoch = 1;
        }
        self.heap.clear();
    }

    /// Minimum-weight path from `source` to the destination under weights
    /// `1/(capacity - load) + delta * delay`, with the residual in Gbps. Links with residual at or below
    /// [`RESIDUAL_EPSILON`] and nodes that are down are skipped.
    pub fn shortest_path(
        &mut self,
        view: &GraphView<'_>,
        loads: &LoadState,
        source: NodeId,
        dest: Destination,
        delta: f64,
    ) -> Option<Path> {
        let snap = view.snapshot;
        self.reset(snap.len());
        if !view.node_up[source] {
            return None;
        }
        let is_target = |n: NodeId| match dest {
            Destination::Gateway(g) => n == g,
            Destination::AnyGateway => snap.kind(n) == NodeKind::Gateway,
        };
        let epoch = self.epoch;
        self.dist[source] = 0.0;
        self.stamp[source] = epoch;
        self.heap.push(Entry { cost: 0.0, node: source });
        let mut found = None;
        while let Some(Entry { cost, node }) = self.heap.pop() {
            if self.settled[node] == epoch {
                continue;
            }
            self.settled[node] = epoch;
            if node != source && is_target(node) {
                found = Some(node);
                break;
            }
            let from_kind = snap.kind(node);
            for &(m, e) in snap.neighbors(node) {
                if self.settled[m] == epoch || !view.node_up[m] {
                    continue;
                }
                let to_kind = snap.kind(m);
                if !may_step(from_kind, to_kind, node == source) {
                    continue;
                }
                if to_kind == NodeKind::Gateway && !is_target(m) {
                    continue;
                }
                let residual = view.edge_capacity[e] - loads.edge_load[e];
                if residual <= RESIDUAL_EPSILON {
                    continue;
                }
                let next = cost + MBPS_PER_WEIGHT_UNIT / residual + delta * snap.edges[e].delay_ms;
                if self.stamp[m] != epoch || next < self.dist[m] {
                    self.stamp[m] = epoch;
                    self.dist[m] = next;
                    self.prev[m] = (node, e);
                    self.heap.push(Entry { cost: next, node: m });
                }
            }
        }
        let target = found?;
        let mut nodes = vec![target];
        let mut edges = Vec::new();
        let mut cur = target;
        while cur != source {
            let (p, e) = self.prev[cur];
            nodes.push(p);
            edges.push(e);
            cur = p;
        }
        nodes.reverse();
        edges.reverse();
        Some(Path { nodes, edges })
    }

    pub fn route_flow(
        &mut self,
        view: &GraphView<'_>,
        flow: &Flow,
        loads: &LoadState,
        delta: f64,
    ) -> RoutedFlow {
        let path = self.shortest_path(view, loads, flow.user, Destination::Gateway(flow.gateway), delta);
        RoutedFlow {
            flow: *flow,
            path: path.map(Arc::new),
        }
    }
}

/// Deterministic filling order: descending demand, then ascending flow id.
pub fn filling_order(flows: &[Flow]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..flows.len()).collect();
    order.sort_by(|&a, &b| {
        flows[b]
            .demand
            .total_cmp(&flows[a].demand)
            .then(flows[a].id.cmp(&flows[b].id))
    });
    order
}

/// Effective edge capacities of the intact snapshot.
pub fn nominal_edge_capacity(snapshot: &Snapshot) -> Vec<f64> {
    snapshot.edges.iter().map(|e| e.capacity).collect()
}

/// Routes every flow in filling order, each seeing the load placed by earlier flows.
/// The returned list is in flow-id order.
pub fn route_all(view: &GraphView<'_>, flows: &[Flow], delta: f64) -> (Vec<RoutedFlow>, LoadState) {
    let mut loads = LoadState::for_snapshot(view.snapshot);
    let mut router = Router::new();
    let mut routed: Vec<Option<RoutedFlow>> = vec![None; flows.len()];
    for i in filling_order(flows) {
        let r = router.route_flow(view, &flows[i], &loads, delta);
        if let Some(p) = &r.path {
            loads.add_path(p, r.flow.demand);
        }
        routed[i] = Some(r);
    }
    let mut out: Vec<RoutedFlow> = routed.into_iter().map(|r| r.expect("every flow routed")).collect();
    out.sort_by_key(|r| r.flow.id);
    (out, loads)
}

/// Loads when every flow follows its shortest path in the unloaded network, regardless
/// of what other flows already use.
pub fn projected_loads(view: &GraphView<'_>, flows: &[Flow], delta: f64) -> LoadState {
    let empty = LoadState::for_snapshot(view.snapshot);
    let mut loads = LoadState::for_snapshot(view.snapshot);
    let mut router = Router::new();
    for f in flows {
        if let Some(p) = router.shortest_path(view, &empty, f.user, Destination::Gateway(f.gateway), delta) {
            loads.add_path(&p, f.demand);
        }
    }
    loads
}

/// Sums demands over the nodes and edges of every served path.
pub fn accumulate_loads(snapshot: &Snapshot, routed: &[RoutedFlow]) -> Result<LoadState> {
    let mut loads = LoadState::for_snapshot(snapshot);
    for r in routed {
        let Some(p) = &r.path else { continue };
        if p.nodes.iter().any(|&n| n >= snapshot.len()) || p.edges.iter().any(|&e| e >= snapshot.edges.len()) {
            return Err(Error::Integrity(format!("flow {} has a path outside the snapshot", r.flow.id)));
        }
        loads.add_path(p, r.flow.demand);
    }
    Ok(loads)
}

/// Total demand of flows without a path.
pub fn unserved_demand(routed: &[RoutedFlow]) -> f64 {
    routed.iter().filter(|r| !r.is_served()).map(|r| r.flow.demand).sum()
}

/// Edge capacity scaled by the weaker of its endpoints' degradation factors.
pub fn degraded_edge_capacity(snapshot: &Snapshot, factor: &[f64]) -> Vec<f64> {
    snapshot
        .edges
        .iter()
        .map(|e| e.capacity * factor[e.src].min(factor[e.dst]))
        .collect()
}
