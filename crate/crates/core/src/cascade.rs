//! Attack degradation and the iterative overload / reroute cascade.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::routing::{
    degraded_edge_capacity, filling_order, route_all, Destination, GraphView, LoadState, Path, Router,
    DEFAULT_DELTA,
};
use crate::topology::{NodeId, NodeKind, Snapshot};
use crate::traffic::Flow;

pub const DEFAULT_MAX_ITER: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CascadeConfig {
    pub delta: f64,
    pub max_iter: usize,
}

impl Default for CascadeConfig {
    fn default() -> Self {
        Self {
            delta: DEFAULT_DELTA,
            max_iter: DEFAULT_MAX_ITER,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttackScenario {
    /// Targeted nodes with their compromise level q in [0, 1].
    pub targets: Vec<(NodeId, f64)>,
    pub alpha: f64,
}

impl AttackScenario {
    pub fn none() -> Self {
        Self {
            targets: Vec::new(),
            alpha: 0.0,
        }
    }

    /// Every target fully compromised.
    pub fn uniform(targets: impl IntoIterator<Item = NodeId>, alpha: f64) -> Self {
        Self {
            targets: targets.into_iter().map(|n| (n, 1.0)).collect(),
            alpha,
        }
    }

    pub fn validate(&self, snapshot: &Snapshot) -> Result<()> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::Domain(format!("alpha {} outside [0, 1]", self.alpha)));
        }
        for &(n, q) in &self.targets {
            if n >= snapshot.len() {
                return Err(Error::Domain(format!("target {n} is not in the snapshot")));
            }
            if snapshot.kind(n) == NodeKind::User {
                return Err(Error::Domain(format!("target {} is a user terminal", snapshot.nodes[n].label)));
            }
            if !(0.0..=1.0).contains(&q) {
                return Err(Error::Domain(format!("compromise level {q} outside [0, 1]")));
            }
        }
        Ok(())
    }

    /// Per-node capacity multiplier `1 - alpha * q`.
    pub fn factors(&self, n: usize) -> Vec<f64> {
        let mut f = vec![1.0f64; n];
        for &(v, q) in &self.targets {
            f[v] = f[v].min(1.0 - self.alpha * q);
        }
        f
    }
}

/// Effective capacities after the attack: `(1 - alpha q) C` for targets.
pub fn degrade_capacities(capacities: &[f64], attack: &AttackScenario) -> Vec<f64> {
    let f = attack.factors(capacities.len());
    capacities.iter().zip(&f).map(|(c, k)| c * k).collect()
}

/// Nodes whose load strictly exceeds their effective capacity.
pub fn overload_check(node_load: &[f64], effective_caps: &[f64]) -> Vec<NodeId> {
    node_load
        .iter()
        .zip(effective_caps)
        .enumerate()
        .filter(|(_, (l, c))| **l > **c)
        .map(|(i, _)| i)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    FixedPoint,
    Disconnected,
    MaxIter,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Termination::FixedPoint => "fixed_point",
            Termination::Disconnected => "disconnected",
            Termination::MaxIter => "max_iter",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CascadeResult {
    /// Attack targets.
    pub initial: Vec<NodeId>,
    /// Nodes newly failed in each iteration, disjoint from each other and from `initial`.
    pub per_iteration: Vec<Vec<NodeId>>,
    /// `initial` plus every later failure, sorted.
    pub final_set: Vec<NodeId>,
    pub final_loads: LoadState,
    pub unserved_demand: f64,
    pub iterations: usize,
    pub termination: Termination,
}

impl CascadeResult {
    pub fn failed_count(&self) -> usize {
        self.final_set.len()
    }
}

/// Route state shared by every cascade on one (snapshot, flows) pair: the
/// equilibrium reached by the unattacked network.
#[derive(Debug, Clone)]
struct Baseline {
    routes: Vec<Option<Arc<Path>>>,
    loads: LoadState,
    down: Vec<bool>,
    failed: Vec<bool>,
}

/// Runs cascades against one snapshot and flow set.
///
/// The unattacked network is first driven to its own fixed point; nodes that fail
/// there are treated as already down and are never counted as attack damage.
#[derive(Debug, Clone)]
pub struct CascadeEngine<'a> {
    snapshot: &'a Snapshot,
    flows: Vec<Flow>,
    order: Vec<usize>,
    cfg: CascadeConfig,
    baseline: Baseline,
    baseline_failures: Vec<NodeId>,
}

impl<'a> CascadeEngine<'a> {
    pub fn new(snapshot: &'a Snapshot, flows: &[Flow], cfg: CascadeConfig) -> Result<Self> {
        for (i, f) in flows.iter().enumerate() {
            if f.id != i {
                return Err(Error::Integrity(format!("flow at index {i} has id {}", f.id)));
            }
            if f.user >= snapshot.len() || f.gateway >= snapshot.len() {
                return Err(Error::Integrity(format!("flow {i} references a missing node")));
            }
        }
        let order = filling_order(flows);
        let up = vec![true; snapshot.len()];
        let caps = degraded_edge_capacity(snapshot, &vec![1.0; snapshot.len()]);
        let (routed, loads) = route_all(&GraphView::new(snapshot, &up, &caps), flows, cfg.delta);
        let fresh = Baseline {
            routes: routed.into_iter().map(|r| r.path).collect(),
            loads,
            down: vec![false; snapshot.len()],
            failed: vec![false; snapshot.len()],
        };
        let mut engine = CascadeEngine {
            snapshot,
            flows: flows.to_vec(),
            order,
            cfg,
            baseline: fresh,
            baseline_failures: Vec::new(),
        };
        let mut run = engine.start(&AttackScenario::none())?;
        while run.step().is_some() {}
        let settled = Baseline {
            routes: run.routes,
            loads: run.loads,
            down: run.down,
            failed: run.failed,
        };
        let failures: Vec<NodeId> = (0..snapshot.len()).filter(|&i| settled.failed[i]).collect();
        engine.baseline = settled;
        engine.baseline_failures = failures;
        Ok(engine)
    }

    pub fn snapshot(&self) -> &Snapshot {
        self.snapshot
    }

    pub fn flows(&self) -> &[Flow] {
        &self.flows
    }

    pub fn config(&self) -> &CascadeConfig {
        &self.cfg
    }

    /// Nodes that fail without any attack.
    pub fn baseline_failures(&self) -> &[NodeId] {
        &self.baseline_failures
    }

    pub fn is_baseline_down(&self, n: NodeId) -> bool {
        self.baseline.failed[n]
    }

    pub fn baseline_loads(&self) -> &LoadState {
        &self.baseline.loads
    }

    pub fn baseline_routes(&self) -> &[Option<Arc<Path>>] {
        &self.baseline.routes
    }

    /// Begins a cascade: applies the degradation and schedules removal of fully
    /// compromised targets.
    pub fn start(&self, attack: &AttackScenario) -> Result<CascadeRun<'_>> {
        attack.validate(self.snapshot)?;
        let n = self.snapshot.len();
        let factor = attack.factors(n);
        let node_cap: Vec<f64> = self
            .snapshot
            .nodes
            .iter()
            .zip(&factor)
            .map(|(node, f)| node.capacity * f)
            .collect();
        let edge_cap = degraded_edge_capacity(self.snapshot, &factor);
        let mut failed = self.baseline.failed.clone();
        let mut initial: Vec<NodeId> = attack.targets.iter().map(|t| t.0).filter(|&v| !failed[v]).collect();
        initial.sort_unstable();
        initial.dedup();
        for &v in &initial {
            failed[v] = true;
        }
        let pending: Vec<NodeId> = initial.iter().copied().filter(|&v| factor[v] <= 0.0).collect();
        Ok(CascadeRun {
            engine: self,
            node_cap,
            edge_cap,
            down: self.baseline.down.clone(),
            failed,
            routes: self.baseline.routes.clone(),
            loads: self.baseline.loads.clone(),
            router: Router::new(),
            pending,
            initial,
            per_iteration: Vec::new(),
            termination: None,
        })
    }

    pub fn run(&self, attack: &AttackScenario) -> Result<CascadeResult> {
        let mut run = self.start(attack)?;
        while run.step().is_some() {}
        Ok(run.into_result())
    }

    /// Failed fraction of risk-eligible nodes after hard removal of `v` alone.
    pub fn single_node_trial(&self, v: NodeId) -> Result<f64> {
        if v >= self.snapshot.len() || self.snapshot.kind(v) == NodeKind::User {
            return Err(Error::Domain(format!("node {v} is not risk-eligible")));
        }
        let result = self.run(&AttackScenario::uniform([v], 1.0))?;
        Ok(result.final_set.len() as f64 / self.snapshot.risk_node_count() as f64)
    }
}

/// One cascade in progress. Each [`CascadeRun::step`] performs removal, rerouting and
/// the overload check once.
#[derive(Debug)]
pub struct CascadeRun<'e> {
    engine: &'e CascadeEngine<'e>,
    node_cap: Vec<f64>,
    edge_cap: Vec<f64>,
    down: Vec<bool>,
    failed: Vec<bool>,
    routes: Vec<Option<Arc<Path>>>,
    loads: LoadState,
    router: Router,
    pending: Vec<NodeId>,
    initial: Vec<NodeId>,
    per_iteration: Vec<Vec<NodeId>>,
    termination: Option<Termination>,
}

impl<'e> CascadeRun<'e> {
    pub fn termination(&self) -> Option<Termination> {
        self.termination
    }

    pub fn iterations(&self) -> usize {
        self.per_iteration.len()
    }

    pub fn loads(&self) -> &LoadState {
        &self.loads
    }

    pub fn is_down(&self, n: NodeId) -> bool {
        self.down[n]
    }

    pub fn is_failed(&self, n: NodeId) -> bool {
        self.failed[n]
    }

    pub fn routes(&self) -> &[Option<Arc<Path>>] {
        &self.routes
    }

    pub fn effective_capacity(&self) -> &[f64] {
        &self.node_cap
    }

    /// Marks `v` failed together with the beams of a failed satellite.
    fn fail(&mut self, v: NodeId, newly: &mut Vec<NodeId>) {
        let snap = self.engine.snapshot;
        if !self.failed[v] {
            self.failed[v] = true;
            newly.push(v);
        }
        if snap.kind(v) == NodeKind::Satellite {
            for b in snap.children(v) {
                if !self.failed[b] {
                    self.failed[b] = true;
                    newly.push(b);
                }
            }
        }
    }

    /// Performs one iteration. Returns the nodes that newly failed, or `None` if the
    /// cascade had already terminated.
    pub fn step(&mut self) -> Option<Vec<NodeId>> {
        if self.termination.is_some() {
            return None;
        }
        let snap = self.engine.snapshot;
        let mut newly = Vec::new();

        // Remove failed nodes; a satellite takes its beams with it.
        let mut removed = Vec::new();
        for v in std::mem::take(&mut self.pending) {
            self.fail(v, &mut newly);
            let mut group = vec![v];
            if snap.kind(v) == NodeKind::Satellite {
                group.extend(snap.children(v));
            }
            for m in group {
                if !self.down[m] {
                    self.down[m] = true;
                    removed.push(m);
                }
            }
        }

        // Reroute flows that crossed a removed node.
        if !removed.is_empty() {
            let mut affected = Vec::new();
            for &i in &self.engine.order {
                if let Some(p) = &self.routes[i] {
                    if p.nodes.iter().any(|&n| self.down[n]) {
                        affected.push(i);
                    }
                }
            }
            for &i in &affected {
                let p = self.routes[i].take().expect("affected flows have paths");
                self.loads.remove_path(&p, self.engine.flows[i].demand);
            }
            let up: Vec<bool> = self.down.iter().map(|d| !d).collect();
            let view = GraphView::new(snap, &up, &self.edge_cap);
            for &i in &affected {
                let flow = &self.engine.flows[i];
                let dest = if self.down[flow.gateway] {
                    Destination::AnyGateway
                } else {
                    Destination::Gateway(flow.gateway)
                };
                let path = self
                    .router
                    .shortest_path(&view, &self.loads, flow.user, dest, self.engine.cfg.delta);
                if let Some(p) = path {
                    self.loads.add_path(&p, flow.demand);
                    self.routes[i] = Some(Arc::new(p));
                }
            }
        }

        // Recompute loads from the surviving routes and check for overload.
        self.loads = LoadState::for_snapshot(snap);
        for (i, r) in self.routes.iter().enumerate() {
            if let Some(p) = r {
                self.loads.add_path(p, self.engine.flows[i].demand);
            }
        }
        let overloaded: Vec<NodeId> = overload_check(&self.loads.node_load, &self.node_cap)
            .into_iter()
            .filter(|&v| !self.down[v])
            .collect();
        for &v in &overloaded {
            self.fail(v, &mut newly);
        }
        self.pending = overloaded;

        newly.sort_unstable();
        self.per_iteration.push(newly.clone());

        let served = self.routes.iter().any(Option::is_some);
        self.termination = if !self.engine.flows.is_empty() && !served {
            Some(Termination::Disconnected)
        } else if self.pending.is_empty() {
            Some(Termination::FixedPoint)
        } else if self.per_iteration.len() >= self.engine.cfg.max_iter {
            Some(Termination::MaxIter)
        } else {
            None
        };
        Some(newly)
    }

    pub fn into_result(self) -> CascadeResult {
        let baseline_down = &self.engine.baseline.failed;
        let final_set: Vec<NodeId> = (0..self.failed.len())
            .filter(|&i| self.failed[i] && !baseline_down[i])
            .collect();
        let unserved_demand = self
            .routes
            .iter()
            .zip(&self.engine.flows)
            .filter(|(r, _)| r.is_none())
            .map(|(_, f)| f.demand)
            .sum();
        CascadeResult {
            initial: self.initial,
            iterations: self.per_iteration.len(),
            per_iteration: self.per_iteration,
            final_set,
            final_loads: self.loads,
            unserved_demand,
            termination: self.termination.unwrap_or(Termination::MaxIter),
        }
    }
}

/// Convenience wrapper: builds an engine and runs one attack.
pub fn run_cascade(
    snapshot: &Snapshot,
    flows: &[Flow],
    attack: &AttackScenario,
    cfg: CascadeConfig,
) -> Result<CascadeResult> {
    CascadeEngine::new(snapshot, flows, cfg)?.run(attack)
}

/// Failed fraction of risk-eligible nodes when `v` alone is hard-removed.
pub fn single_seed_cfr_trial(snapshot: &Snapshot, flows: &[Flow], v: NodeId, cfg: CascadeConfig) -> Result<f64> {
    CascadeEngine::new(snapshot, flows, cfg)?.single_node_trial(v)
}
