//! Hand-built snapshots for engine tests.
#![allow(dead_code)]

use std::collections::{BTreeSet, VecDeque};

use lsn_cascade::cascade::{overload_check, AttackScenario, CascadeConfig, CascadeEngine, Termination};
use lsn_cascade::orbital::EcefPosition;
use lsn_cascade::time::EpochTime;
use lsn_cascade::topology::{Edge, EdgeId, EdgeKind, Node, NodeId, NodeKind, Snapshot, UserProfile};
use lsn_cascade::traffic::Flow;

pub const T0: EpochTime = EpochTime::from_unix_ms(1_704_067_200_000);

#[derive(Default)]
pub struct Net {
    pub nodes: Vec<Node>,
    pub edges: Vec<Edge>,
}

impl Net {
    pub fn new() -> Self {
        Self::default()
    }

    fn push(&mut self, label: &str, kind: NodeKind, capacity: f64, parent: Option<NodeId>) -> NodeId {
        let id = self.nodes.len();
        self.nodes.push(Node {
            id,
            label: label.to_string(),
            kind,
            position: EcefPosition::new(0.0, 0.0, 0.0),
            geodetic: None,
            capacity,
            hardware_cap: (kind == NodeKind::Satellite).then_some(capacity),
            parent,
            profile: (kind == NodeKind::User).then_some(UserProfile { pop_weight: 1.0, beta: 1.0 }),
        });
        id
    }

    pub fn sat(&mut self, label: &str, capacity: f64) -> NodeId {
        self.push(label, NodeKind::Satellite, capacity, None)
    }

    pub fn gateway(&mut self, label: &str, capacity: f64) -> NodeId {
        self.push(label, NodeKind::Gateway, capacity, None)
    }

    pub fn user(&mut self, label: &str) -> NodeId {
        self.push(label, NodeKind::User, f64::INFINITY, None)
    }

    /// Beam on `parent`, joined to it by an internal link of capacity `link`.
    pub fn beam(&mut self, label: &str, kind: NodeKind, parent: NodeId, capacity: f64, link: f64) -> NodeId {
        let b = self.push(label, kind, capacity, Some(parent));
        self.link(b, parent, EdgeKind::Internal, link);
        b
    }

    pub fn link(&mut self, a: NodeId, b: NodeId, kind: EdgeKind, capacity: f64) -> EdgeId {
        let delay_ms = if kind == EdgeKind::Internal { 0.0 } else { 1.0 };
        self.edges.push(Edge {
            src: a,
            dst: b,
            kind,
            capacity,
            delay_ms,
            length_km: delay_ms * 299.792458,
        });
        self.edges.len() - 1
    }

    pub fn build(&self) -> Snapshot {
        Snapshot::new(T0, self.nodes.clone(), self.edges.clone()).expect("valid synthetic snapshot")
    }
}

pub fn flow(id: usize, user: NodeId, gateway: NodeId, demand: f64) -> Flow {
    Flow {
        id,
        user,
        gateway,
        demand,
    }
}

/// The five-hop service chain u - ub - s1 - fb1 - g with a parallel satellite s2
/// (own beams) whose capacity is below the flow's demand.
pub struct Parallel {
    pub snapshot: Snapshot,
    pub user: NodeId,
    pub s1: NodeId,
    pub s2: NodeId,
    pub gateway: NodeId,
}

pub fn parallel_satellites(s2_capacity: f64) -> Parallel {
    let big = 1e6;
    let mut net = Net::new();
    let s1 = net.sat("s1", big);
    let s2 = net.sat("s2", s2_capacity);
    let g = net.gateway("g", big);
    let u = net.user("u");
    let ub1 = net.beam("ub1", NodeKind::UserBeam, s1, big, big);
    let fb1 = net.beam("fb1", NodeKind::FeederBeam, s1, big, big);
    let ub2 = net.beam("ub2", NodeKind::UserBeam, s2, big, big);
    let fb2 = net.beam("fb2", NodeKind::FeederBeam, s2, big, big);
    net.link(u, ub1, EdgeKind::Access, big);
    net.link(u, ub2, EdgeKind::Access, big);
    net.link(fb1, g, EdgeKind::Feeder, big);
    net.link(fb2, g, EdgeKind::Feeder, big);
    // s1 is the cheaper route: s2's access link is deliberately narrower.
    let access2 = net.edges.iter().position(|e| e.src == u && e.dst == ub2).unwrap();
    net.edges[access2].capacity = big / 4.0;
    Parallel {
        snapshot: net.build(),
        user: u,
        s1,
        s2,
        gateway: g,
    }
}

/// Random layered network: `sats` satellites with random ISLs, `users` users and
/// `gateways` gateways attached through beams on random satellites. All links and
/// nodes get `capacity`.
pub struct RandomNet {
    pub snapshot: Snapshot,
    pub users: Vec<NodeId>,
    pub gateways: Vec<NodeId>,
}

pub fn random_network(seed: u64, sats: usize, users: usize, gateways: usize, capacity: f64) -> RandomNet {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut net = Net::new();
    let s: Vec<NodeId> = (0..sats).map(|i| net.sat(&format!("s{i}"), capacity)).collect();
    let p = rng.gen_range(0.15..0.6);
    for i in 0..sats {
        for j in i + 1..sats {
            if rng.gen_bool(p) {
                net.link(s[i], s[j], EdgeKind::Isl, capacity);
            }
        }
    }
    let mut user_ids = Vec::new();
    for k in 0..users {
        let u = net.user(&format!("u{k}"));
        user_ids.push(u);
        for _ in 0..rng.gen_range(0..3usize) {
            let parent = s[rng.gen_range(0..sats)];
            let b = net.beam(&format!("ub{k}-{}", net.nodes.len()), NodeKind::UserBeam, parent, capacity, capacity);
            net.link(u, b, EdgeKind::Access, capacity);
        }
    }
    let mut gateway_ids = Vec::new();
    for k in 0..gateways {
        let g = net.gateway(&format!("g{k}"), capacity);
        gateway_ids.push(g);
        for _ in 0..rng.gen_range(1..3usize) {
            let parent = s[rng.gen_range(0..sats)];
            let b = net.beam(&format!("fb{k}-{}", net.nodes.len()), NodeKind::FeederBeam, parent, capacity, capacity);
            net.link(b, g, EdgeKind::Feeder, capacity);
        }
    }
    RandomNet {
        snapshot: net.build(),
        users: user_ids,
        gateways: gateway_ids,
    }
}

/// Hop distance from `src` to `dst` over service paths: user, user beam, satellites,
/// feeder beam, gateway.
pub fn bfs_hops(snap: &Snapshot, src: NodeId, dst: NodeId) -> Option<usize> {
    let mut dist = vec![usize::MAX; snap.len()];
    let mut queue = VecDeque::from([src]);
    dist[src] = 0;
    while let Some(v) = queue.pop_front() {
        if v == dst {
            return Some(dist[v]);
        }
        for &(m, _) in snap.neighbors(v) {
            if dist[m] != usize::MAX {
                continue;
            }
            let ok = match (snap.kind(v), snap.kind(m)) {
                (NodeKind::User, NodeKind::UserBeam) => v == src,
                (NodeKind::UserBeam, NodeKind::Satellite) => true,
                (NodeKind::Satellite, NodeKind::Satellite | NodeKind::FeederBeam) => true,
                (NodeKind::FeederBeam, NodeKind::Satellite) => true,
                (NodeKind::FeederBeam, NodeKind::Gateway) => m == dst,
                _ => false,
            };
            if ok {
                dist[m] = dist[v] + 1;
                queue.push_back(m);
            }
        }
    }
    None
}


/// Small random instance with enough demand to overload something now and then.
pub fn cascade_instance(seed: u64, n_flows: usize) -> (RandomNet, Vec<Flow>) {
    let net = random_network(seed, 3 + (seed % 5) as usize, 3, 2, 1000.0);
    let flows = (0..n_flows)
        .map(|i| {
            let d = 150.0 + ((seed >> (i % 16)) % 400) as f64;
            flow(i, net.users[i % 3], net.gateways[i % 2], d)
        })
        .collect();
    (net, flows)
}

/// Steps one cascade and checks monotone failure, beam coupling, the fixed point,
/// the failure-set bookkeeping and determinism.
pub fn check_cascade_invariants(snap: &Snapshot, flows: &[Flow], attack: &AttackScenario) -> Result<(), String> {
    let targeted: BTreeSet<NodeId> = attack.targets.iter().map(|&(v, _)| v).collect();
    let cfg = CascadeConfig::default();
    let engine = CascadeEngine::new(snap, flows, cfg).map_err(|e| e.to_string())?;

    let mut run = engine.start(attack).map_err(|e| e.to_string())?;
    let mut previous: Vec<bool> = (0..snap.len()).map(|v| run.is_failed(v)).collect();
    while let Some(newly) = run.step() {
        let now: Vec<bool> = (0..snap.len()).map(|v| run.is_failed(v)).collect();
        for v in 0..snap.len() {
            if previous[v] && !now[v] {
                return Err(format!("node {v} recovered"));
            }
            if let Some(parent) = snap.nodes[v].parent {
                // An overloaded satellite is marked now and removed on the next step.
                let overloaded = now[parent] && !targeted.contains(&parent);
                if (run.is_down(parent) && !run.is_down(v)) || (overloaded && !now[v]) {
                    return Err(format!("beam {v} outlived its satellite"));
                }
            }
        }
        if let Some(v) = newly.iter().find(|&&v| previous[v]) {
            return Err(format!("node {v} reported twice"));
        }
        previous = now;
    }
    if run.termination() == Some(Termination::FixedPoint) {
        if let Some(v) = overload_check(&run.loads().node_load, run.effective_capacity())
            .into_iter()
            .find(|&v| !run.is_down(v))
        {
            return Err(format!("overloaded node {v} left standing"));
        }
        if run.routes().iter().flatten().any(|p| p.nodes.iter().any(|&n| run.is_down(n))) {
            return Err("a surviving route crosses a failed node".into());
        }
    }
    let r = run.into_result();
    if r.iterations > cfg.max_iter {
        return Err(format!("{} iterations", r.iterations));
    }
    let final_set: BTreeSet<NodeId> = r.final_set.iter().copied().collect();
    if !r.initial.iter().all(|v| final_set.contains(v)) {
        return Err("initial failures missing from the final set".into());
    }
    let mut union: BTreeSet<NodeId> = r.initial.iter().copied().collect();
    for &v in r.per_iteration.iter().flatten() {
        if !union.insert(v) {
            return Err(format!("node {v} failed twice"));
        }
    }
    if union != final_set {
        return Err("per-iteration sets do not add up to the final set".into());
    }
    if engine.run(attack).map_err(|e| e.to_string())? != r {
        return Err("a second run differs".into());
    }
    Ok(())
}
