//! User-to-gateway demand generation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::orbital::normalize_longitude;
use crate::time::EpochTime;
use crate::topology::{EdgeKind, NodeId, NodeKind, Snapshot, UserProfile};

/// Local hour at which demand peaks.
pub const PEAK_LOCAL_HOUR: f64 = 21.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Flow {
    pub id: usize,
    pub user: NodeId,
    pub gateway: NodeId,
    /// Mbps.
    pub demand: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DemandProfile {
    /// Offered load as a fraction of the reference beam capacity.
    pub target_load: f64,
    pub sigma_hours: f64,
    /// Off-peak floor of the diurnal factor.
    pub floor: f64,
}

impl Default for DemandProfile {
    fn default() -> Self {
        Self {
            target_load: 0.7,
            sigma_hours: 3.0,
            floor: 0.1,
        }
    }
}

impl DemandProfile {
    pub fn validate(&self) -> Result<()> {
        if !(self.target_load > 0.0 && self.target_load <= 2.0) {
            return Err(Error::config("traffic.target_load", "must lie in (0, 2]"));
        }
        if !(self.sigma_hours > 0.0 && self.sigma_hours.is_finite()) {
            return Err(Error::config("traffic.sigma_hours", "must be positive"));
        }
        if !(0.0..=1.0).contains(&self.floor) {
            return Err(Error::config("traffic.floor", "must lie in [0, 1]"));
        }
        Ok(())
    }
}

/// Gaussian activity bump centred on 21:00 local solar time, wrapped around midnight.
pub fn diurnal_factor(lon: f64, t: EpochTime, sigma_hours: f64, floor: f64) -> f64 {
    let local = (t.utc_hour() + normalize_longitude(lon) / 15.0).rem_euclid(24.0);
    let gap = (local - PEAK_LOCAL_HOUR).abs();
    let delta = gap.min(24.0 - gap);
    floor + (1.0 - floor) * (-delta * delta / (2.0 * sigma_hours * sigma_hours)).exp()
}

/// Capacity the offered load is scaled against: UserBeams that serve at least one user.
pub fn reference_capacity(snapshot: &Snapshot) -> f64 {
    snapshot
        .nodes_of(NodeKind::UserBeam)
        .filter(|b| {
            snapshot
                .neighbors(b.id)
                .iter()
                .any(|&(_, e)| snapshot.edges[e].kind == EdgeKind::Access)
        })
        .map(|b| b.capacity)
        .sum()
}

/// Scales demands so they sum to `target_load * reference_capacity`.
pub fn scale_demands(flows: &mut [Flow], target_load: f64, reference_capacity: f64) -> Result<()> {
    if !(reference_capacity > 0.0) {
        return Err(Error::Degenerate("reference capacity is zero".into()));
    }
    let total: f64 = flows.iter().map(|f| f.demand).sum();
    if !(total > 0.0) {
        return Err(Error::Degenerate("total raw demand is zero".into()));
    }
    let k = target_load * reference_capacity / total;
    for f in flows.iter_mut() {
        f.demand *= k;
    }
    Ok(())
}

/// Gateways a user can reach through its access beams without passing another user or
/// gateway. Computed per connected island of the satellite and beam layer.
fn reachable_gateways(snapshot: &Snapshot) -> Vec<Vec<NodeId>> {
    let n = snapshot.len();
    let mut island = vec![usize::MAX; n];
    let mut islands = 0;
    let mut stack = Vec::new();
    for start in 0..n {
        let k = snapshot.kind(start);
        if island[start] != usize::MAX || k == NodeKind::User || k == NodeKind::Gateway {
            continue;
        }
        island[start] = islands;
        stack.push(start);
        while let Some(v) = stack.pop() {
            for &(m, _) in snapshot.neighbors(v) {
                let km = snapshot.kind(m);
                if island[m] == usize::MAX && km != NodeKind::User && km != NodeKind::Gateway {
                    island[m] = islands;
                    stack.push(m);
                }
            }
        }
        islands += 1;
    }
    let mut gateways_of = vec![Vec::new(); islands];
    for g in snapshot.nodes_of(NodeKind::Gateway) {
        for &(fb, _) in snapshot.neighbors(g.id) {
            let list = &mut gateways_of[island[fb]];
            if !list.contains(&g.id) {
                list.push(g.id);
            }
        }
    }
    for list in &mut gateways_of {
        list.sort_unstable();
    }
    snapshot
        .nodes
        .iter()
        .map(|u| {
            if u.kind != NodeKind::User {
                return Vec::new();
            }
            let mut out: Vec<NodeId> = snapshot
                .neighbors(u.id)
                .iter()
                .flat_map(|&(b, _)| gateways_of[island[b]].iter().copied())
                .collect();
            out.sort_unstable();
            out.dedup();
            out
        })
        .collect()
}

/// Raw (unscaled) flows, one per user in node order.
///
/// Each user's gateway is drawn uniformly from the gateways reachable from its access
/// beams, or from all gateways when none is reachable.
pub fn raw_flows(snapshot: &Snapshot, profile: &DemandProfile, t: EpochTime, seed: u64) -> Result<Vec<Flow>> {
    let gateways: Vec<NodeId> = snapshot.nodes_of(NodeKind::Gateway).map(|g| g.id).collect();
    if gateways.is_empty() {
        return Err(Error::config("ground.cities_path", "the snapshot has no gateways"));
    }
    let reachable = reachable_gateways(snapshot);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut flows = Vec::new();
    for user in snapshot.nodes_of(NodeKind::User) {
        let pool = if reachable[user.id].is_empty() {
            &gateways
        } else {
            &reachable[user.id]
        };
        let gateway = pool[rng.gen_range(0..pool.len())];
        let profile_u = user.profile.unwrap_or(UserProfile {
            pop_weight: 0.0,
            beta: 0.0,
        });
        let lon = user.geodetic.map_or(0.0, |g| g.lon);
        let demand = profile_u.pop_weight * profile_u.beta * diurnal_factor(lon, t, profile.sigma_hours, profile.floor);
        flows.push(Flow {
            id: flows.len(),
            user: user.id,
            gateway,
            demand,
        });
    }
    Ok(flows)
}

/// Flows scaled to the profile's target load. When no demand or no serving beam exists
/// the raw demands are returned unchanged.
pub fn generate_flows(snapshot: &Snapshot, profile: &DemandProfile, t: EpochTime, seed: u64) -> Result<Vec<Flow>> {
    let mut flows = raw_flows(snapshot, profile, t, seed)?;
    let reference = reference_capacity(snapshot);
    let total: f64 = flows.iter().map(|f| f.demand).sum();
    if total > 0.0 && reference > 0.0 {
        scale_demands(&mut flows, profile.target_load, reference)?;
    }
    Ok(flows)
}
