//! Connectivity and link-stress measures of a snapshot.

use crate::routing::LoadState;
use crate::topology::{EdgeKind, Snapshot};

/// Size of the largest connected component over the risk-eligible nodes that are
/// `alive`, divided by the number of such nodes. `None` when there are none.
pub fn giant_component_ratio(snapshot: &Snapshot, alive: Option<&[bool]>) -> Option<f64> {
    let keep = |v: usize| snapshot.kind(v).is_risk_eligible() && alive.is_none_or(|a| a[v]);
    let n = snapshot.len();
    let mut seen = vec![false; n];
    let mut total = 0usize;
    let mut largest = 0usize;
    let mut stack = Vec::new();
    for start in 0..n {
        if seen[start] || !keep(start) {
            continue;
        }
        seen[start] = true;
        stack.push(start);
        let mut size = 0;
        while let Some(v) = stack.pop() {
            size += 1;
            for &(m, _) in snapshot.neighbors(v) {
                if !seen[m] && keep(m) {
                    seen[m] = true;
                    stack.push(m);
                }
            }
        }
        total += size;
        largest = largest.max(size);
    }
    (total > 0).then(|| largest as f64 / total as f64)
}

/// Fraction of non-internal links whose load exceeds their capacity. Zero when the
/// snapshot has no such links.
pub fn systemic_risk(snapshot: &Snapshot, loads: &LoadState) -> f64 {
    let mut links = 0usize;
    let mut over = 0usize;
    for (e, edge) in snapshot.edges.iter().enumerate() {
        if edge.kind == EdgeKind::Internal {
            continue;
        }
        links += 1;
        if loads.edge_load[e] > edge.capacity {
            over += 1;
        }
    }
    if links == 0 {
        0.0
    } else {
        over as f64 / links as f64
    }
}
