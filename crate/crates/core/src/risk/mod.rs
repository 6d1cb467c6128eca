//! Risk metrics built on cascade outcomes.

mod centrality;
mod hypergraph;
mod stats;
mod structure;

pub use centrality::{
    betweenness, centralities, pagerank, risk_subgraph, Centralities, Graph, PAGERANK_DAMPING, PAGERANK_TOLERANCE,
};
pub use hypergraph::{build_failure_hypergraph, cfr, hbc, FailureHypergraph, Hyperedge};
pub use stats::{mean, pearson, percentile_nearest_rank};
pub use structure::{giant_component_ratio, systemic_risk};

use crate::cascade::CascadeResult;
use crate::error::{Error, Result};
use crate::orbital::GeodeticPosition;
use crate::time::EpochTime;
use crate::topology::{NodeId, NodeKind, Snapshot};

pub const DEFAULT_BLACK_SWAN_DELTA_PCT: f64 = 20.0;
pub const DEFAULT_BLACK_SWAN_TAU_PCT: f64 = 90.0;

#[derive(Debug, Clone, PartialEq)]
pub struct NodeRisk {
    pub node: NodeId,
    pub label: String,
    pub kind: NodeKind,
    pub geodetic: Option<GeodeticPosition>,
    pub degree: usize,
    pub betweenness: f64,
    pub pagerank: f64,
    pub cfr: Option<f64>,
    pub hbc: Option<f64>,
    pub trial_count: usize,
    pub black_swan: bool,
}

/// Per-node risk table of one snapshot, in node-id order.
#[derive(Debug, Clone, PartialEq)]
pub struct RiskReport {
    pub time: EpochTime,
    pub rows: Vec<NodeRisk>,
}

impl RiskReport {
    /// Joins centralities with CFR from the hypergraph and flags black swans.
    pub fn assemble(
        snapshot: &Snapshot,
        cent: &Centralities,
        hypergraph: &FailureHypergraph,
        delta_pct: f64,
        tau_pct: f64,
    ) -> Self {
        let n_risk = snapshot.risk_node_count();
        let (cfr_of, trials_of) = hypergraph.cfr_table(snapshot.len(), n_risk);
        let rows = cent
            .nodes
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let node = &snapshot.nodes[v];
                NodeRisk {
                    node: v,
                    label: node.label.clone(),
                    kind: node.kind,
                    geodetic: node.geodetic,
                    degree: cent.degree[i],
                    betweenness: cent.betweenness[i],
                    pagerank: cent.pagerank[i],
                    cfr: cfr_of[v],
                    hbc: hbc(cfr_of[v], cent.degree[i]),
                    trial_count: trials_of[v],
                    black_swan: false,
                }
            })
            .collect();
        let mut report = RiskReport {
            time: snapshot.time,
            rows,
        };
        let swans = detect_black_swans(&report, delta_pct, tau_pct);
        for row in &mut report.rows {
            row.black_swan = swans.binary_search(&row.node).is_ok();
        }
        report
    }

    pub fn row(&self, node: NodeId) -> Option<&NodeRisk> {
        self.rows
            .binary_search_by_key(&node, |r| r.node)
            .ok()
            .map(|i| &self.rows[i])
    }

    /// Mean HBC over nodes of `kind` with a defined value.
    pub fn mean_hbc(&self, kind: NodeKind) -> Option<f64> {
        let values: Vec<f64> = self.rows.iter().filter(|r| r.kind == kind).filter_map(|r| r.hbc).collect();
        mean(&values)
    }

    /// Pearson correlation of HBC against physical degree over nodes with defined HBC.
    pub fn hbc_degree_correlation(&self) -> Option<f64> {
        let (x, y): (Vec<f64>, Vec<f64>) = self
            .rows
            .iter()
            .filter_map(|r| r.hbc.map(|h| (h, r.degree as f64)))
            .unzip();
        pearson(&x, &y)
    }

    /// Up to `n` rows with defined HBC, highest first, ties by node id.
    pub fn top_by_hbc(&self, n: usize) -> Vec<&NodeRisk> {
        let mut ranked: Vec<&NodeRisk> = self.rows.iter().filter(|r| r.hbc.is_some()).collect();
        ranked.sort_by(|a, b| b.hbc.unwrap().total_cmp(&a.hbc.unwrap()).then(a.node.cmp(&b.node)));
        ranked.truncate(n);
        ranked
    }
}

/// Nodes with degree strictly below the `delta_pct` percentile and HBC strictly above
/// the `tau_pct` percentile, both taken over nodes with defined HBC. Sorted by id.
pub fn detect_black_swans(report: &RiskReport, delta_pct: f64, tau_pct: f64) -> Vec<NodeId> {
    let ranked: Vec<&NodeRisk> = report.rows.iter().filter(|r| r.hbc.is_some()).collect();
    let degrees: Vec<f64> = ranked.iter().map(|r| r.degree as f64).collect();
    let hbcs: Vec<f64> = ranked.iter().filter_map(|r| r.hbc).collect();
    let (Some(d_cut), Some(h_cut)) = (
        percentile_nearest_rank(&degrees, delta_pct),
        percentile_nearest_rank(&hbcs, tau_pct),
    ) else {
        return Vec::new();
    };
    let mut out: Vec<NodeId> = ranked
        .iter()
        .filter(|r| (r.degree as f64) < d_cut && r.hbc.unwrap() > h_cut)
        .map(|r| r.node)
        .collect();
    out.sort_unstable();
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cir {
    /// Failed nodes per attacked node.
    pub leverage: f64,
    /// Failed nodes over every node in the network, user terminals included.
    pub network_fraction: f64,
}

pub fn cir(result: &CascadeResult, n_attacked: usize, n_total: usize) -> Result<Cir> {
    if n_attacked == 0 || n_total == 0 {
        return Err(Error::Domain("impact ratio needs at least one attacked node".into()));
    }
    let failed = result.final_set.len() as f64;
    Ok(Cir {
        leverage: failed / n_attacked as f64,
        network_fraction: failed / n_total as f64,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeseriesPoint {
    pub time: EpochTime,
    pub gcr: f64,
    pub systemic_risk: f64,
    pub mean_hbc_satellite: Option<f64>,
    pub mean_hbc_gateway: Option<f64>,
    pub mean_hbc_feederbeam: Option<f64>,
    pub mean_hbc_userbeam: Option<f64>,
}
