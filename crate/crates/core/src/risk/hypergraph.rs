//! Failure hypergraph and the CFR / HBC metrics derived from it.

use crate::cascade::CascadeResult;
use crate::error::{Error, Result};
use crate::topology::NodeId;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hyperedge {
    pub run: usize,
    pub initial: Vec<NodeId>,
    /// Every node that failed in the run.
    pub members: Vec<NodeId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FailureHypergraph {
    pub vertices: Vec<NodeId>,
    pub hyperedges: Vec<Hyperedge>,
    member_mask: Vec<bool>,
}

impl FailureHypergraph {
    pub fn new(vertices: &[NodeId]) -> Self {
        let mut v = vertices.to_vec();
        v.sort_unstable();
        v.dedup();
        let mut member_mask = vec![false; v.last().map_or(0, |m| m + 1)];
        for &n in &v {
            member_mask[n] = true;
        }
        Self {
            vertices: v,
            hyperedges: Vec::new(),
            member_mask,
        }
    }

    fn is_vertex(&self, n: NodeId) -> bool {
        self.member_mask.get(n).copied().unwrap_or(false)
    }

    /// Appends the outcome of one cascade run.
    pub fn push(&mut self, result: &CascadeResult) -> Result<()> {
        self.push_sets(&result.initial, &result.final_set)
    }

    pub fn push_sets(&mut self, initial: &[NodeId], members: &[NodeId]) -> Result<()> {
        if let Some(&bad) = members.iter().find(|&&n| !self.is_vertex(n)) {
            return Err(Error::Integrity(format!("failed node {bad} is not a hypergraph vertex")));
        }
        if members.len() < initial.len() {
            return Err(Error::Integrity("a run failed fewer nodes than it attacked".into()));
        }
        self.hyperedges.push(Hyperedge {
            run: self.hyperedges.len(),
            initial: initial.to_vec(),
            members: members.to_vec(),
        });
        Ok(())
    }

    /// Runs in which `v` was among the initially attacked nodes.
    pub fn trial_count(&self, v: NodeId) -> usize {
        self.hyperedges.iter().filter(|h| h.initial.contains(&v)).count()
    }

    /// CFR and trial count for every node id below `n_nodes`, in one pass.
    pub fn cfr_table(&self, n_nodes: usize, n_risk: usize) -> (Vec<Option<f64>>, Vec<usize>) {
        let mut failed = vec![0u64; n_nodes];
        let mut trials = vec![0usize; n_nodes];
        for h in &self.hyperedges {
            for &v in &h.initial {
                if v < n_nodes {
                    failed[v] += h.members.len() as u64;
                    trials[v] += 1;
                }
            }
        }
        let cfr = failed
            .iter()
            .zip(&trials)
            .map(|(&f, &k)| (k > 0 && n_risk > 0).then(|| f as f64 / (k as f64 * n_risk as f64)))
            .collect();
        (cfr, trials)
    }
}

/// One hyperedge per run, in run order.
pub fn build_failure_hypergraph(vertices: &[NodeId], results: &[CascadeResult]) -> Result<FailureHypergraph> {
    let mut h = FailureHypergraph::new(vertices);
    for r in results {
        h.push(r)?;
    }
    Ok(h)
}

/// Mean failed fraction over runs that attacked `v`; `None` when no run did.
pub fn cfr(h: &FailureHypergraph, v: NodeId, n_risk: usize) -> Option<f64> {
    if n_risk == 0 {
        return None;
    }
    let (sum, count) = h
        .hyperedges
        .iter()
        .filter(|e| e.initial.contains(&v))
        .fold((0u64, 0u64), |(s, c), e| (s + e.members.len() as u64, c + 1));
    (count > 0).then(|| sum as f64 / (count as f64 * n_risk as f64))
}

/// `cfr / ln(1 + degree)`; `None` for isolated nodes or undefined CFR.
pub fn hbc(cfr: Option<f64>, degree: usize) -> Option<f64> {
    let c = cfr?;
    (degree >= 1).then(|| c / (1.0 + degree as f64).ln())
}
