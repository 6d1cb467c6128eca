//! Degree, betweenness and PageRank on undirected graphs.

use std::collections::VecDeque;

use crate::topology::{NodeId, Snapshot};

pub const PAGERANK_DAMPING: f64 = 0.85;
pub const PAGERANK_TOLERANCE: f64 = 1e-9;
const PAGERANK_MAX_ROUNDS: usize = 10_000;

/// Simple undirected graph over dense local indices.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Graph {
    pub adjacency: Vec<Vec<usize>>,
}

impl Graph {
    /// Builds from an edge list, dropping self-loops and duplicates.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut adjacency = vec![Vec::new(); n];
        for (a, b) in edges {
            if a != b {
                adjacency[a].push(b);
                adjacency[b].push(a);
            }
        }
        for list in &mut adjacency {
            list.sort_unstable();
            list.dedup();
        }
        Self { adjacency }
    }

    pub fn len(&self) -> usize {
        self.adjacency.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adjacency.is_empty()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }
}

/// The snapshot restricted to risk-eligible nodes, with the node id behind each local index.
pub fn risk_subgraph(snapshot: &Snapshot) -> (Vec<NodeId>, Graph) {
    let ids: Vec<NodeId> = snapshot
        .nodes
        .iter()
        .filter(|n| n.kind.is_risk_eligible())
        .map(|n| n.id)
        .collect();
    let mut local = vec![usize::MAX; snapshot.len()];
    for (i, &id) in ids.iter().enumerate() {
        local[id] = i;
    }
    let edges = snapshot
        .edges
        .iter()
        .filter(|e| local[e.src] != usize::MAX && local[e.dst] != usize::MAX)
        .map(|e| (local[e.src], local[e.dst]));
    (ids.clone(), Graph::from_edges(ids.len(), edges))
}

/// Exact Brandes betweenness, normalised by the number of pairs excluding the node,
/// `(n-1)(n-2)/2`. All zeros for graphs with fewer than three nodes.
pub fn betweenness(g: &Graph) -> Vec<f64> {
    let n = g.len();
    let mut bc = vec![0.0; n];
    let mut sigma = vec![0.0f64; n];
    let mut dist = vec![usize::MAX; n];
    let mut delta = vec![0.0f64; n];
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut order = Vec::with_capacity(n);
    let mut queue = VecDeque::new();
    for s in 0..n {
        for v in 0..n {
            sigma[v] = 0.0;
            dist[v] = usize::MAX;
            delta[v] = 0.0;
            preds[v].clear();
        }
        order.clear();
        sigma[s] = 1.0;
        dist[s] = 0;
        queue.push_back(s);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for &w in &g.adjacency[v] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
                if dist[w] == dist[v] + 1 {
                    sigma[w] += sigma[v];
                    preds[w].push(v);
                }
            }
        }
        for &w in order.iter().rev() {
            for &v in &preds[w] {
                delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
            }
            if w != s {
                bc[w] += delta[w];
            }
        }
    }
    if n < 3 {
        return vec![0.0; n];
    }
    // Each unordered pair was counted from both ends.
    let pairs = ((n - 1) * (n - 2)) as f64;
    bc.iter().map(|b| (b / pairs).clamp(0.0, 1.0)).collect()
}

/// Power-iteration PageRank. Isolated nodes spread their mass uniformly. Iterates until
/// the L1 change drops below `tolerance`.
pub fn pagerank(g: &Graph, damping: f64, tolerance: f64) -> Vec<f64> {
    let n = g.len();
    if n == 0 {
        return Vec::new();
    }
    let nf = n as f64;
    let mut rank = vec![1.0 / nf; n];
    let mut next = vec![0.0; n];
    for _ in 0..PAGERANK_MAX_ROUNDS {
        let dangling: f64 = (0..n).filter(|&v| g.degree(v) == 0).map(|v| rank[v]).sum();
        let base = (1.0 - damping) / nf + damping * dangling / nf;
        next.iter_mut().for_each(|x| *x = base);
        for v in 0..n {
            let d = g.degree(v);
            if d > 0 {
                let share = damping * rank[v] / d as f64;
                for &w in &g.adjacency[v] {
                    next[w] += share;
                }
            }
        }
        let total: f64 = next.iter().sum();
        next.iter_mut().for_each(|x| *x /= total);
        let change: f64 = rank.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut rank, &mut next);
        if change < tolerance {
            break;
        }
    }
    rank
}

#[derive(Debug, Clone, PartialEq)]
pub struct Centralities {
    /// Risk-eligible node ids, ascending; the other vectors are indexed alongside.
    pub nodes: Vec<NodeId>,
    /// Physical degree (all edge kinds except internal).
    pub degree: Vec<usize>,
    pub betweenness: Vec<f64>,
    pub pagerank: Vec<f64>,
}

/// Baseline centralities over the risk-eligible part of a snapshot.
pub fn centralities(snapshot: &Snapshot) -> Centralities {
    let (nodes, g) = risk_subgraph(snapshot);
    Centralities {
        degree: nodes.iter().map(|&v| snapshot.physical_degree(v)).collect(),
        betweenness: betweenness(&g),
        pagerank: pagerank(&g, PAGERANK_DAMPING, PAGERANK_TOLERANCE),
        nodes,
    }
}
