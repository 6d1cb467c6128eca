mod common;

use std::collections::VecDeque;

use common::{Net, T0};
use lsn_cascade::cascade::{CascadeResult, Termination};
use lsn_cascade::routing::LoadState;
use lsn_cascade::topology::{EdgeKind, NodeId, NodeKind};
use lsn_cascade::risk::*;
use lsn_cascade::Error;
use proptest::prelude::*;

fn result(initial: &[NodeId], final_set: &[NodeId]) -> CascadeResult {
    CascadeResult {
        initial: initial.to_vec(),
        per_iteration: vec![final_set.iter().copied().filter(|v| !initial.contains(v)).collect()],
        final_set: final_set.to_vec(),
        final_loads: LoadState::zeros(0, 0),
        unserved_demand: 0.0,
        iterations: 1,
        termination: Termination::FixedPoint,
    }
}

#[test]
fn hypergraph_keeps_runs_in_order() {
    let vertices: Vec<NodeId> = (0..10).collect();
    assert!(build_failure_hypergraph(&vertices, &[]).unwrap().hyperedges.is_empty());
    let runs = [result(&[1], &[1, 2]), result(&[3], &[3]), result(&[4, 5], &[4, 5, 6, 7])];
    let h = build_failure_hypergraph(&vertices, &runs).unwrap();
    assert_eq!(h.hyperedges.len(), 3);
    for (k, (e, r)) in h.hyperedges.iter().zip(&runs).enumerate() {
        assert_eq!(e.run, k);
        assert_eq!(e.members.len(), r.final_set.len());
    }
}

#[test]
fn hypergraph_rejects_foreign_members() {
    let mut h = FailureHypergraph::new(&[0, 1, 2]);
    assert!(matches!(h.push_sets(&[0], &[0, 9]), Err(Error::Integrity(_))));
    assert!(matches!(h.push_sets(&[0, 1], &[0]), Err(Error::Integrity(_))));
}

#[test]
fn cfr_examples() {
    let vertices: Vec<NodeId> = (0..10).collect();
    let single = build_failure_hypergraph(&vertices, &[result(&[0], &[0, 1, 2])]).unwrap();
    assert!((cfr(&single, 0, 10).unwrap() - 0.3).abs() < 1e-9);
    assert_eq!(cfr(&single, 5, 10), None);

    let two = build_failure_hypergraph(&vertices, &[result(&[0], &[0, 1]), result(&[0], &[0, 1, 2, 3])]).unwrap();
    assert!((cfr(&two, 0, 10).unwrap() - 0.3).abs() < 1e-9);
    let (table, trials) = two.cfr_table(10, 10);
    assert_eq!(table[0], cfr(&two, 0, 10));
    assert_eq!((trials[0], trials[1]), (2, 0));
}

#[test]
fn hbc_examples() {
    let got = hbc(Some(0.1), 1).unwrap();
    assert!((got - 0.1 / 2f64.ln()).abs() < 1e-9);
    assert!((got - 0.14427).abs() < 1e-5);
    assert_eq!(hbc(Some(0.0), 5), Some(0.0));
    assert_eq!(hbc(Some(0.5), 0), None);
    assert_eq!(hbc(None, 3), None);
    for d in 1..50 {
        assert!(hbc(Some(0.2), d + 1).unwrap() < hbc(Some(0.2), d).unwrap());
    }
}

#[test]
fn pearson_examples() {
    let x = [1.0, 2.0, 3.0];
    assert!((pearson(&x, &x).unwrap() - 1.0).abs() < 1e-12);
    assert!((pearson(&x, &[-1.0, -2.0, -3.0]).unwrap() + 1.0).abs() < 1e-12);
    // Deviations (-1,0,1) and (-7/3,-1/3,8/3): covariance 5, variances 2 and 114/9.
    let expected = 15.0 / 228f64.sqrt();
    let got = pearson(&x, &[2.0, 4.0, 7.0]).unwrap();
    assert!((got - expected).abs() < 1e-9);
    assert!((got - 0.9934).abs() < 1e-3);
    assert_eq!(pearson(&x, &[2.0, 2.0, 2.0]), None);
    assert_eq!(pearson(&[1.0], &[1.0]), None);
    assert_eq!(pearson(&x, &[1.0, 2.0]), None);
}

#[test]
fn giant_component_examples() {
    let mut net = Net::new();
    let a = net.sat("a", 1.0);
    assert_eq!(giant_component_ratio(&net.build(), None), Some(1.0));
    let b = net.sat("b", 1.0);
    net.link(a, b, EdgeKind::Isl, 1.0);
    assert_eq!(giant_component_ratio(&net.build(), None), Some(1.0));

    let mut net = Net::new();
    let big: Vec<NodeId> = (0..7).map(|i| net.sat(&format!("a{i}"), 1.0)).collect();
    let small: Vec<NodeId> = (0..3).map(|i| net.sat(&format!("b{i}"), 1.0)).collect();
    for part in [&big, &small] {
        for w in part.windows(2) {
            net.link(w[0], w[1], EdgeKind::Isl, 1.0);
        }
    }
    let snap = net.build();
    assert!((giant_component_ratio(&snap, None).unwrap() - 0.7).abs() < 1e-9);
    let mut alive = vec![true; snap.len()];
    alive[big[3]] = false;
    assert!((giant_component_ratio(&snap, Some(&alive)).unwrap() - 3.0 / 9.0).abs() < 1e-12);
}

#[test]
fn users_do_not_count_toward_connectivity() {
    let mut net = Net::new();
    let s = net.sat("s", 1.0);
    let ub = net.beam("ub", NodeKind::UserBeam, s, 1.0, 1.0);
    for i in 0..5 {
        let u = net.user(&format!("u{i}"));
        net.link(u, ub, EdgeKind::Access, 1.0);
    }
    net.sat("t", 1.0);
    assert!((giant_component_ratio(&net.build(), None).unwrap() - 2.0 / 3.0).abs() < 1e-12);
}

#[test]
fn systemic_risk_counts_only_external_links() {
    let mut net = Net::new();
    let sats: Vec<NodeId> = (0..9).map(|i| net.sat(&format!("s{i}"), 1.0)).collect();
    for w in sats.windows(2) {
        net.link(w[0], w[1], EdgeKind::Isl, 10.0);
    }
    let internal: Vec<_> = (0..3)
        .map(|i| {
            net.beam(&format!("ub{i}"), NodeKind::UserBeam, sats[i], 1.0, 10.0);
            net.edges.len() - 1
        })
        .collect();
    let snap = net.build();
    let mut loads = LoadState::for_snapshot(&snap);
    assert_eq!(systemic_risk(&snap, &loads), 0.0);
    loads.edge_load[0] = 10.5;
    loads.edge_load[5] = 11.0;
    loads.edge_load[6] = 10.0;
    for e in internal {
        loads.edge_load[e] = 1e9;
    }
    assert!((systemic_risk(&snap, &loads) - 0.25).abs() < 1e-12);
}

#[test]
fn path_betweenness_and_leaves() {
    let g = Graph::from_edges(3, [(0, 1), (1, 2)]);
    assert_eq!(betweenness(&g), vec![0.0, 1.0, 0.0]);
}

#[test]
fn ring_is_uniform() {
    let n = 8;
    let g = Graph::from_edges(n, (0..n).map(|i| (i, (i + 1) % n)));
    assert!((0..n).all(|v| g.degree(v) == 2));
    let pr = pagerank(&g, PAGERANK_DAMPING, PAGERANK_TOLERANCE);
    let bc = betweenness(&g);
    for v in 1..n {
        assert!((pr[v] - pr[0]).abs() < 1e-9);
        assert!((bc[v] - bc[0]).abs() < 1e-12);
    }
    assert!((pr.iter().sum::<f64>() - 1.0).abs() < 1e-9);
}

#[test]
fn star_pagerank_is_symmetric() {
    let g = Graph::from_edges(6, (1..6).map(|i| (0, i)));
    let pr = pagerank(&g, PAGERANK_DAMPING, PAGERANK_TOLERANCE);
    for v in 2..6 {
        assert!((pr[v] - pr[1]).abs() < 1e-9);
    }
    assert!(pr[0] > pr[1]);
    let bc = betweenness(&g);
    assert!((bc[0] - 1.0).abs() < 1e-12);
    assert!(bc[1..].iter().all(|&b| b == 0.0));
}

/// Pair-dependency sum over all unordered pairs, from BFS path counts.
fn betweenness_oracle(g: &Graph) -> Vec<f64> {
    let n = g.len();
    let bfs = |s: usize| {
        let mut dist = vec![usize::MAX; n];
        let mut sigma = vec![0f64; n];
        dist[s] = 0;
        sigma[s] = 1.0;
        let mut q = VecDeque::from([s]);
        while let Some(v) = q.pop_front() {
            for &w in &g.adjacency[v] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    q.push_back(w);
                }
                if dist[w] == dist[v] + 1 {
                    sigma[w] += sigma[v];
                }
            }
        }
        (dist, sigma)
    };
    let all: Vec<_> = (0..n).map(bfs).collect();
    let mut bc = vec![0.0; n];
    if n < 3 {
        return bc;
    }
    for s in 0..n {
        for t in s + 1..n {
            let (ds, ss) = &all[s];
            if ds[t] == usize::MAX {
                continue;
            }
            for v in 0..n {
                if v == s || v == t || ds[v] == usize::MAX {
                    continue;
                }
                let (dv, sv) = &all[v];
                if dv[t] != usize::MAX && ds[v] + dv[t] == ds[t] {
                    bc[v] += ss[v] * sv[t] / ss[t];
                }
            }
        }
    }
    let pairs = ((n - 1) * (n - 2)) as f64 / 2.0;
    bc.iter().map(|b| b / pairs).collect()
}

fn row(node: NodeId, degree: usize, hbc_value: Option<f64>) -> NodeRisk {
    NodeRisk {
        node,
        label: format!("n{node}"),
        kind: NodeKind::Satellite,
        geodetic: None,
        degree,
        betweenness: 0.0,
        pagerank: 0.0,
        cfr: hbc_value,
        hbc: hbc_value,
        trial_count: 1,
        black_swan: false,
    }
}

#[test]
fn black_swan_examples() {
    let mut rows: Vec<NodeRisk> = (0..10).map(|i| row(i, 3 + i % 4, Some(0.01 * (i % 3) as f64))).collect();
    rows[4] = row(4, 1, Some(0.9));
    rows[9] = row(9, 12, Some(0.5));
    let report = RiskReport { time: T0, rows };
    assert_eq!(detect_black_swans(&report, 20.0, 90.0), vec![4]);

    let flat = RiskReport {
        time: T0,
        rows: (0..10).map(|i| row(i, 1 + i, Some(0.2))).collect(),
    };
    assert!(detect_black_swans(&flat, 20.0, 90.0).is_empty());
}

#[test]
fn impact_ratio_examples() {
    let r = result(&[0, 1], &[0, 1, 2, 3, 4, 5]);
    let c = cir(&r, 2, 600).unwrap();
    assert!((c.leverage - 3.0).abs() < 1e-12);
    assert!((c.network_fraction - 0.01).abs() < 1e-12);
    let quiet = result(&[7], &[7]);
    assert_eq!(cir(&quiet, 1, 10).unwrap().leverage, 1.0);
    assert!(matches!(cir(&quiet, 0, 10), Err(Error::Domain(_))));
}

#[test]
fn nearest_rank_percentile() {
    let v = [15.0, 20.0, 35.0, 40.0, 50.0];
    assert_eq!(percentile_nearest_rank(&v, 30.0), Some(20.0));
    assert_eq!(percentile_nearest_rank(&v, 40.0), Some(20.0));
    assert_eq!(percentile_nearest_rank(&v, 100.0), Some(50.0));
    assert_eq!(percentile_nearest_rank(&v, 0.0), Some(15.0));
    assert_eq!(percentile_nearest_rank(&[], 50.0), None);
}

#[test]
fn report_on_a_synthetic_snapshot() {
    let p = common::parallel_satellites(50.0);
    let snap = &p.snapshot;
    let cent = centralities(snap);
    let mut h = FailureHypergraph::new(&cent.nodes);
    h.push(&result(&[p.s1], &[p.s1, p.s2])).unwrap();
    let report = RiskReport::assemble(snap, &cent, &h, 20.0, 90.0);
    assert_eq!(report.rows.len(), snap.risk_node_count());
    assert!((report.rows.iter().map(|r| r.pagerank).sum::<f64>() - 1.0).abs() < 1e-9);
    let s1 = report.row(p.s1).unwrap();
    assert_eq!(s1.trial_count, 1);
    assert!((s1.cfr.unwrap() - 2.0 / snap.risk_node_count() as f64).abs() < 1e-12);
    assert_eq!(s1.degree, 0);
    assert_eq!(s1.hbc, None);
    assert!(report.row(p.user).is_none());
    let g = report.row(p.gateway).unwrap();
    assert_eq!((g.cfr, g.hbc, g.degree), (None, None, 2));
}

proptest! {
    #[test]
    fn brandes_matches_pair_enumeration(
        n in 1usize..12,
        raw in prop::collection::vec((0usize..12, 0usize..12), 0..30),
    ) {
        let g = Graph::from_edges(n, raw.into_iter().map(|(a, b)| (a % n, b % n)));
        let got = betweenness(&g);
        let want = betweenness_oracle(&g);
        for (a, b) in got.iter().zip(&want) {
            prop_assert!((a - b).abs() < 1e-9, "{:?} vs {:?}", got, want);
            prop_assert!((0.0..=1.0 + 1e-12).contains(a));
        }
        for v in 0..n {
            if g.degree(v) == 1 {
                prop_assert_eq!(got[v], 0.0);
            }
        }
        let pr = pagerank(&g, PAGERANK_DAMPING, PAGERANK_TOLERANCE);
        prop_assert!((pr.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn pearson_of_affine_map_is_one(
        x in prop::collection::vec(-1e3f64..1e3, 2..40),
        a in 0.01f64..100.0,
        b in -1e3f64..1e3,
    ) {
        let y: Vec<f64> = x.iter().map(|v| a * v + b).collect();
        if let Some(r) = pearson(&x, &y) {
            prop_assert!((r - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn hbc_order_does_not_depend_on_log_base(
        entries in prop::collection::vec((0.0f64..1.0, 1usize..40), 1..60),
    ) {
        let argsort = |base: f64| {
            let values: Vec<f64> = entries.iter().map(|&(c, d)| c / (1.0 + d as f64).log(base)).collect();
            let mut idx: Vec<usize> = (0..values.len()).collect();
            idx.sort_by(|&i, &j| values[j].total_cmp(&values[i]).then(i.cmp(&j)));
            idx
        };
        let natural: Vec<usize> = {
            let rows: Vec<NodeRisk> = entries.iter().enumerate().map(|(i, &(c, d))| row(i, d, hbc(Some(c), d))).collect();
            RiskReport { time: T0, rows }.top_by_hbc(usize::MAX).iter().map(|r| r.node).collect()
        };
        let e = argsort(std::f64::consts::E);
        prop_assert_eq!(&natural, &e);
        prop_assert_eq!(&argsort(2.0), &e);
        prop_assert_eq!(&argsort(10.0), &e);
    }

    #[test]
    fn cfr_is_a_fraction_with_a_floor(
        runs in prop::collection::vec((0usize..10, prop::collection::btree_set(0usize..10, 0..10)), 1..20),
    ) {
        let vertices: Vec<NodeId> = (0..10).collect();
        let mut h = FailureHypergraph::new(&vertices);
        for (v, mut extra) in runs {
            extra.insert(v);
            let members: Vec<NodeId> = extra.into_iter().collect();
            h.push_sets(&[v], &members).unwrap();
        }
        for v in 0..10 {
            if let Some(c) = cfr(&h, v, 10) {
                prop_assert!((0.1 - 1e-12..=1.0).contains(&c));
            } else {
                prop_assert_eq!(h.trial_count(v), 0);
            }
        }
    }
}
