mod common;

use std::collections::BTreeSet;

use common::Net;
use lsn_cascade::config::SimConfig;
use lsn_cascade::ground::GroundSegment;
use lsn_cascade::harness::Scenario;
use lsn_cascade::orbital::{destination_point, elevation_angle, EcefPosition, GeodeticPosition};
use lsn_cascade::topology::*;
use lsn_cascade::Error;
use proptest::prelude::*;

fn sat_at(lat: f64, lon: f64, alt: f64) -> EcefPosition {
    GeodeticPosition::new(lat, lon, alt).to_ecef()
}

#[test]
fn shannon_examples() {
    assert!((shannon_capacity(1000.0, 15.0).unwrap() - 4000.0).abs() < 1e-9);
    assert_eq!(shannon_capacity(1000.0, 0.0).unwrap(), 0.0);
    assert!((shannon_capacity(100.0, 1.0).unwrap() - 100.0).abs() < 1e-12);
    assert!(matches!(shannon_capacity(-1.0, 1.0), Err(Error::Domain(_))));
    assert!(matches!(shannon_capacity(10.0, -1.0), Err(Error::Domain(_))));
}

#[test]
fn link_snr_scaling_laws() {
    let base = link_snr(10.0, 1e4, 1e4, 4e-21, 1e9, 1000.0, 193_000.0).unwrap();
    let far = link_snr(10.0, 1e4, 1e4, 4e-21, 1e9, 2000.0, 193_000.0).unwrap();
    let wide = link_snr(10.0, 1e4, 1e4, 4e-21, 2e9, 1000.0, 193_000.0).unwrap();
    assert!((base / far / 4.0 - 1.0).abs() < 1e-9);
    assert!((base / wide / 2.0 - 1.0).abs() < 1e-9);
}

#[test]
fn link_snr_reference_value() {
    // Evaluated separately in SI units: P G G / (N0 B (4 pi d f / c)^2).
    let expected = 3.819_856_678_799_061_5e-6;
    let got = link_snr(10.0, 1e4, 1e4, 4e-21, 1e9, 1000.0, 193_000.0).unwrap();
    assert!((got / expected - 1.0).abs() < 1e-9, "{got}");
}

#[test]
fn link_snr_rejects_zero_inputs() {
    assert!(matches!(link_snr(10.0, 1.0, 1.0, 1e-20, 0.0, 1000.0, 20.0), Err(Error::Domain(_))));
    assert!(matches!(link_snr(10.0, 1.0, 1.0, 1e-20, 1e6, 0.0, 20.0), Err(Error::Domain(_))));
}

fn satellite_with_isls(hw: f64, feeder: bool) -> (Snapshot, NodeId) {
    let mut net = Net::new();
    let hub = net.sat("hub", 1.0);
    for i in 0..4 {
        let s = net.sat(&format!("n{i}"), 1.0);
        net.link(hub, s, EdgeKind::Isl, 1.0);
    }
    if feeder {
        let g = net.gateway("g", 1.0);
        let fb = net.beam("fb", NodeKind::FeederBeam, hub, 1.0, 1.0);
        net.link(fb, g, EdgeKind::Feeder, 1.0);
    }
    net.sat("lonely", 1.0);
    for n in &mut net.nodes {
        if n.kind == NodeKind::Satellite {
            n.hardware_cap = Some(hw);
        }
    }
    (net.build(), hub)
}

#[test]
fn satellite_capacity_clamps_to_hardware() {
    let (mut snap, hub) = satellite_with_isls(100_000.0, false);
    assign_capacities(&mut snap, &CapacityConfig::default());
    assert_eq!(snap.nodes[hub].capacity, 100_000.0);
}

#[test]
fn satellite_capacity_sums_physical_links() {
    let (mut snap, hub) = satellite_with_isls(1_000_000.0, true);
    let caps = CapacityConfig::default();
    assign_capacities(&mut snap, &caps);
    assert_eq!(snap.nodes[hub].capacity, 4.0 * 40_000.0 + 20_000.0);
    let lonely = snap.find("lonely").unwrap();
    assert_eq!(snap.nodes[lonely].capacity, 0.0);
    for e in &snap.edges {
        let want = match e.kind {
            EdgeKind::Isl => caps.isl,
            EdgeKind::Feeder => caps.feeder_link,
            EdgeKind::Access => caps.access_link,
            EdgeKind::Internal => caps.satellite_hw,
        };
        assert_eq!(e.capacity, want);
    }
    let g = snap.find("g").unwrap();
    assert_eq!(snap.nodes[g].capacity, caps.gateway);
}

#[test]
fn assign_capacities_is_idempotent() {
    let (mut snap, _) = satellite_with_isls(150_000.0, true);
    let caps = CapacityConfig::default();
    assign_capacities(&mut snap, &caps);
    let once = snap.clone();
    assign_capacities(&mut snap, &caps);
    assert_eq!(once.nodes, snap.nodes);
    assert_eq!(once.edges, snap.edges);
}

#[test]
fn snapshot_rejects_mistyped_and_parallel_edges() {
    let mut net = Net::new();
    let s = net.sat("s", 1.0);
    let g = net.gateway("g", 1.0);
    net.link(s, g, EdgeKind::Isl, 1.0);
    assert!(matches!(Snapshot::new(common::T0, net.nodes.clone(), net.edges.clone()), Err(Error::Integrity(_))));

    let mut net = Net::new();
    let a = net.sat("a", 1.0);
    let b = net.sat("b", 1.0);
    net.link(a, b, EdgeKind::Isl, 1.0);
    net.link(b, a, EdgeKind::Isl, 1.0);
    assert!(matches!(Snapshot::new(common::T0, net.nodes.clone(), net.edges.clone()), Err(Error::Integrity(_))));
}

#[test]
fn top_visible_ranks_by_elevation_then_distance() {
    let ground = GeodeticPosition::surface(0.0, 0.0);
    let sats = vec![
        sat_at(0.0, 0.0, 1000.0),
        sat_at(0.0, 0.0, 550.0),
        sat_at(2.0, 0.0, 550.0),
        sat_at(0.0, 4.0, 550.0),
        sat_at(-6.0, 0.0, 550.0),
    ];
    let cfg = TopologyConfig::default();
    let got = top_visible(&ground.to_ecef(), &sats, 3, &cfg);

    let mut oracle: Vec<(f64, f64, usize)> = sats
        .iter()
        .enumerate()
        .map(|(i, s)| (elevation_angle(&ground, s), ground.to_ecef().distance_to(s), i))
        .filter(|c| c.0 >= cfg.min_elevation_deg && c.1 <= cfg.ground_max_km)
        .collect();
    oracle.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.total_cmp(&b.1)));
    let want: Vec<usize> = oracle.iter().take(3).map(|c| c.2).collect();
    assert_eq!(got, want);
    assert_eq!(&got[..2], &[1, 0]);
}

#[test]
fn no_ground_nodes_means_nothing_active() {
    let sats = vec![sat_at(0.0, 0.0, 550.0)];
    assert!(select_active_satellites(&sats, &[], &[], &TopologyConfig::default()).is_empty());
}

#[test]
fn one_hop_expansion_along_a_chain() {
    let user = GeodeticPosition::surface(0.0, 0.0).to_ecef();
    let sats = vec![sat_at(0.0, 0.0, 550.0), sat_at(0.0, 30.0, 550.0), sat_at(0.0, 60.0, 550.0)];
    let cfg = TopologyConfig {
        expand_hops: 1,
        ..TopologyConfig::default()
    };
    assert_eq!(select_active_satellites(&sats, &[user], &[], &cfg), vec![0, 1]);
}

#[test]
fn isl_pair_in_and_out_of_range() {
    let cfg = TopologyConfig::default();
    let near = vec![EcefPosition::new(7000.0, -1000.0, 0.0), EcefPosition::new(7000.0, 1000.0, 0.0)];
    let edges = build_isl_mesh(&[0, 1], &near, &cfg);
    assert_eq!(edges.len(), 1);
    assert_eq!((edges[0].0, edges[0].1), (0, 1));

    let far = vec![EcefPosition::new(7000.0, -2500.5, 0.0), EcefPosition::new(7000.0, 2500.5, 0.0)];
    assert!(build_isl_mesh(&[0, 1], &far, &cfg).is_empty());
}

#[test]
fn isl_ring_respects_degree_cap() {
    let cfg = TopologyConfig::default();
    let ring: Vec<EcefPosition> = (0..6)
        .map(|k| {
            let a = k as f64 * std::f64::consts::TAU / 6.0;
            EcefPosition::new(7000.0, 1000.0 * a.cos(), 1000.0 * a.sin())
        })
        .collect();
    let active: Vec<usize> = (0..6).collect();
    let edges = build_isl_mesh(&active, &ring, &cfg);
    let mut degree = [0usize; 6];
    let mut seen = BTreeSet::new();
    for &(a, b, d) in &edges {
        degree[a] += 1;
        degree[b] += 1;
        assert!(seen.insert((a.min(b), a.max(b))));
        assert!((ring[a].distance_to(&ring[b]) - d).abs() < 1e-9);
    }
    assert!(degree.iter().all(|&d| d <= cfg.isl_k_max), "{degree:?}");
    assert!(!edges.is_empty());
}

#[test]
fn beam_sectors_are_thirty_degrees() {
    let centre = GeodeticPosition::surface(10.0, 20.0);
    let target = destination_point(&centre, 45.0, 100.0);
    assert_eq!(beam_sector(&centre, &target, 12), 1);
    for k in 0..12 {
        let bearing = k as f64 * 30.0 + 15.0;
        let target = destination_point(&centre, bearing, 200.0);
        assert_eq!(beam_sector(&centre, &target, 12), k);
    }
}

#[test]
fn satellite_without_gateway_gets_no_feeder_beam() {
    let sats = vec![sat_at(0.0, 0.0, 550.0)];
    let far_gateway = GeodeticPosition::surface(0.0, 90.0).to_ecef();
    let plans = instantiate_beams(&[0], &sats, &[far_gateway], &TopologyConfig::default());
    assert_eq!(plans[0].user_beams, 12);
    assert!(plans[0].feeder_gateways.is_empty());
}

#[test]
fn empty_ground_segment_gives_empty_snapshot() {
    let ground = GroundSegment {
        users: Vec::new(),
        gateways: Vec::new(),
    };
    let sats = vec![sat_at(0.0, 0.0, 550.0)];
    let snap = build_snapshot(
        common::T0,
        SpaceSegment { positions: &sats },
        &ground,
        &TopologyConfig::default(),
        &CapacityConfig::default(),
    )
    .unwrap();
    assert!(snap.is_empty());
    assert!(snap.edges.is_empty());
}

#[test]
fn walker_snapshots_hold_structural_invariants() {
    let scenario = Scenario::new(SimConfig::default()).unwrap();
    let cfg = scenario.config().topology;
    for t in scenario.time_grid() {
        let snap = scenario.snapshot_at(t).unwrap();
        snap.validate().unwrap();
        assert!(snap.count(NodeKind::Satellite) > 0);
        for n in &snap.nodes {
            match n.kind {
                NodeKind::Satellite => assert!(snap.isl_degree(n.id) <= cfg.isl_k_max),
                NodeKind::UserBeam => {
                    assert_eq!(snap.kind(n.parent.unwrap()), NodeKind::Satellite);
                }
                NodeKind::User => {
                    let parents: BTreeSet<NodeId> = snap
                        .neighbors(n.id)
                        .iter()
                        .map(|&(b, e)| {
                            assert_eq!(snap.edges[e].kind, EdgeKind::Access);
                            snap.nodes[b].parent.unwrap()
                        })
                        .collect();
                    assert!(!parents.is_empty(), "user {} has no access at {t}", n.label);
                    assert!(parents.len() <= cfg.user_top_k);
                    for p in parents {
                        let el = elevation_angle(&n.geodetic.unwrap(), &snap.nodes[p].position);
                        assert!(el >= cfg.min_elevation_deg - 1e-9, "elevation {el}");
                    }
                }
                _ => {}
            }
        }
        for e in &snap.edges {
            if e.kind == EdgeKind::Internal {
                assert_eq!(e.delay_ms, 0.0);
            } else {
                let want = e.length_km / 299_792.458 * 1e3;
                assert!((e.delay_ms - want).abs() <= 1e-9 * want.max(1.0));
            }
        }
    }
}

#[test]
fn snapshots_are_reproducible() {
    let scenario = Scenario::new(SimConfig::default()).unwrap();
    let t = scenario.config().start;
    let a = scenario.snapshot_at(t).unwrap();
    let b = Scenario::new(SimConfig::default()).unwrap().snapshot_at(t).unwrap();
    assert_eq!(a.nodes, b.nodes);
    assert_eq!(a.edges, b.edges);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn selection_ignores_satellite_order(
        sats in prop::collection::vec((-30.0f64..30.0, -30.0f64..30.0), 4..24),
        users in prop::collection::vec((-20.0f64..20.0, -20.0f64..20.0), 1..4),
        rot in 0usize..24,
    ) {
        let pos: Vec<EcefPosition> = sats.iter().map(|&(la, lo)| sat_at(la, lo, 550.0)).collect();
        let ground: Vec<EcefPosition> = users.iter().map(|&(la, lo)| GeodeticPosition::surface(la, lo).to_ecef()).collect();
        let n = pos.len();
        let perm: Vec<usize> = (0..n).map(|i| (i * 7 + rot) % n).collect();
        let unique: BTreeSet<usize> = perm.iter().copied().collect();
        prop_assume!(unique.len() == n);
        let shuffled: Vec<EcefPosition> = perm.iter().map(|&i| pos[i]).collect();
        let cfg = TopologyConfig::default();
        let direct: BTreeSet<usize> = select_active_satellites(&pos, &ground, &ground, &cfg).into_iter().collect();
        let mapped: BTreeSet<usize> = select_active_satellites(&shuffled, &ground, &ground, &cfg)
            .into_iter()
            .map(|i| perm[i])
            .collect();
        prop_assert_eq!(direct, mapped);
    }
}
