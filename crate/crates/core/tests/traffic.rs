mod common;

use common::{Net, T0};
use lsn_cascade::orbital::GeodeticPosition;
use lsn_cascade::time::EpochTime;
use lsn_cascade::topology::{EdgeKind, NodeKind, Snapshot, UserProfile};
use lsn_cascade::traffic::*;
use lsn_cascade::Error;
use proptest::prelude::*;

fn at_hour(h: f64) -> EpochTime {
    T0.plus_seconds(h * 3600.0)
}

#[test]
fn diurnal_peak_and_symmetry() {
    assert!((diurnal_factor(0.0, at_hour(21.0), 3.0, 0.1) - 1.0).abs() < 1e-12);
    // 21:00 local at 90 degrees east is 15:00 UTC.
    assert!((diurnal_factor(90.0, at_hour(15.0), 3.0, 0.0) - 1.0).abs() < 1e-12);
    let before = diurnal_factor(0.0, at_hour(20.0), 3.0, 0.1);
    let after = diurnal_factor(0.0, at_hour(22.0), 3.0, 0.1);
    assert!((before - after).abs() < 1e-12);
}

#[test]
fn diurnal_wraps_around_midnight() {
    let got = diurnal_factor(0.0, at_hour(9.0), 3.0, 0.0);
    assert!((got - (-8.0f64).exp()).abs() < 1e-15);
    assert!((got - 3.35e-4).abs() < 1e-6);
}

fn two_user_snapshot(betas: [f64; 2], weights: [f64; 2], lons: [f64; 2]) -> Snapshot {
    let mut net = Net::new();
    let s = net.sat("s", 1e5);
    let g = net.gateway("g", 1e5);
    let fb = net.beam("fb", NodeKind::FeederBeam, s, 1e5, 1e5);
    net.link(fb, g, EdgeKind::Feeder, 1e5);
    for k in 0..2 {
        let u = net.user(&format!("u{k}"));
        net.nodes[u].profile = Some(UserProfile {
            pop_weight: weights[k],
            beta: betas[k],
        });
        net.nodes[u].geodetic = Some(GeodeticPosition::surface(40.0, lons[k]));
        let ub = net.beam(&format!("ub{k}"), NodeKind::UserBeam, s, 2000.0, 1e5);
        net.link(u, ub, EdgeKind::Access, 2000.0);
    }
    net.build()
}

#[test]
fn adoption_ratio_carries_into_demand() {
    let snap = two_user_snapshot([1.0, 0.3], [1.0, 1.0], [-74.0, -74.0]);
    let flows = raw_flows(&snap, &DemandProfile::default(), T0, 7).unwrap();
    assert!((flows[0].demand / flows[1].demand - 10.0 / 3.0).abs() < 1e-12);
}

#[test]
fn zero_adoption_gives_zero_demand() {
    let snap = two_user_snapshot([0.0, 0.0], [1.0, 1.0], [0.0, 10.0]);
    let flows = generate_flows(&snap, &DemandProfile::default(), T0, 7).unwrap();
    assert!(flows.iter().all(|f| f.demand == 0.0));
    let mut raw = flows.clone();
    assert!(matches!(scale_demands(&mut raw, 0.7, 4000.0), Err(Error::Degenerate(_))));
}

#[test]
fn flows_are_reproducible_and_scaled() {
    let snap = two_user_snapshot([1.0, 0.6], [2.0, 1.0], [0.0, 100.0]);
    let profile = DemandProfile::default();
    let a = generate_flows(&snap, &profile, T0, 11).unwrap();
    let b = generate_flows(&snap, &profile, T0, 11).unwrap();
    assert_eq!(a, b);
    let total: f64 = a.iter().map(|f| f.demand).sum();
    assert_eq!(reference_capacity(&snap), 4000.0);
    assert!((total - 0.7 * 4000.0).abs() < 1e-9 * total);
}

#[test]
fn missing_gateways_is_a_configuration_error() {
    let mut net = Net::new();
    let s = net.sat("s", 1.0);
    let u = net.user("u");
    let ub = net.beam("ub", NodeKind::UserBeam, s, 1.0, 1.0);
    net.link(u, ub, EdgeKind::Access, 1.0);
    let snap = net.build();
    assert!(matches!(
        generate_flows(&snap, &DemandProfile::default(), T0, 1),
        Err(Error::Config { .. })
    ));
}

#[test]
fn scaling_examples() {
    let mut flows: Vec<Flow> = [1.0, 2.0, 3.0]
        .iter()
        .enumerate()
        .map(|(i, &d)| common::flow(i, 0, 0, d))
        .collect();
    scale_demands(&mut flows, 0.5, 120.0).unwrap();
    let got: Vec<f64> = flows.iter().map(|f| f.demand).collect();
    for (g, w) in got.iter().zip([10.0, 20.0, 30.0]) {
        assert!((g - w).abs() < 1e-12);
    }

    let mut flows = vec![common::flow(0, 0, 0, 3.0), common::flow(1, 0, 0, 7.0)];
    scale_demands(&mut flows, 0.5, 10_000.0).unwrap();
    assert!((flows[0].demand + flows[1].demand - 5000.0).abs() < 1e-9);
    assert!(matches!(scale_demands(&mut flows, 0.5, 0.0), Err(Error::Degenerate(_))));
}

proptest! {
    #[test]
    fn scaling_hits_target_and_keeps_ratios(
        raw in prop::collection::vec(1e-3f64..1e3, 1..30),
        target in 0.01f64..=2.0,
        reference in 1.0f64..1e6,
    ) {
        let mut flows: Vec<Flow> = raw.iter().enumerate().map(|(i, &d)| common::flow(i, 0, 0, d)).collect();
        scale_demands(&mut flows, target, reference).unwrap();
        let total: f64 = flows.iter().map(|f| f.demand).sum();
        prop_assert!((total / (target * reference) - 1.0).abs() < 1e-9);
        for (f, r) in flows.iter().zip(&raw) {
            let ratio = f.demand / r / (flows[0].demand / raw[0]);
            prop_assert!((ratio - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn diurnal_is_periodic_and_bounded(lon in -180.0f64..180.0, h in 0.0f64..48.0, floor in 0.0f64..1.0) {
        let a = diurnal_factor(lon, at_hour(h), 3.0, floor);
        let b = diurnal_factor(lon, at_hour(h + 24.0), 3.0, floor);
        prop_assert!((a - b).abs() < 1e-9);
        prop_assert!(a > 0.0 || floor == 0.0);
        prop_assert!(a <= 1.0 + 1e-12);
    }

    #[test]
    fn diurnal_is_continuous_at_midnight(lon in -180.0f64..180.0) {
        let midnight_utc = -lon / 15.0;
        let h = midnight_utc.rem_euclid(24.0);
        let before = diurnal_factor(lon, at_hour(h + 24.0 - 1e-6), 3.0, 0.1);
        let after = diurnal_factor(lon, at_hour(h + 24.0 + 1e-6), 3.0, 0.1);
        prop_assert!((before - after).abs() < 1e-6);
    }

    #[test]
    fn demand_is_monotone_in_weight_and_adoption(
        w in 0.1f64..10.0,
        dw in 0.0f64..5.0,
        beta in 0.0f64..0.5,
        db in 0.0f64..0.5,
        lon in -180.0f64..180.0,
    ) {
        let base = two_user_snapshot([beta, beta + db], [w, w + dw], [lon, lon]);
        let flows = raw_flows(&base, &DemandProfile::default(), T0, 3).unwrap();
        prop_assert!(flows[1].demand >= flows[0].demand);
    }
}
