//! Orchestration: snapshots over time, CFR trial phases, timeseries and attack sweeps.

use log::{info, warn};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::cascade::{AttackScenario, CascadeConfig, CascadeEngine};
use crate::config::{Metric, SimConfig, Source};
use crate::constellation::{constellation_positions, generate_walker, parse_tle};
use crate::error::{Error, Result};
use crate::ground::{parse_site_table, place_ground_segment, GroundSegment, DEFAULT_SITES};
use crate::orbital::{gmst, propagate_tle, rotate_teme_to_ecef, MeanElements};
use crate::risk::{
    centralities, cir, giant_component_ratio, systemic_risk, FailureHypergraph, RiskReport, TimeseriesPoint,
};
use crate::routing::{nominal_edge_capacity, projected_loads, GraphView};
use crate::time::EpochTime;
use crate::topology::{build_snapshot, NodeId, NodeKind, Snapshot, SpaceSegment};
use crate::traffic::{generate_flows, Flow};

/// Environment variable capping worker threads; 0 or unset means one per core.
pub const THREADS_ENV: &str = "HYDRA_THREADS";

/// Worker pool sized from [`THREADS_ENV`].
pub fn thread_pool() -> Result<rayon::ThreadPool> {
    let threads = match std::env::var(THREADS_ENV) {
        Ok(v) if !v.trim().is_empty() => v
            .trim()
            .parse::<usize>()
            .map_err(|e| Error::config(THREADS_ENV, format!("cannot parse `{v}`: {e}")))?,
        _ => 0,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Integrity(format!("cannot start worker pool: {e}")))
}

/// Sample instants: every `step` minutes from `start`, with the last sample moved to
/// the horizon end when the step does not divide the horizon.
pub fn time_grid(start: EpochTime, horizon_minutes: i64, step_minutes: i64) -> Vec<EpochTime> {
    if horizon_minutes <= 0 || step_minutes <= 0 {
        return vec![start];
    }
    let n = horizon_minutes / step_minutes;
    (0..n)
        .map(|k| start.plus_minutes(k * step_minutes))
        .chain(std::iter::once(start.plus_minutes(horizon_minutes)))
        .collect()
}

/// Loaded inputs shared by every command.
#[derive(Debug, Clone)]
pub struct Scenario {
    cfg: SimConfig,
    elements: Vec<MeanElements>,
    ground: GroundSegment,
}

impl Scenario {
    pub fn new(cfg: SimConfig) -> Result<Self> {
        cfg.validate()?;
        let elements = match cfg.source {
            Source::Walker => generate_walker(&cfg.walker, cfg.epoch.unwrap_or(cfg.start))?,
            Source::Tle => {
                let path = cfg.tle_path.as_ref().expect("validated tle path");
                let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
                let parsed = parse_tle(&text, cfg.parse_mode())?;
                for skipped in &parsed.skipped {
                    warn!("skipped element set: {skipped}");
                }
                parsed.records.into_iter().map(|r| r.elements).collect()
            }
        };
        let sites_text = match &cfg.cities_path {
            Some(p) => std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?,
            None => DEFAULT_SITES.to_string(),
        };
        let sites = parse_site_table(&sites_text)?;
        let ground = place_ground_segment(&sites, cfg.users, cfg.user_radius_km, cfg.placement_seed)?;
        if ground.gateways.is_empty() {
            return Err(Error::config("ground.cities_path", "the site table has no gateways"));
        }
        Ok(Self { cfg, elements, ground })
    }

    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    pub fn elements(&self) -> &[MeanElements] {
        &self.elements
    }

    pub fn ground(&self) -> &GroundSegment {
        &self.ground
    }

    pub fn time_grid(&self) -> Vec<EpochTime> {
        time_grid(self.cfg.start, self.cfg.horizon_minutes, self.cfg.step_minutes)
    }

    pub fn cascade_config(&self) -> CascadeConfig {
        CascadeConfig {
            delta: self.cfg.delta,
            max_iter: self.cfg.max_iter,
        }
    }

    pub fn snapshot_at(&self, t: EpochTime) -> Result<Snapshot> {
        let positions = match self.cfg.source {
            Source::Walker => constellation_positions(&self.elements, t, self.cfg.propagation_mode())?,
            // Element files go through the age-checked propagator.
            Source::Tle => {
                let theta = gmst(t)?;
                self.elements
                    .iter()
                    .map(|el| Ok(rotate_teme_to_ecef(&propagate_tle(el, t)?, theta)))
                    .collect::<Result<Vec<_>>>()?
            }
        };
        build_snapshot(
            t,
            SpaceSegment { positions: &positions },
            &self.ground,
            &self.cfg.topology,
            &self.cfg.capacity,
        )
    }

    pub fn flows(&self, snapshot: &Snapshot, seed: u64) -> Result<Vec<Flow>> {
        generate_flows(snapshot, &self.cfg.demand, snapshot.time, seed)
    }

    fn trial_seeds(&self) -> impl Iterator<Item = u64> {
        let base = self.cfg.trial_seed_base;
        (0..self.cfg.trials_per_node as u64).map(move |r| base + r)
    }

    /// Single-node hard-removal trials of every risk-eligible node under each trial seed.
    /// Nodes already failed in a seed's unattacked equilibrium are not trialled there.
    pub fn trial_hypergraph(&self, snapshot: &Snapshot) -> Result<FailureHypergraph> {
        let risk_nodes: Vec<NodeId> = snapshot
            .nodes
            .iter()
            .filter(|n| n.kind.is_risk_eligible())
            .map(|n| n.id)
            .collect();
        let mut hypergraph = FailureHypergraph::new(&risk_nodes);
        for seed in self.trial_seeds() {
            let flows = self.flows(snapshot, seed)?;
            let engine = CascadeEngine::new(snapshot, &flows, self.cascade_config())?;
            let candidates: Vec<NodeId> = risk_nodes
                .iter()
                .copied()
                .filter(|&v| !engine.is_baseline_down(v))
                .collect();
            let outcomes: Vec<(Vec<NodeId>, Vec<NodeId>)> = candidates
                .par_iter()
                .map(|&v| {
                    let r = engine.run(&AttackScenario::uniform([v], 1.0))?;
                    Ok((r.initial, r.final_set))
                })
                .collect::<Result<_>>()?;
            for (initial, members) in &outcomes {
                hypergraph.push_sets(initial, members)?;
            }
        }
        Ok(hypergraph)
    }

    /// Centralities plus CFR/HBC from the trial phase.
    pub fn risk_report(&self, snapshot: &Snapshot) -> Result<RiskReport> {
        let cent = centralities(snapshot);
        let hypergraph = self.trial_hypergraph(snapshot)?;
        Ok(RiskReport::assemble(
            snapshot,
            &cent,
            &hypergraph,
            self.cfg.black_swan_delta_pct,
            self.cfg.black_swan_tau_pct,
        ))
    }

    /// Connectivity and link stress of one snapshot under the configured traffic seed.
    /// Link stress uses fixed-demand projection onto unloaded shortest paths.
    pub fn stress_point(&self, snapshot: &Snapshot, report: &RiskReport) -> Result<TimeseriesPoint> {
        let gcr = giant_component_ratio(snapshot, None)
            .ok_or_else(|| Error::Degenerate(format!("snapshot at {} has no network nodes", snapshot.time)))?;
        let flows = self.flows(snapshot, self.cfg.traffic_seed)?;
        let up = vec![true; snapshot.len()];
        let caps = nominal_edge_capacity(snapshot);
        let loads = projected_loads(&GraphView::new(snapshot, &up, &caps), &flows, self.cfg.delta);
        Ok(TimeseriesPoint {
            time: snapshot.time,
            gcr,
            systemic_risk: systemic_risk(snapshot, &loads),
            mean_hbc_satellite: report.mean_hbc(NodeKind::Satellite),
            mean_hbc_gateway: report.mean_hbc(NodeKind::Gateway),
            mean_hbc_feederbeam: report.mean_hbc(NodeKind::FeederBeam),
            mean_hbc_userbeam: report.mean_hbc(NodeKind::UserBeam),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Timeseries {
    pub points: Vec<TimeseriesPoint>,
    pub reports: Vec<RiskReport>,
}

pub fn run_timeseries(scenario: &Scenario) -> Result<Timeseries> {
    let mut points = Vec::new();
    let mut reports = Vec::new();
    for t in scenario.time_grid() {
        let snapshot = scenario.snapshot_at(t)?;
        let report = scenario.risk_report(&snapshot)?;
        let point = scenario.stress_point(&snapshot, &report)?;
        info!(
            "{t}: {} nodes, gcr {:.4}, systemic risk {:.4}",
            snapshot.len(),
            point.gcr,
            point.systemic_risk
        );
        points.push(point);
        reports.push(report);
    }
    Ok(Timeseries { points, reports })
}

fn metric_value(row: &crate::risk::NodeRisk, metric: Metric) -> Option<f64> {
    match metric {
        Metric::Hbc => row.hbc,
        Metric::Degree => Some(row.degree as f64),
        Metric::Betweenness => Some(row.betweenness),
        Metric::Pagerank => Some(row.pagerank),
        Metric::Random => None,
    }
}

/// Every node with a defined value, highest first, ties by ascending id.
pub fn full_ranking(report: &RiskReport, metric: Metric) -> Result<Vec<NodeId>> {
    if metric == Metric::Random {
        return Err(Error::Unsupported("the random metric has no deterministic ranking".into()));
    }
    let mut scored: Vec<(f64, NodeId)> = report
        .rows
        .iter()
        .filter_map(|r| metric_value(r, metric).map(|v| (v, r.node)))
        .collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    Ok(scored.into_iter().map(|(_, v)| v).collect())
}

/// Top `k` nodes by `metric`. Returns fewer, with a warning, when fewer are ranked.
pub fn rank_targets(report: &RiskReport, metric: Metric, k: usize) -> Result<Vec<NodeId>> {
    let mut ranked = full_ranking(report, metric)?;
    if ranked.len() < k {
        warn!("only {} nodes ranked by {metric}, {k} requested", ranked.len());
    }
    ranked.truncate(k);
    Ok(ranked)
}

/// Number of targets for an attacked share of `n_risk` nodes.
pub fn target_count(fraction: f64, n_risk: usize) -> usize {
    // Guard against products like 0.0006 * 5000 landing a hair above an integer.
    let raw = fraction * n_risk as f64;
    let rounded = raw.round();
    if (raw - rounded).abs() < 1e-9 {
        rounded as usize
    } else {
        raw.ceil() as usize
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub time: EpochTime,
    pub metric: Metric,
    pub alpha: f64,
    pub fraction: f64,
    pub seed: u64,
    pub n_attacked: usize,
    pub cir_leverage: Option<f64>,
    pub cir_fraction: Option<f64>,
    pub unserved_demand: f64,
    pub iterations: usize,
}

/// Rows ordered by time, metric, alpha, fraction, seed.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
}

impl SweepReport {
    /// Mean leverage over rows matching the filter, skipping undefined cells.
    pub fn mean_leverage(&self, filter: impl Fn(&SweepRow) -> bool) -> Option<f64> {
        let v: Vec<f64> = self.rows.iter().filter(|r| filter(r)).filter_map(|r| r.cir_leverage).collect();
        crate::risk::mean(&v)
    }
}

/// Attack sweep over the configured time grid.
pub fn run_attack_sweep(scenario: &Scenario) -> Result<SweepReport> {
    let mut rows = Vec::new();
    for (ti, t) in scenario.time_grid().into_iter().enumerate() {
        let snapshot = scenario.snapshot_at(t)?;
        rows.extend(sweep_snapshot(scenario, &snapshot, ti as u64)?);
    }
    Ok(SweepReport { rows })
}

/// Sweep cells of one snapshot. `stream` separates random target draws across snapshots.
pub fn sweep_snapshot(scenario: &Scenario, snapshot: &Snapshot, stream: u64) -> Result<Vec<SweepRow>> {
    let cfg = scenario.config();
    let report = if cfg.metrics.contains(&Metric::Hbc) {
        scenario.risk_report(snapshot)?
    } else {
        RiskReport::assemble(
            snapshot,
            &centralities(snapshot),
            &FailureHypergraph::default(),
            cfg.black_swan_delta_pct,
            cfg.black_swan_tau_pct,
        )
    };
    let rankings: Vec<Option<Vec<NodeId>>> = cfg
        .metrics
        .iter()
        .map(|&m| (m != Metric::Random).then(|| full_ranking(&report, m)).transpose())
        .collect::<Result<_>>()?;
    let n_risk = snapshot.risk_node_count();
    let n_total = snapshot.len();

    let engines: Vec<CascadeEngine<'_>> = cfg
        .seeds
        .par_iter()
        .map(|&s| {
            let flows = scenario.flows(snapshot, s)?;
            CascadeEngine::new(snapshot, &flows, scenario.cascade_config())
        })
        .collect::<Result<_>>()?;

    // Random draws: one shuffled order of the live risk nodes per seed, prefixes taken.
    let shuffled: Vec<Vec<NodeId>> = cfg
        .seeds
        .iter()
        .zip(&engines)
        .map(|(&s, engine)| {
            let mut pool: Vec<NodeId> = report
                .rows
                .iter()
                .map(|r| r.node)
                .filter(|&v| !engine.is_baseline_down(v))
                .collect();
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            rng.set_stream(stream + 1);
            pool.shuffle(&mut rng);
            pool
        })
        .collect();

    let mut cells = Vec::new();
    for mi in 0..cfg.metrics.len() {
        for ai in 0..cfg.alpha_grid.len() {
            for fi in 0..cfg.attack_fractions.len() {
                for si in 0..cfg.seeds.len() {
                    cells.push((mi, ai, fi, si));
                }
            }
        }
    }
    cells
        .par_iter()
        .map(|&(mi, ai, fi, si)| {
            let engine = &engines[si];
            let fraction = cfg.attack_fractions[fi];
            let alpha = cfg.alpha_grid[ai];
            let k = target_count(fraction, n_risk);
            let targets: Vec<NodeId> = match &rankings[mi] {
                Some(order) => order
                    .iter()
                    .copied()
                    .filter(|&v| !engine.is_baseline_down(v))
                    .take(k)
                    .collect(),
                None => shuffled[si].iter().copied().take(k).collect(),
            };
            let result = engine.run(&AttackScenario::uniform(targets.iter().copied(), alpha))?;
            let impact = cir(&result, result.initial.len(), n_total).ok();
            Ok(SweepRow {
                time: snapshot.time,
                metric: cfg.metrics[mi],
                alpha,
                fraction,
                seed: cfg.seeds[si],
                n_attacked: result.initial.len(),
                cir_leverage: impact.map(|c| c.leverage),
                cir_fraction: impact.map(|c| c.network_fraction),
                unserved_demand: result.unserved_demand,
                iterations: result.iterations,
            })
        })
        .collect()
}
