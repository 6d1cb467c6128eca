//! Flat `key = value` configuration with dotted keys and `#` comments.

use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::cascade::DEFAULT_MAX_ITER;
use crate::constellation::{PropagationMode, WalkerParams};
use crate::error::{Error, Result};
use crate::risk::{DEFAULT_BLACK_SWAN_DELTA_PCT, DEFAULT_BLACK_SWAN_TAU_PCT};
use crate::routing::DEFAULT_DELTA;
use crate::time::EpochTime;
use crate::topology::{CapacityConfig, TopologyConfig};
use crate::traffic::DemandProfile;

/// Largest attacked share of risk-eligible nodes a sweep may request.
pub const MAX_ATTACK_FRACTION: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Walker,
    Tle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Propagator {
    /// Two-body for Walker patterns, secular J2 for element files.
    Auto,
    TwoBody,
    J2,
}

impl Propagator {
    pub fn resolve(self, source: Source) -> PropagationMode {
        match (self, source) {
            (Propagator::TwoBody, _) | (Propagator::Auto, Source::Walker) => PropagationMode::TwoBody,
            (Propagator::J2, _) | (Propagator::Auto, Source::Tle) => PropagationMode::J2,
        }
    }
}

/// Node ranking used to choose attack targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Metric {
    Hbc,
    Degree,
    Betweenness,
    Pagerank,
    Random,
}

impl Metric {
    pub const ALL: [Metric; 5] = [
        Metric::Hbc,
        Metric::Degree,
        Metric::Betweenness,
        Metric::Pagerank,
        Metric::Random,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Hbc => "hbc",
            Metric::Degree => "degree",
            Metric::Betweenness => "betweenness",
            Metric::Pagerank => "pagerank",
            Metric::Random => "random",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Metric::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| format!("unknown metric `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub source: Source,
    pub tle_path: Option<PathBuf>,
    /// Element epoch for generated patterns; the simulation start when unset.
    pub epoch: Option<EpochTime>,
    pub propagator: Propagator,
    pub strict_tle: bool,
    pub walker: WalkerParams,
    pub topology: TopologyConfig,
    pub cities_path: Option<PathBuf>,
    pub users: usize,
    pub user_radius_km: f64,
    pub placement_seed: u64,
    pub capacity: CapacityConfig,
    pub demand: DemandProfile,
    /// Traffic seed for single-realisation outputs (snapshots and timeseries stress).
    pub traffic_seed: u64,
    pub delta: f64,
    pub max_iter: usize,
    /// Single-node removal trials per candidate, one per trial seed.
    pub trials_per_node: usize,
    pub trial_seed_base: u64,
    pub black_swan_delta_pct: f64,
    pub black_swan_tau_pct: f64,
    pub top_n: usize,
    pub start: EpochTime,
    pub horizon_minutes: i64,
    pub step_minutes: i64,
    pub seeds: Vec<u64>,
    pub alpha_grid: Vec<f64>,
    pub attack_fractions: Vec<f64>,
    pub metrics: Vec<Metric>,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            source: Source::Walker,
            tle_path: None,
            epoch: None,
            propagator: Propagator::Auto,
            strict_tle: true,
            walker: WalkerParams::REFERENCE,
            topology: TopologyConfig::default(),
            cities_path: None,
            users: 800,
            user_radius_km: 50.0,
            placement_seed: 42,
            capacity: CapacityConfig::default(),
            demand: DemandProfile::default(),
            traffic_seed: 1,
            delta: DEFAULT_DELTA,
            max_iter: DEFAULT_MAX_ITER,
            trials_per_node: 5,
            trial_seed_base: 1001,
            black_swan_delta_pct: DEFAULT_BLACK_SWAN_DELTA_PCT,
            black_swan_tau_pct: DEFAULT_BLACK_SWAN_TAU_PCT,
            top_n: 150,
            start: EpochTime::from_unix_ms(1_704_067_200_000),
            horizon_minutes: 90,
            step_minutes: 22,
            seeds: (1..=20).collect(),
            alpha_grid: vec![0.6, 0.7, 0.8, 0.9, 1.0],
            attack_fractions: (1..=100).map(|k| k as f64 / 5000.0).collect(),
            metrics: Metric::ALL.to_vec(),
        }
    }
}

fn parse_num<T: FromStr>(key: &str, raw: &str) -> Result<T>
where
    T::Err: fmt::Display,
{
    raw.parse::<T>()
        .map_err(|e| Error::config(key, format!("cannot parse `{raw}`: {e}")))
}

fn parse_bool(key: &str, raw: &str) -> Result<bool> {
    match raw {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(Error::config(key, format!("expected true or false, got `{raw}`"))),
    }
}

fn parse_path(raw: &str) -> Option<PathBuf> {
    (!raw.is_empty()).then(|| PathBuf::from(raw))
}

fn parse_time(key: &str, raw: &str) -> Result<EpochTime> {
    EpochTime::parse_iso8601(raw).map_err(|e| Error::config(key, e.to_string()))
}

fn parse_list<T: FromStr>(key: &str, raw: &str) -> Result<Vec<T>>
where
    T::Err: fmt::Display,
{
    raw.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_num(key, s))
        .collect()
}

/// Seed lists: comma-separated values or inclusive ranges such as `1..20`.
pub fn parse_seed_list(key: &str, raw: &str) -> Result<Vec<u64>> {
    let mut out = Vec::new();
    for part in raw.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        if let Some((a, b)) = part.split_once("..") {
            let (a, b): (u64, u64) = (parse_num(key, a.trim())?, parse_num(key, b.trim())?);
            if b < a {
                return Err(Error::config(key, format!("empty range `{part}`")));
            }
            out.extend(a..=b);
        } else {
            out.push(parse_num(key, part)?);
        }
    }
    Ok(out)
}

fn join<T: fmt::Display>(values: &[T]) -> String {
    values.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

fn path_str(p: &Option<PathBuf>) -> String {
    p.as_ref().map(|p| p.display().to_string()).unwrap_or_default()
}

impl SimConfig {
    /// Every key with its canonical value, in dump order.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let t = &self.topology;
        let c = &self.capacity;
        vec![
            (
                "constellation.source",
                match self.source {
                    Source::Walker => "walker",
                    Source::Tle => "tle",
                }
                .into(),
            ),
            ("constellation.tle_path", path_str(&self.tle_path)),
            ("constellation.epoch", self.epoch.map(|e| e.to_iso8601()).unwrap_or_default()),
            (
                "constellation.propagator",
                match self.propagator {
                    Propagator::Auto => "auto",
                    Propagator::TwoBody => "two_body",
                    Propagator::J2 => "j2",
                }
                .into(),
            ),
            ("constellation.strict_tle", self.strict_tle.to_string()),
            ("constellation.walker.inclination", self.walker.inclination.to_string()),
            ("constellation.walker.total", self.walker.total.to_string()),
            ("constellation.walker.planes", self.walker.planes.to_string()),
            ("constellation.walker.phasing", self.walker.phasing.to_string()),
            ("constellation.walker.altitude_km", self.walker.altitude_km.to_string()),
            ("topology.isl_max_km", t.isl_max_km.to_string()),
            ("topology.ground_max_km", t.ground_max_km.to_string()),
            ("topology.isl_k_max", t.isl_k_max.to_string()),
            ("topology.min_elevation_deg", t.min_elevation_deg.to_string()),
            ("topology.grazing_margin_km", t.grazing_margin_km.to_string()),
            ("topology.beams_per_sat", t.beams_per_sat.to_string()),
            ("topology.user_top_k", t.user_top_k.to_string()),
            ("topology.gateway_top_k", t.gateway_top_k.to_string()),
            ("topology.expand_hops", t.expand_hops.to_string()),
            ("topology.merge_feeder_beams", t.merge_feeder_beams.to_string()),
            ("ground.cities_path", path_str(&self.cities_path)),
            ("ground.users", self.users.to_string()),
            ("ground.user_radius_km", self.user_radius_km.to_string()),
            ("ground.placement_seed", self.placement_seed.to_string()),
            ("capacity.isl_mbps", c.isl.to_string()),
            ("capacity.feeder_link_mbps", c.feeder_link.to_string()),
            ("capacity.access_link_mbps", c.access_link.to_string()),
            ("capacity.user_beam_mbps", c.user_beam.to_string()),
            ("capacity.feeder_beam_mbps", c.feeder_beam.to_string()),
            ("capacity.gateway_mbps", c.gateway.to_string()),
            ("capacity.satellite_hw_mbps", c.satellite_hw.to_string()),
            ("traffic.target_load", self.demand.target_load.to_string()),
            ("traffic.sigma_hours", self.demand.sigma_hours.to_string()),
            ("traffic.floor", self.demand.floor.to_string()),
            ("traffic.seed", self.traffic_seed.to_string()),
            ("routing.delta", self.delta.to_string()),
            ("cascade.max_iter", self.max_iter.to_string()),
            ("risk.trials_per_node", self.trials_per_node.to_string()),
            ("risk.trial_seed_base", self.trial_seed_base.to_string()),
            ("risk.black_swan_delta_pct", self.black_swan_delta_pct.to_string()),
            ("risk.black_swan_tau_pct", self.black_swan_tau_pct.to_string()),
            ("risk.top_n", self.top_n.to_string()),
            ("sim.start", self.start.to_iso8601()),
            ("sim.horizon_minutes", self.horizon_minutes.to_string()),
            ("sim.step_minutes", self.step_minutes.to_string()),
            ("sim.seeds", join(&self.seeds)),
            ("sim.alpha_grid", join(&self.alpha_grid)),
            ("sim.attack_fractions", join(&self.attack_fractions)),
            ("sim.metrics", join(&self.metrics)),
        ]
    }

    /// Sets one key from its text form without cross-field validation.
    pub fn set(&mut self, key: &str, raw: &str) -> Result<()> {
        let raw = raw.trim();
        let t = &mut self.topology;
        let c = &mut self.capacity;
        match key {
            "constellation.source" => {
                self.source = match raw {
                    "walker" => Source::Walker,
                    "tle" => Source::Tle,
                    _ => return Err(Error::config(key, format!("expected walker or tle, got `{raw}`"))),
                }
            }
            "constellation.tle_path" => self.tle_path = parse_path(raw),
            "constellation.epoch" => {
                self.epoch = if raw.is_empty() {
                    None
                } else {
                    Some(parse_time(key, raw)?)
                }
            }
            "constellation.propagator" => {
                self.propagator = match raw {
                    "auto" => Propagator::Auto,
                    "two_body" => Propagator::TwoBody,
                    "j2" => Propagator::J2,
                    _ => {
                        return Err(Error::config(key, format!("expected auto, two_body or j2, got `{raw}`")))
                    }
                }
            }
            "constellation.strict_tle" => self.strict_tle = parse_bool(key, raw)?,
            "constellation.walker.inclination" => self.walker.inclination = parse_num(key, raw)?,
            "constellation.walker.total" => self.walker.total = parse_num(key, raw)?,
            "constellation.walker.planes" => self.walker.planes = parse_num(key, raw)?,
            "constellation.walker.phasing" => self.walker.phasing = parse_num(key, raw)?,
            "constellation.walker.altitude_km" => self.walker.altitude_km = parse_num(key, raw)?,
            "topology.isl_max_km" => t.isl_max_km = parse_num(key, raw)?,
            "topology.ground_max_km" => t.ground_max_km = parse_num(key, raw)?,
            "topology.isl_k_max" => t.isl_k_max = parse_num(key, raw)?,
            "topology.min_elevation_deg" => t.min_elevation_deg = parse_num(key, raw)?,
            "topology.grazing_margin_km" => t.grazing_margin_km = parse_num(key, raw)?,
            "topology.beams_per_sat" => t.beams_per_sat = parse_num(key, raw)?,
            "topology.user_top_k" => t.user_top_k = parse_num(key, raw)?,
            "topology.gateway_top_k" => t.gateway_top_k = parse_num(key, raw)?,
            "topology.expand_hops" => t.expand_hops = parse_num(key, raw)?,
            "topology.merge_feeder_beams" => t.merge_feeder_beams = parse_bool(key, raw)?,
            "ground.cities_path" => self.cities_path = parse_path(raw),
            "ground.users" => self.users = parse_num(key, raw)?,
            "ground.user_radius_km" => self.user_radius_km = parse_num(key, raw)?,
            "ground.placement_seed" => self.placement_seed = parse_num(key, raw)?,
            "capacity.isl_mbps" => c.isl = parse_num(key, raw)?,
            "capacity.feeder_link_mbps" => c.feeder_link = parse_num(key, raw)?,
            "capacity.access_link_mbps" => c.access_link = parse_num(key, raw)?,
            "capacity.user_beam_mbps" => c.user_beam = parse_num(key, raw)?,
            "capacity.feeder_beam_mbps" => c.feeder_beam = parse_num(key, raw)?,
            "capacity.gateway_mbps" => c.gateway = parse_num(key, raw)?,
            "capacity.satellite_hw_mbps" => c.satellite_hw = parse_num(key, raw)?,
            "traffic.target_load" => self.demand.target_load = parse_num(key, raw)?,
            "traffic.sigma_hours" => self.demand.sigma_hours = parse_num(key, raw)?,
            "traffic.floor" => self.demand.floor = parse_num(key, raw)?,
            "traffic.seed" => self.traffic_seed = parse_num(key, raw)?,
            "routing.delta" => self.delta = parse_num(key, raw)?,
            "cascade.max_iter" => self.max_iter = parse_num(key, raw)?,
            "risk.trials_per_node" => self.trials_per_node = parse_num(key, raw)?,
            "risk.trial_seed_base" => self.trial_seed_base = parse_num(key, raw)?,
            "risk.black_swan_delta_pct" => self.black_swan_delta_pct = parse_num(key, raw)?,
            "risk.black_swan_tau_pct" => self.black_swan_tau_pct = parse_num(key, raw)?,
            "risk.top_n" => self.top_n = parse_num(key, raw)?,
            "sim.start" => self.start = parse_time(key, raw)?,
            "sim.horizon_minutes" => self.horizon_minutes = parse_num(key, raw)?,
            "sim.step_minutes" => self.step_minutes = parse_num(key, raw)?,
            "sim.seeds" => self.seeds = parse_seed_list(key, raw)?,
            "sim.alpha_grid" => self.alpha_grid = parse_list(key, raw)?,
            "sim.attack_fractions" => self.attack_fractions = parse_list(key, raw)?,
            "sim.metrics" => self.metrics = parse_list(key, raw)?,
            _ => return Err(Error::config(key, "unknown key")),
        }
        Ok(())
    }

    /// Parses configuration text over the defaults and validates the result.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = SimConfig::default();
        let mut seen = BTreeSet::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::config(
                    format!("line {}", i + 1),
                    format!("expected `key = value`, got `{line}`"),
                ));
            };
            let key = key.trim();
            if !seen.insert(key.to_string()) {
                return Err(Error::config(key, "key given more than once"));
            }
            cfg.set(key, value)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::config(path.display().to_string(), e.to_string()))?;
        Self::parse(&text)
    }

    /// Canonical text: every key, in a fixed order, with normalised values.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (k, v) in self.entries() {
            if v.is_empty() {
                out.push_str(&format!("{k} =\n"));
            } else {
                out.push_str(&format!("{k} = {v}\n"));
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        if self.source == Source::Walker {
            self.walker.validate()?;
        }
        if self.source == Source::Tle && self.tle_path.is_none() {
            return Err(Error::config("constellation.tle_path", "required when the source is tle"));
        }
        if !(-180.0..=180.0).contains(&self.walker.inclination) {
            return Err(Error::config("constellation.walker.inclination", "must lie in [-180, 180] degrees"));
        }
        let t = &self.topology;
        let positive = [
            ("topology.isl_max_km", t.isl_max_km),
            ("topology.ground_max_km", t.ground_max_km),
            ("ground.user_radius_km", self.user_radius_km),
        ];
        for (key, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::config(key, "must be positive"));
            }
        }
        if !(0.0..90.0).contains(&t.min_elevation_deg) {
            return Err(Error::config("topology.min_elevation_deg", "must lie in [0, 90)"));
        }
        if !(t.grazing_margin_km >= 0.0 && t.grazing_margin_km.is_finite()) {
            return Err(Error::config("topology.grazing_margin_km", "must be non-negative"));
        }
        for (key, v) in [
            ("topology.isl_k_max", t.isl_k_max),
            ("topology.beams_per_sat", t.beams_per_sat),
            ("topology.user_top_k", t.user_top_k),
            ("topology.gateway_top_k", t.gateway_top_k),
        ] {
            if v == 0 {
                return Err(Error::config(key, "must be at least 1"));
            }
        }
        self.capacity.validate()?;
        self.demand.validate()?;
        if !(self.delta >= 0.0 && self.delta.is_finite()) {
            return Err(Error::config("routing.delta", "must be non-negative"));
        }
        if self.max_iter == 0 {
            return Err(Error::config("cascade.max_iter", "must be at least 1"));
        }
        for (key, v) in [
            ("risk.black_swan_delta_pct", self.black_swan_delta_pct),
            ("risk.black_swan_tau_pct", self.black_swan_tau_pct),
        ] {
            if !(0.0..=100.0).contains(&v) {
                return Err(Error::config(key, "must lie in [0, 100]"));
            }
        }
        if self.horizon_minutes < 0 {
            return Err(Error::config("sim.horizon_minutes", "must be non-negative"));
        }
        if self.step_minutes <= 0 {
            return Err(Error::config("sim.step_minutes", "must be positive"));
        }
        let mut distinct = BTreeSet::new();
        if let Some(s) = self.seeds.iter().find(|s| !distinct.insert(**s)) {
            return Err(Error::config("sim.seeds", format!("seed {s} repeated")));
        }
        let trial_end = self.trial_seed_base.saturating_add(self.trials_per_node as u64);
        if let Some(s) = self.seeds.iter().find(|&&s| s >= self.trial_seed_base && s < trial_end) {
            return Err(Error::config(
                "risk.trial_seed_base",
                format!("trial seeds overlap evaluation seed {s}"),
            ));
        }
        if let Some(a) = self.alpha_grid.iter().find(|a| !(0.0..=1.0).contains(*a)) {
            return Err(Error::config("sim.alpha_grid", format!("{a} outside [0, 1]")));
        }
        if let Some(f) = self
            .attack_fractions
            .iter()
            .find(|f| !(**f > 0.0 && **f <= MAX_ATTACK_FRACTION))
        {
            return Err(Error::config(
                "sim.attack_fractions",
                format!("{f} outside (0, {MAX_ATTACK_FRACTION}]"),
            ));
        }
        if self.attack_fractions.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::config("sim.attack_fractions", "must be strictly ascending"));
        }
        let mut metrics = BTreeSet::new();
        if let Some(m) = self.metrics.iter().find(|m| !metrics.insert(**m)) {
            return Err(Error::config("sim.metrics", format!("metric {m} repeated")));
        }
        Ok(())
    }

    pub fn propagation_mode(&self) -> PropagationMode {
        self.propagator.resolve(self.source)
    }

    pub fn parse_mode(&self) -> crate::constellation::ParseMode {
        if self.strict_tle {
            crate::constellation::ParseMode::Strict
        } else {
            crate::constellation::ParseMode::Lenient
        }
    }
}
