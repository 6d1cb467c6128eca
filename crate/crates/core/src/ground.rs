//! Ground segment: metro areas, gateways, and user placement.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::orbital::{destination_point, GeodeticPosition};

/// Built-in site table (eight metros, ten gateways).
pub const DEFAULT_SITES: &str = include_str!("../data/sites.csv");

pub const HEADER: [&str; 6] = ["name", "lat", "lon", "population_weight", "adoption_beta", "is_gateway"];

#[derive(Debug, Clone, PartialEq)]
pub struct GroundSite {
    pub name: String,
    pub lat: f64,
    pub lon: f64,
    pub population_weight: f64,
    pub adoption_beta: f64,
    pub is_gateway: bool,
}

/// Parses the comma-delimited site table. Lines starting with '#' are comments.
pub fn parse_site_table(text: &str) -> Result<Vec<GroundSite>> {
    let mut rows = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
    let (_, header) = rows
        .next()
        .ok_or_else(|| Error::InputData("site table is empty".into()))?;
    let columns: Vec<&str> = header.split(',').map(str::trim).collect();
    if columns != HEADER {
        return Err(Error::InputData(format!(
            "site table header must be `{}`, found `{header}`",
            HEADER.join(",")
        )));
    }
    let mut sites = Vec::new();
    for (i, line) in rows {
        let lineno = i + 1;
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        if cells.len() != HEADER.len() {
            return Err(Error::InputData(format!(
                "site table line {lineno}: expected {} fields, found {}",
                HEADER.len(),
                cells.len()
            )));
        }
        let num = |idx: usize| -> Result<f64> {
            cells[idx].parse::<f64>().map_err(|_| {
                Error::InputData(format!("site table line {lineno}: bad {} `{}`", HEADER[idx], cells[idx]))
            })
        };
        let site = GroundSite {
            name: cells[0].to_owned(),
            lat: num(1)?,
            lon: num(2)?,
            population_weight: num(3)?,
            adoption_beta: num(4)?,
            is_gateway: match cells[5] {
                "1" | "true" => true,
                "0" | "false" => false,
                other => {
                    return Err(Error::InputData(format!(
                        "site table line {lineno}: is_gateway must be 0 or 1, found `{other}`"
                    )))
                }
            },
        };
        if !(-90.0..=90.0).contains(&site.lat) || !(-180.0..=180.0).contains(&site.lon) {
            return Err(Error::InputData(format!("site table line {lineno}: coordinates out of range")));
        }
        if !(0.0..=1.0).contains(&site.adoption_beta) || !(site.population_weight >= 0.0) {
            return Err(Error::InputData(format!(
                "site table line {lineno}: adoption_beta must be in [0, 1] and population_weight >= 0"
            )));
        }
        sites.push(site);
    }
    Ok(sites)
}

#[derive(Debug, Clone, PartialEq)]
pub struct UserSite {
    /// Index of the metro row in the site table.
    pub city: usize,
    pub position: GeodeticPosition,
    /// Share of the metro population represented by this terminal.
    pub pop_weight: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GatewaySite {
    pub name: String,
    pub position: GeodeticPosition,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundSegment {
    pub users: Vec<UserSite>,
    pub gateways: Vec<GatewaySite>,
}

/// Splits `total` into integer counts proportional to `weights` (largest remainder).
pub fn apportion(total: usize, weights: &[f64]) -> Vec<usize> {
    let sum: f64 = weights.iter().sum();
    if weights.is_empty() || sum <= 0.0 {
        return vec![0; weights.len()];
    }
    let quotas: Vec<f64> = weights.iter().map(|w| total as f64 * w / sum).collect();
    let mut counts: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        let (fa, fb) = (quotas[a] - quotas[a].floor(), quotas[b] - quotas[b].floor());
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    let assigned: usize = counts.iter().sum();
    for &i in order.iter().take(total.saturating_sub(assigned)) {
        counts[i] += 1;
    }
    counts
}

/// Places `n_users` terminals across metros in proportion to population, each
/// uniformly inside a disc of `radius_km` around its metro centre.
pub fn place_ground_segment(
    sites: &[GroundSite],
    n_users: usize,
    radius_km: f64,
    seed: u64,
) -> Result<GroundSegment> {
    let metros: Vec<(usize, &GroundSite)> = sites
        .iter()
        .enumerate()
        .filter(|(_, s)| !s.is_gateway && s.population_weight > 0.0)
        .collect();
    if n_users > 0 && metros.is_empty() {
        return Err(Error::InputData("site table has no populated metro rows".into()));
    }
    let weights: Vec<f64> = metros.iter().map(|(_, s)| s.population_weight).collect();
    let counts = apportion(n_users, &weights);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut users = Vec::with_capacity(n_users);
    for ((city, site), count) in metros.iter().zip(counts) {
        let centre = GeodeticPosition::surface(site.lat, site.lon);
        for _ in 0..count {
            let bearing = rng.gen_range(0.0..360.0);
            let distance = radius_km * rng.gen::<f64>().sqrt();
            let mut position = destination_point(&centre, bearing, distance);
            position.alt = 0.0;
            users.push(UserSite {
                city: *city,
                position,
                pop_weight: site.population_weight / count as f64,
                beta: site.adoption_beta,
            });
        }
    }
    let gateways = sites
        .iter()
        .filter(|s| s.is_gateway)
        .map(|s| GatewaySite {
            name: s.name.clone(),
            position: GeodeticPosition::surface(s.lat, s.lon),
        })
        .collect();
    Ok(GroundSegment { users, gateways })
}
