//! CSV output.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::harness::SweepReport;
use crate::risk::{RiskReport, TimeseriesPoint};
use crate::topology::Snapshot;

pub const NODE_METRICS_HEADER: &str =
    "time_utc,node_id,kind,lat,lon,degree,betweenness,pagerank,cfr,hbc,trial_count,black_swan";
pub const TOP_NODES_HEADER: &str = "time_utc,rank,node_id,label,kind,lat,lon,alt_km,hbc,cfr,degree";
pub const TIMESERIES_HEADER: &str =
    "time_utc,gcr,systemic_risk,mean_hbc_satellite,mean_hbc_gateway,mean_hbc_feederbeam,mean_hbc_userbeam";
pub const SWEEP_HEADER: &str =
    "time_utc,metric,alpha,fraction,seed,n_attacked,cir_leverage,cir_fraction,unserved_demand,iterations";
pub const SNAPSHOT_HEADER: &str = "src,dst,kind,capacity_mbps,delay_ms,length_km";

/// Nine digits after the leading one, trailing zeros trimmed; exponent form outside [1e-5, 1e9).
pub fn format_float(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{v:.9e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-5..9).contains(&exp) {
        let m = mantissa.trim_end_matches('0').trim_end_matches('.');
        return format!("{m}e{exp}");
    }
    let decimals = (9 - exp).max(0) as usize;
    let fixed = format!("{v:.decimals$}");
    if fixed.contains('.') {
        fixed.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        fixed
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(format_float).unwrap_or_default()
}

pub fn node_metrics_csv(reports: &[RiskReport]) -> String {
    let mut out = format!("{NODE_METRICS_HEADER}\n");
    for report in reports {
        let time = report.time.to_iso8601();
        for r in &report.rows {
            let (lat, lon) = r.geodetic.map_or((None, None), |g| (Some(g.lat), Some(g.lon)));
            writeln!(
                out,
                "{time},{},{},{},{},{},{},{},{},{},{},{}",
                r.node,
                r.kind,
                opt(lat),
                opt(lon),
                r.degree,
                format_float(r.betweenness),
                format_float(r.pagerank),
                opt(r.cfr),
                opt(r.hbc),
                r.trial_count,
                u8::from(r.black_swan)
            )
            .expect("string write");
        }
    }
    out
}

pub fn top_nodes_csv(reports: &[RiskReport], n: usize) -> String {
    let mut out = format!("{TOP_NODES_HEADER}\n");
    for report in reports {
        let time = report.time.to_iso8601();
        for (rank, r) in report.top_by_hbc(n).into_iter().enumerate() {
            let (lat, lon, alt) = r
                .geodetic
                .map_or((None, None, None), |g| (Some(g.lat), Some(g.lon), Some(g.alt)));
            writeln!(
                out,
                "{time},{},{},{},{},{},{},{},{},{},{}",
                rank + 1,
                r.node,
                r.label,
                r.kind,
                opt(lat),
                opt(lon),
                opt(alt),
                opt(r.hbc),
                opt(r.cfr),
                r.degree
            )
            .expect("string write");
        }
    }
    out
}

pub fn timeseries_csv(points: &[TimeseriesPoint]) -> String {
    let mut out = format!("{TIMESERIES_HEADER}\n");
    for p in points {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            p.time.to_iso8601(),
            format_float(p.gcr),
            format_float(p.systemic_risk),
            opt(p.mean_hbc_satellite),
            opt(p.mean_hbc_gateway),
            opt(p.mean_hbc_feederbeam),
            opt(p.mean_hbc_userbeam)
        )
        .expect("string write");
    }
    out
}

pub fn sweep_csv(report: &SweepReport) -> String {
    let mut out = format!("{SWEEP_HEADER}\n");
    for r in &report.rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.time.to_iso8601(),
            r.metric,
            format_float(r.alpha),
            format_float(r.fraction),
            r.seed,
            r.n_attacked,
            opt(r.cir_leverage),
            opt(r.cir_fraction),
            format_float(r.unserved_demand),
            r.iterations
        )
        .expect("string write");
    }
    out
}

/// Edge list with node labels as endpoints.
pub fn snapshot_csv(snapshot: &Snapshot) -> String {
    let mut out = format!("{SNAPSHOT_HEADER}\n");
    for e in &snapshot.edges {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            snapshot.nodes[e.src].label,
            snapshot.nodes[e.dst].label,
            e.kind.as_str(),
            format_float(e.capacity),
            format_float(e.delay_ms),
            format_float(e.length_km)
        )
        .expect("string write");
    }
    out
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}
