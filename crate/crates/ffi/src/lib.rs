//! C interface to the simulator.
//!
//! Objects are opaque handles created by `lsn_*_new`/`lsn_*_run` style functions and
//! released with the matching `lsn_*_free`. Every fallible call returns an [`LsnStatus`];
//! on failure the message is available from [`lsn_last_error`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use lsn_cascade::cascade::{AttackScenario, CascadeEngine, Termination};
use lsn_cascade::config::SimConfig;
use lsn_cascade::harness::{run_timeseries, Scenario, Timeseries};
use lsn_cascade::report::{node_metrics_csv, timeseries_csv, top_nodes_csv, write_file};
use lsn_cascade::risk::RiskReport;
use lsn_cascade::time::EpochTime;
use lsn_cascade::topology::{NodeKind, Snapshot};
use lsn_cascade::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LsnStatus {
    Ok = 0,
    Config = 1,
    InputData = 2,
    Integrity = 3,
    NullArgument = 4,
    OutOfRange = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LsnNodeKind {
    Satellite = 0,
    UserBeam = 1,
    FeederBeam = 2,
    Gateway = 3,
    User = 4,
}

impl From<NodeKind> for LsnNodeKind {
    fn from(k: NodeKind) -> Self {
        match k {
            NodeKind::Satellite => LsnNodeKind::Satellite,
            NodeKind::UserBeam => LsnNodeKind::UserBeam,
            NodeKind::FeederBeam => LsnNodeKind::FeederBeam,
            NodeKind::Gateway => LsnNodeKind::Gateway,
            NodeKind::User => LsnNodeKind::User,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LsnTermination {
    FixedPoint = 0,
    Disconnected = 1,
    MaxIter = 2,
}

/// One row of a risk report. Undefined CFR and HBC values are NaN.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct LsnNodeRisk {
    pub node: usize,
    pub kind: LsnNodeKind,
    pub degree: usize,
    pub betweenness: f64,
    pub pagerank: f64,
    pub cfr: f64,
    pub hbc: f64,
    pub trial_count: usize,
    pub black_swan: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct LsnCascadeSummary {
    pub n_initial: usize,
    pub n_final: usize,
    pub iterations: usize,
    pub unserved_demand: f64,
    pub termination: LsnTermination,
}

/// Mean HBC values are NaN when no node of that kind has one.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct LsnTimeseriesPoint {
    pub unix_ms: i64,
    pub gcr: f64,
    pub systemic_risk: f64,
    pub mean_hbc_satellite: f64,
    pub mean_hbc_gateway: f64,
    pub mean_hbc_feederbeam: f64,
    pub mean_hbc_userbeam: f64,
}

pub struct LsnScenario {
    inner: Scenario,
}

pub struct LsnSnapshot {
    inner: Snapshot,
}

pub struct LsnRiskReport {
    inner: RiskReport,
}

pub struct LsnTimeseries {
    inner: Timeseries,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

enum Failure {
    Core(Error),
    Null(&'static str),
    Range(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> LsnStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => LsnStatus::Ok,
        Ok(Err(Failure::Core(e))) => {
            let status = match e.exit_code() {
                1 => LsnStatus::Config,
                3 => LsnStatus::Integrity,
                _ => LsnStatus::InputData,
            };
            set_error(e.to_string());
            status
        }
        Ok(Err(Failure::Null(what))) => {
            set_error(format!("{what} is NULL"));
            LsnStatus::NullArgument
        }
        Ok(Err(Failure::Range(msg))) => {
            set_error(msg);
            LsnStatus::OutOfRange
        }
        Err(panic) => {
            let msg = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal panic: {msg}"));
            LsnStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(what))
}

unsafe fn out_ptr<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or(Failure::Null(what))
}

unsafe fn text<'a>(p: *const c_char, what: &'static str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::Core(Error::InputData(format!("{what} is not valid UTF-8"))))
}

fn nan_if_none(v: Option<f64>) -> f64 {
    v.unwrap_or(f64::NAN)
}

/// Message for the last failed call on this thread, or NULL. Valid until the next call.
#[no_mangle]
pub extern "C" fn lsn_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

#[no_mangle]
pub extern "C" fn lsn_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Builds a scenario from configuration text in `key = value` form. Empty text gives
/// the defaults.
///
/// # Safety
/// `config_text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lsn_scenario_new(config_text: *const c_char, out: *mut *mut LsnScenario) -> LsnStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let cfg = SimConfig::parse(text(config_text, "config_text")?)?;
        *out = Box::into_raw(Box::new(LsnScenario {
            inner: Scenario::new(cfg)?,
        }));
        Ok(())
    })
}

/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lsn_scenario_from_file(path: *const c_char, out: *mut *mut LsnScenario) -> LsnStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let cfg = SimConfig::load(Path::new(text(path, "path")?))?;
        *out = Box::into_raw(Box::new(LsnScenario {
            inner: Scenario::new(cfg)?,
        }));
        Ok(())
    })
}

/// # Safety
/// `scenario` must come from `lsn_scenario_new` or be NULL.
#[no_mangle]
pub unsafe extern "C" fn lsn_scenario_free(scenario: *mut LsnScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Number of sampled instants in the configured horizon; 0 for NULL.
///
/// # Safety
/// `scenario` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn lsn_scenario_time_count(scenario: *const LsnScenario) -> usize {
    scenario.as_ref().map_or(0, |s| s.inner.time_grid().len())
}

/// Configured start time in Unix milliseconds; 0 for NULL.
///
/// # Safety
/// `scenario` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn lsn_scenario_start_ms(scenario: *const LsnScenario) -> i64 {
    scenario.as_ref().map_or(0, |s| s.inner.config().start.unix_ms())
}

/// # Safety
/// `scenario` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lsn_snapshot_at(
    scenario: *const LsnScenario,
    unix_ms: i64,
    out: *mut *mut LsnSnapshot,
) -> LsnStatus {
    guard(|| {
        let s = deref(scenario, "scenario")?;
        let out = out_ptr(out, "out")?;
        let snap = s.inner.snapshot_at(EpochTime::from_unix_ms(unix_ms))?;
        *out = Box::into_raw(Box::new(LsnSnapshot { inner: snap }));
        Ok(())
    })
}

/// # Safety
/// `snapshot` must come from `lsn_snapshot_at` or be NULL.
#[no_mangle]
pub unsafe extern "C" fn lsn_snapshot_free(snapshot: *mut LsnSnapshot) {
    if !snapshot.is_null() {
        drop(Box::from_raw(snapshot));
    }
}

/// # Safety
/// `snapshot` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn lsn_snapshot_node_count(snapshot: *const LsnSnapshot) -> usize {
    snapshot.as_ref().map_or(0, |s| s.inner.len())
}

/// # Safety
/// `snapshot` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn lsn_snapshot_edge_count(snapshot: *const LsnSnapshot) -> usize {
    snapshot.as_ref().map_or(0, |s| s.inner.edges.len())
}

/// # Safety
/// `snapshot` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lsn_snapshot_node_kind(
    snapshot: *const LsnSnapshot,
    node: usize,
    out: *mut LsnNodeKind,
) -> LsnStatus {
    guard(|| {
        let s = &deref(snapshot, "snapshot")?.inner;
        let out = out_ptr(out, "out")?;
        if node >= s.len() {
            return Err(Failure::Range(format!("node {node} out of range (have {})", s.len())));
        }
        *out = s.kind(node).into();
        Ok(())
    })
}

/// Runs the single-node trials and assembles per-node risk metrics.
///
/// # Safety
/// Handles must be live and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lsn_risk_report(
    scenario: *const LsnScenario,
    snapshot: *const LsnSnapshot,
    out: *mut *mut LsnRiskReport,
) -> LsnStatus {
    guard(|| {
        let s = deref(scenario, "scenario")?;
        let snap = deref(snapshot, "snapshot")?;
        let out = out_ptr(out, "out")?;
        let report = s.inner.risk_report(&snap.inner)?;
        *out = Box::into_raw(Box::new(LsnRiskReport { inner: report }));
        Ok(())
    })
}

/// # Safety
/// `report` must come from `lsn_risk_report` or be NULL.
#[no_mangle]
pub unsafe extern "C" fn lsn_risk_report_free(report: *mut LsnRiskReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// # Safety
/// `report` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn lsn_risk_report_len(report: *const LsnRiskReport) -> usize {
    report.as_ref().map_or(0, |r| r.inner.rows.len())
}

/// # Safety
/// `report` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lsn_risk_report_row(
    report: *const LsnRiskReport,
    index: usize,
    out: *mut LsnNodeRisk,
) -> LsnStatus {
    guard(|| {
        let rows = &deref(report, "report")?.inner.rows;
        let out = out_ptr(out, "out")?;
        let r = rows
            .get(index)
            .ok_or_else(|| Failure::Range(format!("row {index} out of range (have {})", rows.len())))?;
        *out = LsnNodeRisk {
            node: r.node,
            kind: r.kind.into(),
            degree: r.degree,
            betweenness: r.betweenness,
            pagerank: r.pagerank,
            cfr: nan_if_none(r.cfr),
            hbc: nan_if_none(r.hbc),
            trial_count: r.trial_count,
            black_swan: r.black_swan,
        };
        Ok(())
    })
}

/// Attacks `targets` with uniform compromise level 1 and severity `alpha`, under
/// traffic drawn with `traffic_seed`.
///
/// # Safety
/// Handles must be live, `targets` must hold `n_targets` ids (may be NULL when zero)
/// and `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lsn_cascade_run(
    scenario: *const LsnScenario,
    snapshot: *const LsnSnapshot,
    targets: *const usize,
    n_targets: usize,
    alpha: f64,
    traffic_seed: u64,
    out: *mut LsnCascadeSummary,
) -> LsnStatus {
    guard(|| {
        let s = deref(scenario, "scenario")?;
        let snap = &deref(snapshot, "snapshot")?.inner;
        let out = out_ptr(out, "out")?;
        let targets: &[usize] = if n_targets == 0 {
            &[]
        } else if targets.is_null() {
            return Err(Failure::Null("targets"));
        } else {
            std::slice::from_raw_parts(targets, n_targets)
        };
        let flows = s.inner.flows(snap, traffic_seed)?;
        let engine = CascadeEngine::new(snap, &flows, s.inner.cascade_config())?;
        let r = engine.run(&AttackScenario::uniform(targets.iter().copied(), alpha))?;
        *out = LsnCascadeSummary {
            n_initial: r.initial.len(),
            n_final: r.final_set.len(),
            iterations: r.iterations,
            unserved_demand: r.unserved_demand,
            termination: match r.termination {
                Termination::FixedPoint => LsnTermination::FixedPoint,
                Termination::Disconnected => LsnTermination::Disconnected,
                Termination::MaxIter => LsnTermination::MaxIter,
            },
        };
        Ok(())
    })
}

/// Runs the configured timeseries.
///
/// # Safety
/// `scenario` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lsn_timeseries_run(scenario: *const LsnScenario, out: *mut *mut LsnTimeseries) -> LsnStatus {
    guard(|| {
        let s = deref(scenario, "scenario")?;
        let out = out_ptr(out, "out")?;
        let ts = run_timeseries(&s.inner)?;
        *out = Box::into_raw(Box::new(LsnTimeseries { inner: ts }));
        Ok(())
    })
}

/// # Safety
/// `ts` must come from `lsn_timeseries_run` or be NULL.
#[no_mangle]
pub unsafe extern "C" fn lsn_timeseries_free(ts: *mut LsnTimeseries) {
    if !ts.is_null() {
        drop(Box::from_raw(ts));
    }
}

/// # Safety
/// `ts` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn lsn_timeseries_len(ts: *const LsnTimeseries) -> usize {
    ts.as_ref().map_or(0, |t| t.inner.points.len())
}

/// # Safety
/// `ts` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lsn_timeseries_point(
    ts: *const LsnTimeseries,
    index: usize,
    out: *mut LsnTimeseriesPoint,
) -> LsnStatus {
    guard(|| {
        let points = &deref(ts, "ts")?.inner.points;
        let out = out_ptr(out, "out")?;
        let p = points
            .get(index)
            .ok_or_else(|| Failure::Range(format!("point {index} out of range (have {})", points.len())))?;
        *out = LsnTimeseriesPoint {
            unix_ms: p.time.unix_ms(),
            gcr: p.gcr,
            systemic_risk: p.systemic_risk,
            mean_hbc_satellite: nan_if_none(p.mean_hbc_satellite),
            mean_hbc_gateway: nan_if_none(p.mean_hbc_gateway),
            mean_hbc_feederbeam: nan_if_none(p.mean_hbc_feederbeam),
            mean_hbc_userbeam: nan_if_none(p.mean_hbc_userbeam),
        };
        Ok(())
    })
}

/// Writes timeseries.csv, node_metrics.csv and top_nodes.csv into `dir`, creating it.
///
/// # Safety
/// `ts` must be a live handle and `dir` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn lsn_timeseries_write(ts: *const LsnTimeseries, dir: *const c_char, top_n: usize) -> LsnStatus {
    guard(|| {
        let ts = &deref(ts, "ts")?.inner;
        let dir = Path::new(text(dir, "dir")?);
        write_file(&dir.join("timeseries.csv"), &timeseries_csv(&ts.points))?;
        write_file(&dir.join("node_metrics.csv"), &node_metrics_csv(&ts.reports))?;
        write_file(&dir.join("top_nodes.csv"), &top_nodes_csv(&ts.reports, top_n))?;
        Ok(())
    })
}
