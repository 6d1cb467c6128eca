use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::info;

use lsn_cascade::config::{parse_seed_list, SimConfig};
use lsn_cascade::constellation::{parse_tle, render_tle, ParseMode};
use lsn_cascade::harness::{run_attack_sweep, run_timeseries, thread_pool, Scenario};
use lsn_cascade::report::{node_metrics_csv, snapshot_csv, sweep_csv, timeseries_csv, top_nodes_csv, write_file};
use lsn_cascade::time::EpochTime;
use lsn_cascade::{Error, Result};

#[derive(Parser)]
#[command(name = "lsn-cascade", version, about = "Cascading-failure risk simulator for LEO satellite networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Configuration file (flat key = value); defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Evaluation seeds, e.g. `1..20` or `1,2,5`.
    #[arg(long)]
    seeds: Option<String>,
    /// Reject the whole element file on any malformed record.
    #[arg(long)]
    strict_tle: bool,
    #[arg(long)]
    max_iter: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Write the edge list of one snapshot.
    Snapshot {
        #[command(flatten)]
        common: Common,
        /// Snapshot instant (ISO 8601, UTC); the simulation start by default.
        #[arg(long)]
        time: Option<String>,
    },
    /// Per-node risk metrics at one instant.
    Metrics {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        time: Option<String>,
    },
    /// Risk metrics, connectivity and link stress over the time grid.
    Timeseries {
        #[command(flatten)]
        common: Common,
    },
    /// Targeted-attack sweep over metrics, severities and attacked fractions.
    Sweep {
        #[command(flatten)]
        common: Common,
    },
    /// Write the configured Walker pattern as two-line element sets.
    WalkerGen {
        #[command(flatten)]
        common: Common,
    },
    /// Check an element file and report its records.
    ValidateTle {
        #[command(flatten)]
        common: Common,
        /// Element file; `constellation.tle_path` when omitted.
        path: Option<PathBuf>,
    },
}

fn load_config(common: &Common) -> Result<SimConfig> {
    let mut cfg = match &common.config {
        Some(p) => SimConfig::load(p)?,
        None => SimConfig::default(),
    };
    if let Some(s) = &common.seeds {
        cfg.seeds = parse_seed_list("--seeds", s)?;
    }
    if common.strict_tle {
        cfg.strict_tle = true;
    }
    if let Some(n) = common.max_iter {
        cfg.max_iter = n;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn parse_time(raw: &Option<String>, cfg: &SimConfig) -> Result<EpochTime> {
    match raw {
        Some(t) => EpochTime::parse_iso8601(t).map_err(|e| Error::config("--time", e.to_string())),
        None => Ok(cfg.start),
    }
}

fn write_manifest(out: &Path, command: &str, cfg: &SimConfig, outputs: &[&str]) -> Result<()> {
    let mut text = format!(
        "# lsn-cascade {}\ncommand = {command}\noutputs = {}\n",
        env!("CARGO_PKG_VERSION"),
        outputs.join(",")
    );
    text.push_str(&cfg.dump());
    write_file(&out.join("run_manifest.txt"), &text)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Snapshot { common, time } => {
            let cfg = load_config(&common)?;
            let t = parse_time(&time, &cfg)?;
            let scenario = Scenario::new(cfg.clone())?;
            let snapshot = scenario.snapshot_at(t)?;
            write_file(&common.out.join("snapshot.csv"), &snapshot_csv(&snapshot))?;
            write_manifest(&common.out, "snapshot", &cfg, &["snapshot.csv"])?;
            info!("{} nodes, {} edges", snapshot.len(), snapshot.edges.len());
        }
        Command::Metrics { common, time } => {
            let cfg = load_config(&common)?;
            let t = parse_time(&time, &cfg)?;
            let scenario = Scenario::new(cfg.clone())?;
            let report = thread_pool()?.install(|| {
                let snapshot = scenario.snapshot_at(t)?;
                scenario.risk_report(&snapshot)
            })?;
            let reports = [report];
            write_file(&common.out.join("node_metrics.csv"), &node_metrics_csv(&reports))?;
            write_file(&common.out.join("top_nodes.csv"), &top_nodes_csv(&reports, cfg.top_n))?;
            write_manifest(&common.out, "metrics", &cfg, &["node_metrics.csv", "top_nodes.csv"])?;
        }
        Command::Timeseries { common } => {
            let cfg = load_config(&common)?;
            let scenario = Scenario::new(cfg.clone())?;
            let ts = thread_pool()?.install(|| run_timeseries(&scenario))?;
            write_file(&common.out.join("timeseries.csv"), &timeseries_csv(&ts.points))?;
            write_file(&common.out.join("node_metrics.csv"), &node_metrics_csv(&ts.reports))?;
            write_file(&common.out.join("top_nodes.csv"), &top_nodes_csv(&ts.reports, cfg.top_n))?;
            write_manifest(
                &common.out,
                "timeseries",
                &cfg,
                &["timeseries.csv", "node_metrics.csv", "top_nodes.csv"],
            )?;
        }
        Command::Sweep { common } => {
            let cfg = load_config(&common)?;
            let scenario = Scenario::new(cfg.clone())?;
            let report = thread_pool()?.install(|| run_attack_sweep(&scenario))?;
            write_file(&common.out.join("sweep.csv"), &sweep_csv(&report))?;
            write_manifest(&common.out, "sweep", &cfg, &["sweep.csv"])?;
            info!("{} sweep rows", report.rows.len());
        }
        Command::WalkerGen { common } => {
            let cfg = load_config(&common)?;
            let scenario = Scenario::new(cfg.clone())?;
            let mut text = String::new();
            for (i, el) in scenario.elements().iter().enumerate() {
                let (l1, l2) = render_tle(i as u32 + 1, el)?;
                text.push_str(&format!("WALKER-{:04}\n{l1}\n{l2}\n", i + 1));
            }
            write_file(&common.out.join("walker.tle"), &text)?;
            write_manifest(&common.out, "walker-gen", &cfg, &["walker.tle"])?;
        }
        Command::ValidateTle { common, path } => {
            let cfg = load_config(&common)?;
            let path = path
                .or_else(|| cfg.tle_path.clone())
                .ok_or_else(|| Error::config("constellation.tle_path", "no element file given"))?;
            let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
            let mode = if cfg.strict_tle { ParseMode::Strict } else { ParseMode::Lenient };
            let parsed = parse_tle(&text, mode)?;
            for e in &parsed.skipped {
                println!("skipped: {e}");
            }
            println!("{} records, {} skipped", parsed.records.len(), parsed.skipped.len());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
