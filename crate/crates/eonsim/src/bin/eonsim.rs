//! Load-sweep experiment runner.
//!
//! Runs one simulation per arrival rate and writes `<erlang> <bp>` rows to
//! `--out`. Console lines go to stdout, diagnostics to stderr.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use eonsim::console::stdout_writer;
use eonsim::io::{load_bitrates, load_network, load_routes};
use eonsim::sweep::{run_algorithm_sweep, write_dat, SweepOptions};
use eonsim_core::algorithms::Algorithm;
use eonsim_core::engine::SimulatorConfig;
use eonsim_core::traffic::{BitRateCatalog, SeedVector, TrafficProfile};

#[derive(Parser, Debug)]
#[command(version, about = "Elastic optical network blocking-probability simulator")]
struct Args {
    /// Topology JSON file.
    #[arg(long)]
    network: PathBuf,
    /// Candidate routes JSON file.
    #[arg(long)]
    routes: PathBuf,
    /// Bitrate catalog JSON file; the built-in table when omitted.
    #[arg(long)]
    bitrates: Option<PathBuf>,
    /// FF, EF or FLF.
    #[arg(long)]
    algorithm: Algorithm,
    /// Requests per run.
    #[arg(long)]
    goal: u64,
    /// Comma-separated arrival rates, one run each.
    #[arg(long, value_delimiter = ',', required = true)]
    lambda: Vec<f64>,
    /// Departure rate.
    #[arg(long)]
    mu: f64,
    #[arg(long, default_value_t = SeedVector::default().arrival)]
    seed_arrival: u64,
    #[arg(long, default_value_t = SeedVector::default().departure)]
    seed_departure: u64,
    #[arg(long, default_value_t = SeedVector::default().source)]
    seed_source: u64,
    #[arg(long, default_value_t = SeedVector::default().destination)]
    seed_destination: u64,
    #[arg(long, default_value_t = SeedVector::default().bitrate)]
    seed_bitrate: u64,
    /// Keep only the first K routes of every pair.
    #[arg(long, value_name = "K")]
    max_routes: Option<usize>,
    /// Skip the contiguity/continuity check on committed allocations.
    #[arg(long)]
    no_strict_audit: bool,
    /// Print a progress line every N requests.
    #[arg(long, value_name = "N", default_value_t = 0)]
    progress: u64,
    /// Also print blocking per bitrate after each run.
    #[arg(long)]
    per_bitrate: bool,
    /// FLF split point in Gbps (requests below it fill from the bottom).
    #[arg(long, value_name = "GBPS")]
    flf_threshold: Option<f64>,
    /// Parallel runs; 0 runs every load at once.
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Output table.
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = Args::parse();
    match run(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("eonsim: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(args: Args) -> Result<(), Box<dyn std::error::Error>> {
    let network = load_network(&args.network)?;
    let mut routes = load_routes(&args.routes, &network)?;
    if let Some(k) = args.max_routes {
        if k == 0 {
            return Err("--max-routes must be at least 1".into());
        }
        routes.truncate(k);
    }
    let catalog = match &args.bitrates {
        Some(path) => load_bitrates(path)?,
        None => BitRateCatalog::reference(),
    };

    let mut config = SimulatorConfig::new(network, routes);
    config.catalog = catalog;
    config.profile = TrafficProfile::new(args.lambda[0], args.mu, args.goal)?;
    config.seeds = SeedVector {
        arrival: args.seed_arrival,
        departure: args.seed_departure,
        source: args.seed_source,
        destination: args.seed_destination,
        bitrate: args.seed_bitrate,
    };
    config.strict_audit = !args.no_strict_audit;

    let algorithm = match (args.algorithm, args.flf_threshold) {
        (Algorithm::FirstLastFit { .. }, Some(threshold_gbps)) => Algorithm::FirstLastFit { threshold_gbps },
        (_, Some(_)) => return Err("--flf-threshold only applies to FLF".into()),
        (a, None) => a,
    };

    let options = SweepOptions {
        threads: args.threads,
        progress_every: args.progress,
        console: Some(stdout_writer()),
        per_bitrate: args.per_bitrate,
        occupancy_audit: false,
    };
    let rows = run_algorithm_sweep(&config, &args.lambda, algorithm, &options)?;
    for r in rows.iter().filter(|r| !r.drained) {
        log::warn!("lambda {}: spectrum not empty after the run", r.lambda);
    }
    write_dat(&rows, &args.out)?;
    log::info!("wrote {} rows to {}", rows.len(), args.out.display());
    Ok(())
}
