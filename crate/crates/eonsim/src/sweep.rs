//! Load sweeps and `.dat` output.
//!
//! A sweep runs one independent simulation per arrival rate, all with the
//! same seeds, optionally on several threads. Runs share nothing, so the
//! result table does not depend on the thread count.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use eonsim_core::algorithms::{Algorithm, UnknownAlgorithm};
use eonsim_core::allocation::Allocator;
use eonsim_core::engine::{SimError, Simulator, SimulatorConfig};
use eonsim_core::report::SimulationReport;
use eonsim_core::traffic::TrafficError;
use thiserror::Error;

use crate::console::{ConsoleObserver, SharedWriter};

#[derive(Debug, Error)]
pub enum SweepError {
    #[error(transparent)]
    UnknownAlgorithm(#[from] UnknownAlgorithm),
    #[error("no arrival rates given")]
    NoLoads,
    #[error("lambda {lambda}: {source}")]
    Profile { lambda: f64, source: TrafficError },
    #[error("lambda {lambda}: {source}")]
    Run { lambda: f64, source: SimError },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub lambda: f64,
    pub erlang: f64,
    pub blocking_probability: f64,
    pub report: SimulationReport,
    /// Every link grid was free after the run.
    pub drained: bool,
}

#[derive(Clone, Default)]
pub struct SweepOptions {
    /// Worker threads; 0 means one per arrival rate.
    pub threads: usize,
    /// Console progress every N requests (0: start and summary only).
    pub progress_every: u64,
    pub console: Option<SharedWriter>,
    pub per_bitrate: bool,
    /// Check grids against live holdings after every event. Slow.
    pub occupancy_audit: bool,
}

/// Runs a bundled algorithm (`FF`, `EF` or `FLF`) at every arrival rate.
pub fn run_experiment_sweep(
    base: &SimulatorConfig,
    lambdas: &[f64],
    algorithm_name: &str,
    options: &SweepOptions,
) -> Result<Vec<SweepRow>, SweepError> {
    let algorithm: Algorithm = algorithm_name.parse()?;
    run_algorithm_sweep(base, lambdas, algorithm, options)
}

pub fn run_algorithm_sweep(
    base: &SimulatorConfig,
    lambdas: &[f64],
    algorithm: Algorithm,
    options: &SweepOptions,
) -> Result<Vec<SweepRow>, SweepError> {
    run_sweep_with(base, lambdas, algorithm.name(), || algorithm.into_allocator(), options)
}

/// Runs a sweep with allocators built by `factory`, one per run. Rows come
/// back sorted by arrival rate.
pub fn run_sweep_with<F>(
    base: &SimulatorConfig,
    lambdas: &[f64],
    name: &str,
    factory: F,
    options: &SweepOptions,
) -> Result<Vec<SweepRow>, SweepError>
where
    F: Fn() -> Allocator + Sync,
{
    if lambdas.is_empty() {
        return Err(SweepError::NoLoads);
    }
    let mut order: Vec<f64> = lambdas.to_vec();
    order.sort_by(f64::total_cmp);

    let workers = match options.threads {
        0 => order.len(),
        n => n.min(order.len()),
    };
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<Result<SweepRow, SweepError>>>> = order.iter().map(|_| Mutex::new(None)).collect();

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(&lambda) = order.get(i) else { break };
                let row = run_one(base, lambda, name, factory(), options);
                *slots[i].lock().unwrap() = Some(row);
            });
        }
    });

    slots
        .into_iter()
        .map(|s| s.into_inner().unwrap().expect("every load was run"))
        .collect()
}

fn run_one(
    base: &SimulatorConfig,
    lambda: f64,
    name: &str,
    allocator: Allocator,
    options: &SweepOptions,
) -> Result<SweepRow, SweepError> {
    let mut config = base.clone();
    config.profile = base
        .profile
        .with_lambda(lambda)
        .map_err(|source| SweepError::Profile { lambda, source })?;
    let tag = |source| SweepError::Run { lambda, source };

    let mut sim = Simulator::new(config);
    sim.set_allocator(name, allocator).map_err(tag)?;
    if let Some(out) = &options.console {
        let obs = ConsoleObserver::new(out.clone(), options.per_bitrate);
        sim.set_observer(Box::new(obs), options.progress_every).map_err(tag)?;
    }
    sim.set_occupancy_audit(options.occupancy_audit).map_err(tag)?;
    sim.init().map_err(tag)?;
    let started = Instant::now();
    let mut report = sim.run().map_err(tag)?;
    report.wall_clock_seconds = started.elapsed().as_secs_f64();
    Ok(SweepRow {
        lambda,
        erlang: report.erlang(),
        blocking_probability: report.blocking_probability(),
        drained: sim.network().is_all_free(),
        report,
    })
}

#[derive(Debug, Error)]
pub enum DatError {
    #[error("no results to write")]
    Empty,
    #[error("cannot write {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

/// One `<erlang> <blocking probability>` line per row.
pub fn format_dat(rows: &[SweepRow]) -> String {
    rows.iter()
        .map(|r| format!("{} {:.6e}\n", r.erlang, r.blocking_probability))
        .collect()
}

pub fn write_dat(rows: &[SweepRow], path: &Path) -> Result<(), DatError> {
    if rows.is_empty() {
        return Err(DatError::Empty);
    }
    let io = |source| DatError::Io {
        path: path.display().to_string(),
        source,
    };
    let mut f = fs::File::create(path).map_err(io)?;
    f.write_all(format_dat(rows).as_bytes()).map_err(io)?;
    Ok(())
}
