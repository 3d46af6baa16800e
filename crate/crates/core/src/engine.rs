//! Event queue and simulator run loop.
//!
//! There is always exactly one pending arrival until the goal is reached, plus
//! one departure per live connection. Events pop by time; at equal times a
//! departure precedes an arrival, and full ties fall back to creation order.

use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BinaryHeap};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::{Ordering, Reverse};

use thiserror::Error;

use crate::allocation::{AllocationContext, Allocator, CommitError, SlotRange, Verdict};
use crate::model::{ModelError, Network, NodeId, RouteSet};
use crate::report::SimulationReport;
use crate::traffic::{BitRateCatalog, RngStreams, SeedVector, TrafficError, TrafficProfile};

pub type EventId = u64;
pub type ConnectionId = u64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("no allocation function set")]
    NoAllocatorSet,
    #[error("simulator already initialized")]
    AlreadyInitialized,
    #[error("simulator not initialized")]
    NotInitialized,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("event at t={time} is before the clock ({clock})")]
    TimeInPast { time: f64, clock: f64 },
    #[error("allocator fault on request {request} ({src} -> {dst}): {source}")]
    AllocatorFault {
        request: u64,
        src: NodeId,
        dst: NodeId,
        source: CommitError,
    },
    #[error("no routes from node {src} to node {dst}")]
    MissingRoutes { src: NodeId, dst: NodeId },
    #[error("departure for unknown connection {0}")]
    UnknownConnection(ConnectionId),
    #[error("occupancy mismatch on link {link}: grid holds {grid} slots, live connections {live}")]
    OccupancyMismatch { link: usize, grid: usize, live: usize },
    #[error(transparent)]
    Traffic(#[from] TrafficError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    Arrival,
    Departure(ConnectionId),
}

impl EventKind {
    fn rank(&self) -> u8 {
        match self {
            Self::Departure(_) => 0,
            Self::Arrival => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub time: f64,
    pub kind: EventKind,
    pub id: EventId,
}

impl Eq for Event {}

impl Ord for Event {
    fn cmp(&self, other: &Self) -> Ordering {
        self.time
            .total_cmp(&other.time)
            .then(self.kind.rank().cmp(&other.kind.rank()))
            .then(self.id.cmp(&other.id))
    }
}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Min-queue of events with the simulation clock.
#[derive(Debug, Clone, Default)]
pub struct EventQueue {
    heap: BinaryHeap<Reverse<Event>>,
    clock: f64,
    next_id: EventId,
}

impl EventQueue {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn clock(&self) -> f64 {
        self.clock
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    pub fn schedule(&mut self, time: f64, kind: EventKind) -> Result<EventId, SimError> {
        if time.is_nan() || time < self.clock {
            return Err(SimError::TimeInPast {
                time,
                clock: self.clock,
            });
        }
        let id = self.next_id;
        self.next_id += 1;
        self.heap.push(Reverse(Event { time, kind, id }));
        Ok(id)
    }

    /// Removes the next event and advances the clock to its time.
    pub fn pop(&mut self) -> Option<Event> {
        let Reverse(ev) = self.heap.pop()?;
        self.clock = ev.time;
        Some(ev)
    }

    pub fn peek(&self) -> Option<&Event> {
        self.heap.peek().map(|r| &r.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConnectionRecord {
    pub id: ConnectionId,
    pub holdings: Vec<SlotRange>,
    pub departure_time: f64,
}

#[derive(Debug, Clone)]
pub struct SimulatorConfig {
    pub profile: TrafficProfile,
    pub seeds: SeedVector,
    pub network: Network,
    pub routes: RouteSet,
    pub catalog: BitRateCatalog,
    /// Enforce contiguity and continuity on every committed allocation.
    /// Disabling it is unsafe: accepted connections may violate both.
    pub strict_audit: bool,
}

impl SimulatorConfig {
    /// Default profile, seeds and reference catalog over the given topology.
    pub fn new(network: Network, routes: RouteSet) -> Self {
        Self {
            profile: TrafficProfile::default(),
            seeds: SeedVector::default(),
            network,
            routes,
            catalog: BitRateCatalog::reference(),
            strict_audit: true,
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: &str| Err(SimError::InvalidConfig(m.into()));
        if self.network.node_count() < 2 {
            return bad("network needs at least two nodes");
        }
        if self.network.link_count() == 0 {
            return bad("network has no links");
        }
        if self.routes.is_empty() {
            return bad("route set is empty");
        }
        if self.catalog.is_empty() {
            return bad("bitrate catalog is empty");
        }
        let links = self.network.link_count();
        for ((s, d), routes) in self.routes.pairs() {
            let n = self.network.node_count();
            if s >= n || d >= n {
                return Err(SimError::InvalidConfig(alloc::format!(
                    "routes reference pair ({s}, {d}) outside the network"
                )));
            }
            if routes.iter().flat_map(|r| r.link_ids()).any(|&l| l >= links) {
                return Err(SimError::InvalidConfig(alloc::format!(
                    "routes for ({s}, {d}) reference unknown links"
                )));
            }
        }
        Ok(())
    }
}

/// Callbacks for console progress and similar hooks.
pub trait Observer {
    fn on_start(&mut self, _report: &SimulationReport) {}
    fn on_progress(&mut self, _report: &SimulationReport) {}
    fn on_finish(&mut self, _report: &SimulationReport) {}
}

struct RunState {
    queue: EventQueue,
    streams: RngStreams,
    live: BTreeMap<ConnectionId, ConnectionRecord>,
    next_connection: ConnectionId,
    arrivals: u64,
    started: bool,
    finished: bool,
    report: SimulationReport,
}

pub struct Simulator {
    config: SimulatorConfig,
    allocator: Option<Allocator>,
    algorithm: String,
    observer: Option<Box<dyn Observer + Send>>,
    progress_every: u64,
    occupancy_audit: bool,
    state: Option<RunState>,
}

impl Simulator {
    pub fn new(config: SimulatorConfig) -> Self {
        Self {
            config,
            allocator: None,
            algorithm: String::new(),
            observer: None,
            progress_every: 0,
            occupancy_audit: false,
            state: None,
        }
    }

    pub fn config(&self) -> &SimulatorConfig {
        &self.config
    }

    /// Mutable configuration; refused once [`Simulator::init`] has run.
    pub fn config_mut(&mut self) -> Result<&mut SimulatorConfig, SimError> {
        self.ensure_configurable()?;
        Ok(&mut self.config)
    }

    fn ensure_configurable(&self) -> Result<(), SimError> {
        match self.state {
            Some(_) => Err(SimError::AlreadyInitialized),
            None => Ok(()),
        }
    }

    /// Installs the allocation callback under `name` (shown in reports).
    pub fn set_allocator(&mut self, name: &str, allocator: Allocator) -> Result<(), SimError> {
        self.ensure_configurable()?;
        self.allocator = Some(allocator);
        self.algorithm = name.into();
        Ok(())
    }

    /// Reports progress to `observer` every `every` processed requests
    /// (0 disables progress lines but keeps start and finish).
    pub fn set_observer(&mut self, observer: Box<dyn Observer + Send>, every: u64) -> Result<(), SimError> {
        self.ensure_configurable()?;
        self.observer = Some(observer);
        self.progress_every = every;
        Ok(())
    }

    /// Cross-checks grids against live holdings after every event. Slow.
    pub fn set_occupancy_audit(&mut self, on: bool) -> Result<(), SimError> {
        self.ensure_configurable()?;
        self.occupancy_audit = on;
        Ok(())
    }

    pub fn init(&mut self) -> Result<(), SimError> {
        self.ensure_configurable()?;
        if self.allocator.is_none() {
            return Err(SimError::NoAllocatorSet);
        }
        self.config.validate()?;
        let mut streams = RngStreams::new(&self.config.seeds);
        let mut queue = EventQueue::new();
        let first = streams.arrival.next_exponential(self.config.profile.lambda())?;
        queue.schedule(first, EventKind::Arrival)?;
        let report = SimulationReport::new(
            &self.algorithm,
            &self.config.profile,
            self.config.seeds,
            &self.config.catalog,
        );
        self.state = Some(RunState {
            queue,
            streams,
            live: BTreeMap::new(),
            next_connection: 0,
            arrivals: 0,
            started: false,
            finished: false,
            report,
        });
        Ok(())
    }

    pub fn is_initialized(&self) -> bool {
        self.state.is_some()
    }

    pub fn clock(&self) -> f64 {
        self.state.as_ref().map_or(0.0, |s| s.queue.clock())
    }

    pub fn pending_events(&self) -> usize {
        self.state.as_ref().map_or(0, |s| s.queue.len())
    }

    pub fn network(&self) -> &Network {
        &self.config.network
    }

    pub fn live_connections(&self) -> impl Iterator<Item = &ConnectionRecord> {
        self.state.iter().flat_map(|s| s.live.values())
    }

    pub fn report(&self) -> Option<&SimulationReport> {
        self.state.as_ref().map(|s| &s.report)
    }

    /// Processes every event and returns the final report. Pending departures
    /// after the last arrival are drained, so all grids end up free.
    pub fn run(&mut self) -> Result<SimulationReport, SimError> {
        let state = self.state.as_mut().ok_or(SimError::NotInitialized)?;
        if !state.started {
            state.started = true;
            if let Some(obs) = self.observer.as_mut() {
                obs.on_start(&state.report);
            }
        }
        while self.step()?.is_some() {}
        let state = self.state.as_mut().ok_or(SimError::NotInitialized)?;
        if !state.finished {
            state.finished = true;
            if let Some(obs) = self.observer.as_mut() {
                obs.on_finish(&state.report);
            }
        }
        Ok(state.report.clone())
    }

    /// Processes one event; `None` once the queue is empty.
    pub fn step(&mut self) -> Result<Option<Event>, SimError> {
        let state = self.state.as_mut().ok_or(SimError::NotInitialized)?;
        let Some(ev) = state.queue.pop() else {
            return Ok(None);
        };
        match ev.kind {
            EventKind::Arrival => self.process_arrival()?,
            EventKind::Departure(id) => self.process_departure(id)?,
        }
        if self.occupancy_audit {
            self.check_occupancy()?;
        }
        Ok(Some(ev))
    }

    fn process_arrival(&mut self) -> Result<(), SimError> {
        let state = self.state.as_mut().ok_or(SimError::NotInitialized)?;
        let cfg = &mut self.config;
        state.arrivals += 1;
        let request = state.arrivals;
        let (src, dst) = state.streams.sample_src_dst(cfg.network.node_count())?;
        let bitrate = state.streams.sample_bitrate(&cfg.catalog)?;
        let routes = cfg.routes.get(src, dst);
        if routes.is_empty() {
            return Err(SimError::MissingRoutes { src, dst });
        }
        let entry = &cfg.catalog.entries()[bitrate];
        let mut ctx = AllocationContext::new(&cfg.network, src, dst, routes, entry);
        let allocator = self.allocator.as_mut().ok_or(SimError::NoAllocatorSet)?;
        let verdict = allocator(&mut ctx);
        let staging = ctx.into_staging();

        if verdict == Verdict::Allocated {
            let holdings =
                staging
                    .commit(&mut cfg.network, cfg.strict_audit)
                    .map_err(|source| SimError::AllocatorFault {
                        request,
                        src,
                        dst,
                        source,
                    })?;
            let now = state.queue.clock();
            let departure_time = now + state.streams.departure.next_exponential(cfg.profile.mu())?;
            let id = state.next_connection;
            state.next_connection += 1;
            state.queue.schedule(departure_time, EventKind::Departure(id))?;
            state.live.insert(
                id,
                ConnectionRecord {
                    id,
                    holdings,
                    departure_time,
                },
            );
        }
        state.report.record_bitrate_outcome(bitrate, verdict);

        if state.arrivals < cfg.profile.goal_connections() {
            let next = state.queue.clock() + state.streams.arrival.next_exponential(cfg.profile.lambda())?;
            state.queue.schedule(next, EventKind::Arrival)?;
        }
        if self.progress_every > 0 && state.report.processed % self.progress_every == 0 {
            if let Some(obs) = self.observer.as_mut() {
                obs.on_progress(&state.report);
            }
        }
        Ok(())
    }

    fn process_departure(&mut self, id: ConnectionId) -> Result<(), SimError> {
        let state = self.state.as_mut().ok_or(SimError::NotInitialized)?;
        let record = state.live.remove(&id).ok_or(SimError::UnknownConnection(id))?;
        for h in &record.holdings {
            self.config.network.release_slots(h.link, h.from, h.to)?;
        }
        Ok(())
    }

    /// Verifies that every link's occupied slot count equals the slots held
    /// by live connections on it. Holdings never overlap because each commit
    /// occupies free slots only, so equal counts mean equal sets.
    pub fn check_occupancy(&self) -> Result<(), SimError> {
        let net = &self.config.network;
        let mut live = vec![0usize; net.link_count()];
        for rec in self.live_connections() {
            for h in &rec.holdings {
                live[h.link] += h.to - h.from;
                if net.is_range_free(h.link, h.from, h.to)? {
                    // A held range must be fully occupied.
                    return Err(SimError::OccupancyMismatch {
                        link: h.link,
                        grid: net.link(h.link)?.slots().occupied_count(),
                        live: live[h.link],
                    });
                }
            }
        }
        for (link, l) in net.links().iter().enumerate() {
            let grid = l.slots().occupied_count();
            if grid != live[link] {
                return Err(SimError::OccupancyMismatch {
                    link,
                    grid,
                    live: live[link],
                });
            }
        }
        Ok(())
    }
}
