//! Blocking accounting and the fixed console line formats.
//!
//! Lines are `key=value` pairs separated by single spaces, prefixed by a
//! record tag (`start`, `progress`, `bitrate`, `summary`) so they can be
//! grepped or split without a parser. Probabilities use `{:.6e}`.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::allocation::Verdict;
use crate::traffic::{BitRateCatalog, SeedVector, TrafficProfile};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitrateTally {
    pub label: String,
    pub processed: u64,
    pub blocked: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationReport {
    pub algorithm: String,
    pub lambda: f64,
    pub mu: f64,
    pub goal: u64,
    pub seeds: SeedVector,
    pub processed: u64,
    pub accepted: u64,
    pub blocked: u64,
    pub per_bitrate: Vec<BitrateTally>,
    /// Filled in by the host; the core has no clock.
    pub wall_clock_seconds: f64,
}

impl SimulationReport {
    pub fn new(algorithm: &str, profile: &TrafficProfile, seeds: SeedVector, catalog: &BitRateCatalog) -> Self {
        Self {
            algorithm: algorithm.into(),
            lambda: profile.lambda(),
            mu: profile.mu(),
            goal: profile.goal_connections(),
            seeds,
            processed: 0,
            accepted: 0,
            blocked: 0,
            per_bitrate: catalog
                .entries()
                .iter()
                .map(|e| BitrateTally {
                    label: e.label().into(),
                    processed: 0,
                    blocked: 0,
                })
                .collect(),
            wall_clock_seconds: 0.0,
        }
    }

    pub fn record_outcome(&mut self, verdict: Verdict) {
        self.processed += 1;
        match verdict {
            Verdict::Allocated => self.accepted += 1,
            Verdict::NotAllocated => self.blocked += 1,
        }
    }

    /// Like [`Self::record_outcome`], also counting against catalog entry `bitrate`.
    pub fn record_bitrate_outcome(&mut self, bitrate: usize, verdict: Verdict) {
        self.record_outcome(verdict);
        if let Some(t) = self.per_bitrate.get_mut(bitrate) {
            t.processed += 1;
            if verdict == Verdict::NotAllocated {
                t.blocked += 1;
            }
        }
    }

    /// `blocked / processed`, or 0 before any request.
    pub fn blocking_probability(&self) -> f64 {
        ratio(self.blocked, self.processed)
    }

    pub fn erlang(&self) -> f64 {
        self.lambda / self.mu
    }

    pub fn header_line(&self) -> String {
        let s = self.seeds;
        format!(
            "start algorithm={} lambda={} mu={} erlang={} goal={} seeds={},{},{},{},{}",
            self.algorithm,
            self.lambda,
            self.mu,
            self.erlang(),
            self.goal,
            s.arrival,
            s.departure,
            s.source,
            s.destination,
            s.bitrate
        )
    }

    pub fn progress_line(&self) -> String {
        format!(
            "progress algorithm={} erlang={} processed={} blocked={} bp={:.6e}",
            self.algorithm,
            self.erlang(),
            self.processed,
            self.blocked,
            self.blocking_probability()
        )
    }

    pub fn summary_line(&self) -> String {
        format!(
            "summary algorithm={} erlang={} processed={} accepted={} blocked={} bp={:.6e} wall={:.3}s",
            self.algorithm,
            self.erlang(),
            self.processed,
            self.accepted,
            self.blocked,
            self.blocking_probability(),
            self.wall_clock_seconds
        )
    }

    pub fn bitrate_lines(&self) -> Vec<String> {
        self.per_bitrate
            .iter()
            .map(|t| {
                format!(
                    "bitrate algorithm={} erlang={} label={} processed={} blocked={} bp={:.6e}",
                    self.algorithm,
                    self.erlang(),
                    t.label,
                    t.processed,
                    t.blocked,
                    ratio(t.blocked, t.processed)
                )
            })
            .collect()
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}
