//! Request stream generation: exponential inter-arrival and holding times,
//! uniform node pairs, uniform bitrate choice.
//!
//! Each quantity draws from its own seeded stream so that, for example,
//! changing the bitrate seed leaves every arrival time untouched.
//!
//! # Reproducibility contract
//!
//! Every stream is a ChaCha8 generator keyed through
//! `SeedableRng::seed_from_u64`, both of which are value-stable across
//! platforms. Raw 64-bit words are mapped to samples by the functions in
//! this module alone:
//!
//! * uniform on (0, 1): `((w >> 12) + 0.5) / 2^52`, exact in `f64`
//! * uniform index below `n`: Lemire's multiply-shift with rejection of the
//!   low word below `2^64 mod n`
//! * exponential with rate `r`: `-ln(u) / r` with `ln` from `libm`

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use thiserror::Error;

use crate::model::NodeId;

/// Reach used for catalogs that ignore optical reach.
pub const UNLIMITED_REACH_KM: f64 = 1e9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TrafficError {
    #[error("rate must be positive, got {0}")]
    NonPositiveRate(f64),
    #[error("need at least two nodes to draw a request, got {0}")]
    DegenerateNetwork(usize),
    #[error("bitrate catalog is empty")]
    EmptyCatalog,
    #[error("goal must be at least one connection")]
    ZeroGoal,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CatalogError {
    #[error("bitrate label {0:?} is not a positive number")]
    BadBitrate(String),
    #[error("bitrate {0} has no modulation options")]
    NoOptions(String),
    #[error("bitrate {bitrate}, option {modulation}: slot count must be at least 1")]
    ZeroSlots { bitrate: String, modulation: String },
    #[error("bitrate {bitrate}, option {modulation}: reach {reach} km must be positive")]
    BadReach {
        bitrate: String,
        modulation: String,
        reach: f64,
    },
}

/// One seeded pseudo-random stream.
#[derive(Debug, Clone)]
pub struct RandomStream {
    rng: ChaCha8Rng,
}

impl RandomStream {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform on the open interval (0, 1).
    pub fn next_open01(&mut self) -> f64 {
        const SCALE: f64 = 1.0 / (1u64 << 52) as f64;
        ((self.next_u64() >> 12) as f64 + 0.5) * SCALE
    }

    /// Uniform over `0..n`. `n` must be non-zero.
    pub fn next_index(&mut self, n: usize) -> usize {
        assert!(n > 0, "next_index over an empty range");
        let n = n as u64;
        let threshold = n.wrapping_neg() % n;
        loop {
            let m = u128::from(self.next_u64()) * u128::from(n);
            if (m as u64) >= threshold {
                return (m >> 64) as usize;
            }
        }
    }

    /// Exponential inter-event time. Consumes exactly one word.
    pub fn next_exponential(&mut self, rate: f64) -> Result<f64, TrafficError> {
        check_rate(rate)?;
        Ok(exponential_from_uniform(self.next_open01(), rate))
    }
}

fn check_rate(rate: f64) -> Result<(), TrafficError> {
    if rate > 0.0 && rate.is_finite() {
        Ok(())
    } else {
        Err(TrafficError::NonPositiveRate(rate))
    }
}

/// Inverse-CDF transform: `-ln(u) / rate`, positive for `u` in (0, 1).
pub fn exponential_from_uniform(u: f64, rate: f64) -> f64 {
    -libm::log(u) / rate
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SeedVector {
    pub arrival: u64,
    pub departure: u64,
    pub source: u64,
    pub destination: u64,
    pub bitrate: u64,
}

impl Default for SeedVector {
    fn default() -> Self {
        Self {
            arrival: 12345,
            departure: 12347,
            source: 12349,
            destination: 12351,
            bitrate: 12353,
        }
    }
}

impl SeedVector {
    pub fn as_array(&self) -> [u64; 5] {
        [
            self.arrival,
            self.departure,
            self.source,
            self.destination,
            self.bitrate,
        ]
    }

    pub fn from_array(s: [u64; 5]) -> Self {
        Self {
            arrival: s[0],
            departure: s[1],
            source: s[2],
            destination: s[3],
            bitrate: s[4],
        }
    }
}

/// The five independent streams feeding one simulation run.
#[derive(Debug, Clone)]
pub struct RngStreams {
    pub arrival: RandomStream,
    pub departure: RandomStream,
    pub source: RandomStream,
    pub destination: RandomStream,
    pub bitrate: RandomStream,
}

impl RngStreams {
    pub fn new(seeds: &SeedVector) -> Self {
        Self {
            arrival: RandomStream::new(seeds.arrival),
            departure: RandomStream::new(seeds.departure),
            source: RandomStream::new(seeds.source),
            destination: RandomStream::new(seeds.destination),
            bitrate: RandomStream::new(seeds.bitrate),
        }
    }

    /// Uniform ordered pair with `src != dst`; the destination is redrawn
    /// until it differs from the source.
    pub fn sample_src_dst(&mut self, node_count: usize) -> Result<(NodeId, NodeId), TrafficError> {
        if node_count < 2 {
            return Err(TrafficError::DegenerateNetwork(node_count));
        }
        let src = self.source.next_index(node_count);
        loop {
            let dst = self.destination.next_index(node_count);
            if dst != src {
                return Ok((src, dst));
            }
        }
    }

    pub fn sample_bitrate(&mut self, catalog: &BitRateCatalog) -> Result<usize, TrafficError> {
        if catalog.is_empty() {
            return Err(TrafficError::EmptyCatalog);
        }
        Ok(self.bitrate.next_index(catalog.len()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrafficProfile {
    lambda: f64,
    mu: f64,
    goal_connections: u64,
}

impl TrafficProfile {
    pub fn new(lambda: f64, mu: f64, goal_connections: u64) -> Result<Self, TrafficError> {
        check_rate(lambda)?;
        check_rate(mu)?;
        if goal_connections == 0 {
            return Err(TrafficError::ZeroGoal);
        }
        Ok(Self {
            lambda,
            mu,
            goal_connections,
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn goal_connections(&self) -> u64 {
        self.goal_connections
    }

    /// Offered load `lambda / mu`.
    pub fn erlang(&self) -> f64 {
        self.lambda / self.mu
    }

    pub fn with_lambda(self, lambda: f64) -> Result<Self, TrafficError> {
        Self::new(lambda, self.mu, self.goal_connections)
    }
}

impl Default for TrafficProfile {
    fn default() -> Self {
        Self {
            lambda: 3.0,
            mu: 10.0,
            goal_connections: 100_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModulationOption {
    pub modulation: String,
    pub slot_count: usize,
    pub reach_km: f64,
}

impl ModulationOption {
    pub fn new(modulation: impl Into<String>, slot_count: usize, reach_km: f64) -> Self {
        Self {
            modulation: modulation.into(),
            slot_count,
            reach_km,
        }
    }
}

/// A bitrate and its modulation options in trial order.
#[derive(Debug, Clone, PartialEq)]
pub struct BitRateEntry {
    label: String,
    bitrate_gbps: f64,
    options: Vec<ModulationOption>,
}

impl BitRateEntry {
    /// The numeric bitrate is parsed from `label` (e.g. `"100"`).
    pub fn new(label: impl Into<String>, options: Vec<ModulationOption>) -> Result<Self, CatalogError> {
        let label = label.into();
        let bitrate_gbps = match label.trim().parse::<f64>() {
            Ok(v) if v > 0.0 && v.is_finite() => v,
            _ => return Err(CatalogError::BadBitrate(label)),
        };
        if options.is_empty() {
            return Err(CatalogError::NoOptions(label));
        }
        for o in &options {
            if o.slot_count == 0 {
                return Err(CatalogError::ZeroSlots {
                    bitrate: label,
                    modulation: o.modulation.clone(),
                });
            }
            if o.reach_km.is_nan() || o.reach_km <= 0.0 {
                return Err(CatalogError::BadReach {
                    bitrate: label,
                    modulation: o.modulation.clone(),
                    reach: o.reach_km,
                });
            }
        }
        Ok(Self {
            label,
            bitrate_gbps,
            options,
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn bitrate_gbps(&self) -> f64 {
        self.bitrate_gbps
    }

    pub fn options(&self) -> &[ModulationOption] {
        &self.options
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BitRateCatalog {
    entries: Vec<BitRateEntry>,
}

/// Modulation formats with their reach in km, highest order first, and the
/// slots each needs for 10, 40, 100, 400 and 1000 Gbps.
const REFERENCE_TABLE: [(&str, f64, [usize; 5]); 6] = [
    ("64-QAM", 80.0, [1, 1, 2, 6, 14]),
    ("32-QAM", 240.0, [1, 1, 2, 7, 16]),
    ("16-QAM", 560.0, [1, 1, 2, 8, 20]),
    ("8-QAM", 1360.0, [1, 2, 3, 11, 27]),
    ("QPSK", 2720.0, [1, 2, 4, 16, 40]),
    ("BPSK", 5520.0, [1, 4, 8, 32, 80]),
];
const REFERENCE_BITRATES: [&str; 5] = ["10", "40", "100", "400", "1000"];

impl BitRateCatalog {
    pub fn new(entries: Vec<BitRateEntry>) -> Self {
        Self { entries }
    }

    /// Five bitrates (10 to 1000 Gbps) with six modulation formats each,
    /// fewest slots first. This is the default when no catalog is supplied.
    pub fn reference() -> Self {
        let entries = REFERENCE_BITRATES
            .iter()
            .enumerate()
            .map(|(i, label)| {
                let options = REFERENCE_TABLE
                    .iter()
                    .map(|(m, reach, slots)| ModulationOption::new(*m, slots[i], *reach))
                    .collect();
                BitRateEntry::new(*label, options).expect("reference table is valid")
            })
            .collect();
        Self { entries }
    }

    /// Reference bitrates restricted to BPSK with unlimited reach.
    pub fn reference_bpsk() -> Self {
        let (_, _, slots) = REFERENCE_TABLE[5];
        let entries = REFERENCE_BITRATES
            .iter()
            .zip(slots)
            .map(|(label, s)| {
                BitRateEntry::new(*label, vec![ModulationOption::new("BPSK", s, UNLIMITED_REACH_KM)])
                    .expect("reference table is valid")
            })
            .collect();
        Self { entries }
    }

    /// Single bitrate needing `slots` slots on any route.
    pub fn single(label: &str, slots: usize) -> Result<Self, CatalogError> {
        let opt = ModulationOption::new("BPSK", slots, UNLIMITED_REACH_KM);
        Ok(Self {
            entries: vec![BitRateEntry::new(label.to_string(), vec![opt])?],
        })
    }

    pub fn entries(&self) -> &[BitRateEntry] {
        &self.entries
    }

    pub fn get(&self, index: usize) -> Option<&BitRateEntry> {
        self.entries.get(index)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}
