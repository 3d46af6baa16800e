//! Discrete-event simulation core for flexible-grid (elastic) optical networks.
//!
//! The crate models a network as directed links, each carrying a dense grid of
//! frequency slots, and drives a Poisson stream of connection requests through a
//! user-supplied allocation callback. Every request is either accepted (its
//! staged slot ranges are committed to the live grids until the connection
//! departs) or blocked; the run reports the resulting blocking probability.
//!
//! ```
//! use eonsim_core::prelude::*;
//!
//! let mut net = Network::new("pair", 2);
//! let link = net.add_link(0, 1, 100.0, 8).unwrap();
//! net.add_link(1, 0, 100.0, 8).unwrap();
//!
//! let mut routes = RouteSet::new();
//! routes.insert(0, 1, vec![Route::new(&net, vec![link]).unwrap()]).unwrap();
//! routes.insert(1, 0, vec![Route::from_nodes(&net, &[1, 0]).unwrap()]).unwrap();
//!
//! let config = SimulatorConfig {
//!     profile: TrafficProfile::new(4.0, 1.0, 1_000).unwrap(),
//!     seeds: SeedVector::default(),
//!     network: net,
//!     routes,
//!     catalog: BitRateCatalog::reference(),
//!     strict_audit: true,
//! };
//!
//! let mut sim = Simulator::new(config);
//! sim.set_allocator("FF", Algorithm::FirstFit.into_allocator()).unwrap();
//! sim.init().unwrap();
//! let report = sim.run().unwrap();
//! assert_eq!(report.accepted + report.blocked, 1_000);
//! ```
//!
//! Custom algorithms are plain closures over an [`AllocationContext`]:
//!
//! ```
//! use eonsim_core::prelude::*;
//!
//! let mut attempts = 0u64;
//! let _alloc = move |ctx: &mut AllocationContext<'_>| {
//!     attempts += 1;
//!     for r in 0..ctx.route_count() {
//!         let need = ctx.request_slots(0).unwrap();
//!         let links = ctx.route(r).unwrap().link_ids().to_vec();
//!         let free = links.iter().all(|&l| {
//!             ctx.link(l).unwrap().is_range_free(0, need).unwrap_or(false)
//!         });
//!         if free {
//!             for &l in &links {
//!                 ctx.alloc_slots(l, 0, need).unwrap();
//!             }
//!             return Verdict::Allocated;
//!         }
//!     }
//!     Verdict::NotAllocated
//! };
//! ```
//!
//! [`AllocationContext`]: allocation::AllocationContext
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod algorithms;
pub mod allocation;
pub mod engine;
pub mod model;
pub mod report;
pub mod traffic;

pub mod prelude {
    pub use crate::algorithms::{Algorithm, Direction, FreeBlock};
    pub use crate::allocation::{AllocationContext, CommitError, LinkView, SlotRange, Verdict};
    pub use crate::engine::{Observer, SimError, Simulator, SimulatorConfig};
    pub use crate::model::{Link, Network, Node, Route, RouteSet, SlotGrid};
    pub use crate::report::SimulationReport;
    pub use crate::traffic::{BitRateCatalog, BitRateEntry, ModulationOption, RngStreams, SeedVector, TrafficProfile};
}
