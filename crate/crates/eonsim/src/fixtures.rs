//! Bundled scenario files.
//!
//! `nsfnet.json` is the 14-node NSFNet with each of its 21 spans as two
//! directed links of 320 slots. Span lengths (km) are the widely used NSFNet
//! distance set; they are an input choice, not measured data. The longest
//! first-choice route is 4500 km, so every pair can reach with BPSK.
//! `nsfnet_routes.json` holds the three shortest loopless paths by length for
//! every ordered pair. `gen_nsfnet.py` regenerates both files.

use eonsim_core::engine::SimulatorConfig;
use eonsim_core::model::{Network, RouteSet};
use eonsim_core::traffic::BitRateCatalog;

use crate::io::{parse_bitrates, parse_network, parse_routes};

pub const NSFNET: &str = include_str!("../fixtures/nsfnet.json");
pub const NSFNET_ROUTES: &str = include_str!("../fixtures/nsfnet_routes.json");
pub const BIT_RATES: &str = include_str!("../fixtures/bit_rates.json");
pub const BIT_RATES_BPSK: &str = include_str!("../fixtures/bit_rates_bpsk.json");

pub fn nsfnet() -> Network {
    parse_network(NSFNET).expect("bundled NSFNet fixture is valid")
}

pub fn nsfnet_routes(net: &Network) -> RouteSet {
    parse_routes(NSFNET_ROUTES, net).expect("bundled NSFNet routes are valid")
}

/// Five bitrates with six modulation formats each, fewest slots first.
pub fn bit_rates() -> BitRateCatalog {
    parse_bitrates(BIT_RATES).expect("bundled bitrate table is valid")
}

/// Same bitrates with BPSK only and no reach limit.
pub fn bit_rates_bpsk() -> BitRateCatalog {
    parse_bitrates(BIT_RATES_BPSK).expect("bundled bitrate table is valid")
}

/// NSFNet with three routes per pair, the reference catalog and default
/// traffic, seeds and audit settings.
pub fn default_config() -> SimulatorConfig {
    let net = nsfnet();
    let routes = nsfnet_routes(&net);
    SimulatorConfig::new(net, routes)
}
