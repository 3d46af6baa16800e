//! JSON scenario files: network topology, candidate routes, bitrate catalog.
//!
//! ```text
//! network:   {"name": str, "nodes": [{"id": int}],
//!             "links": [{"id": int, "src": int, "dst": int, "length": km, "slots": int}]}
//! routes:    {"name": str, "routes": [{"src": int, "dst": int, "paths": [[node, ...], ...]}]}
//! bit_rates: {"<bitrate>": [{"modulation": str, "slots": int, "reach": km}, ...], ...}
//! ```
//!
//! Routes are node sequences resolved against the network. Bitrate keys keep
//! their file order, and so do the options under each key (trial order).
//! Unknown fields are ignored with a warning.

use std::fmt;
use std::path::{Path, PathBuf};

use eonsim_core::model::{Network, Route, RouteSet};
use eonsim_core::traffic::{BitRateCatalog, BitRateEntry, ModulationOption};
use serde::de::{DeserializeOwned, MapAccess, Visitor};
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{file}: malformed JSON: {source}")]
    Syntax {
        file: &'static str,
        source: serde_json::Error,
    },
    #[error("{file}: schema error at {path}: {message}")]
    Schema {
        file: &'static str,
        path: String,
        message: String,
    },
    #[error("{file}: {message}")]
    Validation { file: &'static str, message: String },
    #[error("cannot read {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
}

fn invalid(file: &'static str, message: impl Into<String>) -> ConfigError {
    ConfigError::Validation {
        file,
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkFile {
    pub name: String,
    pub nodes: Vec<NodeEntry>,
    pub links: Vec<LinkEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeEntry {
    pub id: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkEntry {
    pub id: usize,
    pub src: usize,
    pub dst: usize,
    pub length: f64,
    pub slots: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoutesFile {
    pub name: String,
    pub routes: Vec<PairRoutes>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairRoutes {
    pub src: usize,
    pub dst: usize,
    pub paths: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptionEntry {
    pub modulation: String,
    pub slots: usize,
    pub reach: f64,
}

/// Bitrate label to options, in file order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BitRatesFile(pub Vec<(String, Vec<OptionEntry>)>);

impl<'de> Deserialize<'de> for BitRatesFile {
    fn deserialize<D: Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        struct Ordered;

        impl<'de> Visitor<'de> for Ordered {
            type Value = BitRatesFile;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an object mapping bitrate labels to option arrays")
            }

            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<Self::Value, A::Error> {
                let mut out = Vec::new();
                while let Some((k, v)) = map.next_entry()? {
                    out.push((k, v));
                }
                Ok(BitRatesFile(out))
            }
        }

        de.deserialize_map(Ordered)
    }
}

impl Serialize for BitRatesFile {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        let mut map = ser.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}

/// Two-stage decode: syntax first, then the typed schema with a field path.
fn decode<T: DeserializeOwned>(
    file: &'static str,
    text: &str,
    on_unknown: &mut dyn FnMut(String),
) -> Result<T, ConfigError> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|source| ConfigError::Syntax { file, source })?;
    let mut track = |path: serde_ignored::Path| on_unknown(format!("{file}: ignoring unknown field {path}"));
    let ignored = serde_ignored::Deserializer::new(value, &mut track);
    serde_path_to_error::deserialize(ignored).map_err(|e| ConfigError::Schema {
        file,
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })
}

fn warn(msg: String) {
    log::warn!("{msg}");
}

pub fn parse_network(text: &str) -> Result<Network, ConfigError> {
    parse_network_with(text, &mut warn)
}

/// As [`parse_network`], passing unknown-field warnings to `on_unknown`.
pub fn parse_network_with(text: &str, on_unknown: &mut dyn FnMut(String)) -> Result<Network, ConfigError> {
    const F: &str = "network";
    let file: NetworkFile = decode(F, text, on_unknown)?;
    if file.nodes.is_empty() {
        return Err(invalid(F, "nodes list is empty"));
    }
    let n = file.nodes.len();
    let mut seen = vec![false; n];
    for node in &file.nodes {
        if node.id >= n {
            return Err(invalid(
                F,
                format!("node id {} out of range: ids must be 0..{}", node.id, n - 1),
            ));
        }
        if std::mem::replace(&mut seen[node.id], true) {
            return Err(invalid(F, format!("duplicate node id {}", node.id)));
        }
    }

    let mut links: Vec<&LinkEntry> = file.links.iter().collect();
    links.sort_by_key(|l| l.id);
    for (expected, l) in links.iter().enumerate() {
        if l.id != expected {
            return Err(invalid(
                F,
                format!(
                    "link ids must be 0..{} without gaps or duplicates; found {} at position {}",
                    file.links.len().saturating_sub(1),
                    l.id,
                    expected
                ),
            ));
        }
    }
    let mut net = Network::new(file.name, n);
    for l in links {
        net.add_link(l.src, l.dst, l.length, l.slots)
            .map_err(|e| invalid(F, format!("link {}: {e}", l.id)))?;
    }
    Ok(net)
}

pub fn parse_routes(text: &str, net: &Network) -> Result<RouteSet, ConfigError> {
    parse_routes_with(text, net, &mut warn)
}

pub fn parse_routes_with(
    text: &str,
    net: &Network,
    on_unknown: &mut dyn FnMut(String),
) -> Result<RouteSet, ConfigError> {
    const F: &str = "routes";
    let file: RoutesFile = decode(F, text, on_unknown)?;
    let mut set = RouteSet::new();
    let mut seen = std::collections::BTreeSet::new();
    for (i, pair) in file.routes.iter().enumerate() {
        let (s, d) = (pair.src, pair.dst);
        let here = || format!("routes[{i}] ({s} -> {d})");
        for node in [s, d] {
            if node >= net.node_count() {
                return Err(invalid(F, format!("{}: node {node} does not exist", here())));
            }
        }
        if !seen.insert((s, d)) {
            return Err(invalid(F, format!("{}: pair listed twice", here())));
        }
        let mut routes = Vec::with_capacity(pair.paths.len());
        for (j, path) in pair.paths.iter().enumerate() {
            match (path.first(), path.last()) {
                (Some(&a), Some(&b)) if path.len() >= 2 && a == s && b == d => {}
                _ => {
                    return Err(invalid(
                        F,
                        format!("{} path {j}: {path:?} does not run from {s} to {d}", here()),
                    ));
                }
            }
            for hop in path.windows(2) {
                if net.link_by_endpoints(hop[0], hop[1]).is_err() {
                    return Err(invalid(
                        F,
                        format!("{} path {j}: no link for node pair ({}, {})", here(), hop[0], hop[1]),
                    ));
                }
            }
            let route = Route::from_nodes(net, path).map_err(|e| invalid(F, format!("{} path {j}: {e}", here())))?;
            routes.push(route);
        }
        set.insert(s, d, routes)
            .map_err(|e| invalid(F, format!("{}: {e}", here())))?;
    }
    Ok(set)
}

pub fn parse_bitrates(text: &str) -> Result<BitRateCatalog, ConfigError> {
    parse_bitrates_with(text, &mut warn)
}

pub fn parse_bitrates_with(text: &str, on_unknown: &mut dyn FnMut(String)) -> Result<BitRateCatalog, ConfigError> {
    const F: &str = "bit_rates";
    let file: BitRatesFile = decode(F, text, on_unknown)?;
    let mut entries = Vec::with_capacity(file.0.len());
    for (label, options) in file.0 {
        let options = options
            .into_iter()
            .map(|o| ModulationOption::new(o.modulation, o.slots, o.reach))
            .collect();
        entries.push(BitRateEntry::new(label, options).map_err(|e| invalid(F, e.to_string()))?);
    }
    if entries.is_empty() {
        return Err(invalid(F, "no bitrates defined"));
    }
    Ok(BitRateCatalog::new(entries))
}

pub fn network_file(net: &Network) -> NetworkFile {
    NetworkFile {
        name: net.name().to_string(),
        nodes: net.nodes().iter().map(|n| NodeEntry { id: n.id }).collect(),
        links: net
            .links()
            .iter()
            .map(|l| LinkEntry {
                id: l.id(),
                src: l.src(),
                dst: l.dst(),
                length: l.length_km(),
                slots: l.slot_count(),
            })
            .collect(),
    }
}

pub fn routes_file(name: &str, routes: &RouteSet, net: &Network) -> RoutesFile {
    RoutesFile {
        name: name.to_string(),
        routes: routes
            .pairs()
            .map(|((src, dst), rs)| PairRoutes {
                src,
                dst,
                paths: rs
                    .iter()
                    .map(|r| r.nodes(net).expect("route built against this network"))
                    .collect(),
            })
            .collect(),
    }
}

pub fn bitrates_file(catalog: &BitRateCatalog) -> BitRatesFile {
    BitRatesFile(
        catalog
            .entries()
            .iter()
            .map(|e| {
                let opts = e
                    .options()
                    .iter()
                    .map(|o| OptionEntry {
                        modulation: o.modulation.clone(),
                        slots: o.slot_count,
                        reach: o.reach_km,
                    })
                    .collect();
                (e.label().to_string(), opts)
            })
            .collect(),
    )
}

pub fn to_json<T: Serialize>(doc: &T) -> String {
    serde_json::to_string_pretty(doc).expect("scenario documents always serialize")
}

pub fn read_file(path: &Path) -> Result<String, ConfigError> {
    std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_network(path: &Path) -> Result<Network, ConfigError> {
    parse_network(&read_file(path)?)
}

pub fn load_routes(path: &Path, net: &Network) -> Result<RouteSet, ConfigError> {
    parse_routes(&read_file(path)?, net)
}

pub fn load_bitrates(path: &Path) -> Result<BitRateCatalog, ConfigError> {
    parse_bitrates(&read_file(path)?)
}
