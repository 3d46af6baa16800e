//! Physical network model: nodes, directed links with slot grids, candidate routes.
//!
//! Slot ranges are half-open `[from, to)` and every id is a dense 0-based index.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

pub type NodeId = usize;
pub type LinkId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum SlotError {
    #[error("slot range [{from}, {to}) is outside a grid of {len} slots")]
    OutOfBounds { from: usize, to: usize, len: usize },
    #[error("slot {slot} is already occupied")]
    AlreadyOccupied { slot: usize },
    #[error("slot {slot} is not occupied")]
    NotOccupied { slot: usize },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("link {link}: {source}")]
    Slot { link: LinkId, source: SlotError },
    #[error("no link from node {src} to node {dst}")]
    NoSuchLink { src: NodeId, dst: NodeId },
    #[error("unknown link id {0}")]
    UnknownLink(LinkId),
    #[error("node {node} does not exist (network has {count} nodes)")]
    UnknownNode { node: NodeId, count: usize },
    #[error("self-loop on node {0}")]
    SelfLoop(NodeId),
    #[error("duplicate link {src} -> {dst}")]
    DuplicateLink { src: NodeId, dst: NodeId },
    #[error("a link needs at least one slot")]
    NoSlots,
    #[error("link length {0} km is not a finite non-negative number")]
    InvalidLength(f64),
    #[error("route has no links")]
    EmptyRoute,
    #[error("route is broken between link {prev} and link {next}")]
    BrokenChain { prev: LinkId, next: LinkId },
    #[error("route runs {from} -> {to} but is filed under {src} -> {dst}")]
    WrongEndpoints {
        src: NodeId,
        dst: NodeId,
        from: NodeId,
        to: NodeId,
    },
}

/// Dense occupancy grid; `true` marks an occupied slot.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SlotGrid {
    slots: Vec<bool>,
}

impl SlotGrid {
    pub fn new(len: usize) -> Self {
        Self {
            slots: vec![false; len],
        }
    }

    /// Builds a grid of `len` slots with the listed slots occupied.
    pub fn with_occupied(len: usize, occupied: impl IntoIterator<Item = usize>) -> Self {
        let mut grid = Self::new(len);
        for i in occupied {
            grid.slots[i] = true;
        }
        grid
    }

    pub fn from_bools(slots: Vec<bool>) -> Self {
        Self { slots }
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn is_occupied(&self, slot: usize) -> bool {
        self.slots[slot]
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.slots
    }

    pub fn occupied_count(&self) -> usize {
        self.slots.iter().filter(|&&s| s).count()
    }

    pub fn is_all_free(&self) -> bool {
        !self.slots.contains(&true)
    }

    fn check(&self, from: usize, to: usize) -> Result<(), SlotError> {
        if from < to && to <= self.slots.len() {
            Ok(())
        } else {
            Err(SlotError::OutOfBounds {
                from,
                to,
                len: self.slots.len(),
            })
        }
    }

    pub fn is_range_free(&self, from: usize, to: usize) -> Result<bool, SlotError> {
        self.check(from, to)?;
        Ok(!self.slots[from..to].contains(&true))
    }

    pub fn occupy(&mut self, from: usize, to: usize) -> Result<(), SlotError> {
        self.check(from, to)?;
        if let Some(i) = self.slots[from..to].iter().position(|&s| s) {
            return Err(SlotError::AlreadyOccupied { slot: from + i });
        }
        self.slots[from..to].fill(true);
        Ok(())
    }

    pub fn release(&mut self, from: usize, to: usize) -> Result<(), SlotError> {
        self.check(from, to)?;
        if let Some(i) = self.slots[from..to].iter().position(|&s| !s) {
            return Err(SlotError::NotOccupied { slot: from + i });
        }
        self.slots[from..to].fill(false);
        Ok(())
    }

    /// Marks every slot occupied in `other` as occupied here.
    pub(crate) fn merge_occupied(&mut self, other: &SlotGrid) {
        for (a, &b) in self.slots.iter_mut().zip(&other.slots) {
            *a |= b;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Node {
    pub id: NodeId,
}

/// A directed optical link. The grid is only reachable mutably through
/// [`Link::occupy_slots`] and [`Link::release_slots`].
#[derive(Debug, Clone, PartialEq)]
pub struct Link {
    id: LinkId,
    src: NodeId,
    dst: NodeId,
    length_km: f64,
    slots: SlotGrid,
}

impl Link {
    pub fn id(&self) -> LinkId {
        self.id
    }

    pub fn src(&self) -> NodeId {
        self.src
    }

    pub fn dst(&self) -> NodeId {
        self.dst
    }

    pub fn length_km(&self) -> f64 {
        self.length_km
    }

    pub fn slot_count(&self) -> usize {
        self.slots.len()
    }

    pub fn slots(&self) -> &SlotGrid {
        &self.slots
    }

    pub fn is_range_free(&self, from: usize, to: usize) -> Result<bool, SlotError> {
        self.slots.is_range_free(from, to)
    }

    /// Occupies `[from, to)`. On error the grid is left untouched.
    pub fn occupy_slots(&mut self, from: usize, to: usize) -> Result<(), SlotError> {
        self.slots.occupy(from, to)
    }

    /// Frees `[from, to)`. Releasing a free slot is an error (double release).
    pub fn release_slots(&mut self, from: usize, to: usize) -> Result<(), SlotError> {
        self.slots.release(from, to)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    name: String,
    nodes: Vec<Node>,
    links: Vec<Link>,
    adjacency: BTreeMap<(NodeId, NodeId), LinkId>,
}

impl Network {
    /// Creates a network with nodes `0..node_count` and no links.
    pub fn new(name: impl Into<String>, node_count: usize) -> Self {
        Self {
            name: name.into(),
            nodes: (0..node_count).map(|id| Node { id }).collect(),
            links: Vec::new(),
            adjacency: BTreeMap::new(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn link_count(&self) -> usize {
        self.links.len()
    }

    /// Appends a directed link and returns its id (the next dense index).
    pub fn add_link(&mut self, src: NodeId, dst: NodeId, length_km: f64, slots: usize) -> Result<LinkId, ModelError> {
        for node in [src, dst] {
            if node >= self.nodes.len() {
                return Err(ModelError::UnknownNode {
                    node,
                    count: self.nodes.len(),
                });
            }
        }
        if src == dst {
            return Err(ModelError::SelfLoop(src));
        }
        if slots == 0 {
            return Err(ModelError::NoSlots);
        }
        if !(length_km.is_finite() && length_km >= 0.0) {
            return Err(ModelError::InvalidLength(length_km));
        }
        if self.adjacency.contains_key(&(src, dst)) {
            return Err(ModelError::DuplicateLink { src, dst });
        }
        let id = self.links.len();
        self.links.push(Link {
            id,
            src,
            dst,
            length_km,
            slots: SlotGrid::new(slots),
        });
        self.adjacency.insert((src, dst), id);
        Ok(id)
    }

    pub fn link(&self, id: LinkId) -> Result<&Link, ModelError> {
        self.links.get(id).ok_or(ModelError::UnknownLink(id))
    }

    pub fn link_by_endpoints(&self, src: NodeId, dst: NodeId) -> Result<LinkId, ModelError> {
        self.adjacency
            .get(&(src, dst))
            .copied()
            .ok_or(ModelError::NoSuchLink { src, dst })
    }

    pub fn occupy_slots(&mut self, link: LinkId, from: usize, to: usize) -> Result<(), ModelError> {
        self.link_mut(link)?
            .occupy_slots(from, to)
            .map_err(|source| ModelError::Slot { link, source })
    }

    pub fn release_slots(&mut self, link: LinkId, from: usize, to: usize) -> Result<(), ModelError> {
        self.link_mut(link)?
            .release_slots(from, to)
            .map_err(|source| ModelError::Slot { link, source })
    }

    pub fn is_range_free(&self, link: LinkId, from: usize, to: usize) -> Result<bool, ModelError> {
        self.link(link)?
            .is_range_free(from, to)
            .map_err(|source| ModelError::Slot { link, source })
    }

    /// True when no slot on any link is occupied.
    pub fn is_all_free(&self) -> bool {
        self.links.iter().all(|l| l.slots.is_all_free())
    }

    pub fn occupied_slots(&self) -> usize {
        self.links.iter().map(|l| l.slots.occupied_count()).sum()
    }

    fn link_mut(&mut self, id: LinkId) -> Result<&mut Link, ModelError> {
        self.links.get_mut(id).ok_or(ModelError::UnknownLink(id))
    }
}

/// A chain of directed links. The length is the in-order sum of link lengths.
#[derive(Debug, Clone, PartialEq)]
pub struct Route {
    links: Vec<LinkId>,
    src: NodeId,
    dst: NodeId,
    length_km: f64,
}

impl Route {
    pub fn new(net: &Network, links: Vec<LinkId>) -> Result<Self, ModelError> {
        let (first, last) = match (links.first(), links.last()) {
            (Some(&f), Some(&l)) => (net.link(f)?, net.link(l)?),
            _ => return Err(ModelError::EmptyRoute),
        };
        for pair in links.windows(2) {
            let (a, b) = (net.link(pair[0])?, net.link(pair[1])?);
            if a.dst != b.src {
                return Err(ModelError::BrokenChain { prev: a.id, next: b.id });
            }
        }
        let (src, dst) = (first.src, last.dst);
        let length_km = Self::sum_lengths(net, &links)?;
        Ok(Self {
            links,
            src,
            dst,
            length_km,
        })
    }

    /// Resolves a node sequence `[n0, n1, ..]` into the link chain `n0->n1->..`.
    pub fn from_nodes(net: &Network, nodes: &[NodeId]) -> Result<Self, ModelError> {
        if nodes.len() < 2 {
            return Err(ModelError::EmptyRoute);
        }
        let links = nodes
            .windows(2)
            .map(|p| net.link_by_endpoints(p[0], p[1]))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(net, links)
    }

    fn sum_lengths(net: &Network, links: &[LinkId]) -> Result<f64, ModelError> {
        links.iter().try_fold(0.0, |acc, &l| Ok(acc + net.link(l)?.length_km))
    }

    pub fn link_ids(&self) -> &[LinkId] {
        &self.links
    }

    pub fn len(&self) -> usize {
        self.links.len()
    }

    pub fn is_empty(&self) -> bool {
        self.links.is_empty()
    }

    pub fn src(&self) -> NodeId {
        self.src
    }

    pub fn dst(&self) -> NodeId {
        self.dst
    }

    pub fn length_km(&self) -> f64 {
        self.length_km
    }

    /// Node sequence visited by the route, source first.
    pub fn nodes(&self, net: &Network) -> Result<Vec<NodeId>, ModelError> {
        let mut out = Vec::with_capacity(self.links.len() + 1);
        out.push(self.src);
        for &l in &self.links {
            out.push(net.link(l)?.dst);
        }
        Ok(out)
    }

    /// Recomputes the length from `net`; equal to [`Route::length_km`] for the
    /// network the route was built against.
    pub fn recompute_length(&self, net: &Network) -> Result<f64, ModelError> {
        Self::sum_lengths(net, &self.links)
    }
}

/// Candidate routes per ordered node pair, kept in retry order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RouteSet {
    routes: BTreeMap<(NodeId, NodeId), Vec<Route>>,
}

impl RouteSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Sets the candidate list for `(src, dst)`, replacing any previous one.
    pub fn insert(&mut self, src: NodeId, dst: NodeId, routes: Vec<Route>) -> Result<(), ModelError> {
        for r in &routes {
            if r.src != src || r.dst != dst {
                return Err(ModelError::WrongEndpoints {
                    src,
                    dst,
                    from: r.src,
                    to: r.dst,
                });
            }
        }
        self.routes.insert((src, dst), routes);
        Ok(())
    }

    /// Routes for the pair, empty when none are known.
    pub fn get(&self, src: NodeId, dst: NodeId) -> &[Route] {
        self.routes.get(&(src, dst)).map_or(&[], Vec::as_slice)
    }

    pub fn pairs(&self) -> impl Iterator<Item = ((NodeId, NodeId), &[Route])> {
        self.routes.iter().map(|(&k, v)| (k, v.as_slice()))
    }

    pub fn pair_count(&self) -> usize {
        self.routes.len()
    }

    pub fn route_count(&self) -> usize {
        self.routes.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.route_count() == 0
    }

    /// Keeps only the first `k` candidates of every pair.
    pub fn truncate(&mut self, k: usize) {
        for v in self.routes.values_mut() {
            v.truncate(k);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn link8() -> Link {
        let mut net = Network::new("t", 2);
        net.add_link(0, 1, 10.0, 8).unwrap();
        net.links[0].clone()
    }

    fn occupied(link: &Link) -> Vec<usize> {
        (0..link.slot_count())
            .filter(|&i| link.slots().is_occupied(i))
            .collect()
    }

    #[test]
    fn occupy_marks_half_open_range() {
        let mut l = link8();
        l.occupy_slots(0, 2).unwrap();
        assert_eq!(occupied(&l), vec![0, 1]);
    }

    #[test]
    fn occupy_overlap_is_rejected_without_change() {
        let mut l = link8();
        l.occupy_slots(0, 2).unwrap();
        let before = l.clone();
        assert_eq!(l.occupy_slots(1, 3), Err(SlotError::AlreadyOccupied { slot: 1 }));
        assert_eq!(l, before);
    }

    #[test]
    fn occupy_top_of_320_slot_grid() {
        let mut net = Network::new("t", 2);
        net.add_link(0, 1, 1.0, 320).unwrap();
        net.occupy_slots(0, 318, 320).unwrap();
        let l = net.link(0).unwrap();
        assert_eq!(occupied(l), vec![318, 319]);
        assert_eq!(
            net.occupy_slots(0, 319, 321),
            Err(ModelError::Slot {
                link: 0,
                source: SlotError::OutOfBounds {
                    from: 319,
                    to: 321,
                    len: 320
                }
            })
        );
    }

    #[test]
    fn release_paths() {
        let mut l = link8();
        l.occupy_slots(0, 2).unwrap();
        l.release_slots(0, 2).unwrap();
        assert!(l.slots().is_all_free());
        assert_eq!(l.release_slots(0, 2), Err(SlotError::NotOccupied { slot: 0 }));

        l.occupy_slots(0, 4).unwrap();
        l.release_slots(0, 2).unwrap();
        assert_eq!(occupied(&l), vec![2, 3]);
    }

    #[test]
    fn empty_or_inverted_ranges_are_out_of_bounds() {
        let mut l = link8();
        assert!(matches!(l.occupy_slots(3, 3), Err(SlotError::OutOfBounds { .. })));
        assert!(matches!(l.is_range_free(5, 2), Err(SlotError::OutOfBounds { .. })));
        assert!(matches!(l.release_slots(0, 9), Err(SlotError::OutOfBounds { .. })));
    }

    #[test]
    fn range_free_queries() {
        let l = link8();
        assert_eq!(l.is_range_free(0, 8), Ok(true));

        let g = SlotGrid::with_occupied(8, [3]);
        assert_eq!(g.is_range_free(2, 5), Ok(false));

        let g = SlotGrid::with_occupied(8, [0, 1, 4, 5, 6]);
        assert_eq!(g.is_range_free(2, 4), Ok(true));
    }

    #[test]
    fn endpoints_lookup() {
        let mut net = Network::new("t", 3);
        net.add_link(0, 1, 1.0, 4).unwrap();
        net.add_link(1, 0, 1.0, 4).unwrap();
        assert_eq!(net.link_by_endpoints(0, 1), Ok(0));
        assert_eq!(net.link_by_endpoints(1, 0), Ok(1));
        assert_eq!(
            net.link_by_endpoints(0, 0),
            Err(ModelError::NoSuchLink { src: 0, dst: 0 })
        );
        assert_eq!(
            net.link_by_endpoints(0, 2),
            Err(ModelError::NoSuchLink { src: 0, dst: 2 })
        );
    }

    #[test]
    fn link_construction_is_validated() {
        let mut net = Network::new("t", 3);
        assert_eq!(net.add_link(0, 0, 1.0, 4), Err(ModelError::SelfLoop(0)));
        assert_eq!(
            net.add_link(0, 5, 1.0, 4),
            Err(ModelError::UnknownNode { node: 5, count: 3 })
        );
        assert_eq!(net.add_link(0, 1, 1.0, 0), Err(ModelError::NoSlots));
        assert!(matches!(net.add_link(0, 1, -1.0, 4), Err(ModelError::InvalidLength(_))));
        net.add_link(0, 1, 1.0, 4).unwrap();
        assert_eq!(
            net.add_link(0, 1, 2.0, 4),
            Err(ModelError::DuplicateLink { src: 0, dst: 1 })
        );
    }

    #[test]
    fn routes_chain_and_sum_lengths() {
        let mut net = Network::new("t", 4);
        let a = net.add_link(0, 1, 100.5, 4).unwrap();
        let b = net.add_link(1, 2, 200.25, 4).unwrap();
        let c = net.add_link(3, 2, 1.0, 4).unwrap();
        let r = Route::new(&net, vec![a, b]).unwrap();
        assert_eq!((r.src(), r.dst()), (0, 2));
        assert_eq!(r.length_km(), 300.75);
        assert_eq!(r.recompute_length(&net).unwrap(), r.length_km());
        assert_eq!(r.nodes(&net).unwrap(), vec![0, 1, 2]);
        assert_eq!(
            Route::new(&net, vec![a, c]),
            Err(ModelError::BrokenChain { prev: a, next: c })
        );
        assert_eq!(Route::new(&net, vec![]), Err(ModelError::EmptyRoute));
        assert_eq!(Route::from_nodes(&net, &[0, 1, 2]).unwrap(), r);

        let mut set = RouteSet::new();
        assert!(set.insert(0, 1, vec![r.clone()]).is_err());
        set.insert(0, 2, vec![r.clone()]).unwrap();
        assert_eq!(set.get(0, 2).len(), 1);
        assert!(set.get(2, 0).is_empty());
    }

    #[derive(Debug, Clone)]
    enum Op {
        Occupy(usize, usize),
        Release(usize, usize),
    }

    fn op() -> impl Strategy<Value = Op> {
        (any::<bool>(), 0usize..18, 0usize..18).prop_map(
            |(occ, a, b)| {
                if occ {
                    Op::Occupy(a, b)
                } else {
                    Op::Release(a, b)
                }
            },
        )
    }

    proptest! {
        #[test]
        fn grid_tracks_a_shadow_model(ops in proptest::collection::vec(op(), 0..60)) {
            let mut grid = SlotGrid::new(16);
            let mut shadow = [false; 16];
            for op in ops {
                let before = grid.clone();
                let (res, from, to, want) = match op {
                    Op::Occupy(f, t) => (grid.occupy(f, t), f, t, true),
                    Op::Release(f, t) => (grid.release(f, t), f, t, false),
                };
                let valid = from < to && to <= 16 && shadow[from..to].iter().all(|&s| s != want);
                prop_assert_eq!(res.is_ok(), valid);
                if valid {
                    shadow[from..to].fill(want);
                } else {
                    prop_assert_eq!(&grid, &before);
                }
                prop_assert_eq!(grid.as_slice(), &shadow[..]);
            }
        }

        #[test]
        fn occupy_then_release_is_identity(occ in proptest::collection::vec(0usize..16, 0..8), from in 0usize..16, len in 1usize..16) {
            let to = (from + len).min(16);
            let mut grid = SlotGrid::with_occupied(16, occ);
            let before = grid.clone();
            if grid.occupy(from, to).is_ok() {
                grid.release(from, to).unwrap();
            }
            prop_assert_eq!(grid, before);
        }
    }
}
