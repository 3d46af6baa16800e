//! The algorithm-facing side of a request.
//!
//! An allocator is any `FnMut(&mut AllocationContext) -> Verdict`. It reads
//! the candidate routes, the link grids and the requested bitrate, stages
//! slot ranges with [`AllocationContext::alloc_slots`] and returns a verdict.
//! Staged ranges reach the live grids only when the verdict is
//! [`Verdict::Allocated`]; on [`Verdict::NotAllocated`] they are dropped, so a
//! blocked request never leaks spectrum.
//!
//! A typical allocator has this shape:
//!
//! ```text
//! |ctx| {
//!     for route in 0..ctx.route_count() {
//!         // inspect ctx.link_in_route(route, i)?.slots(), update own counters
//!         if fits {
//!             // ctx.alloc_slots(link, from, to) on every link of the route
//!             return Verdict::Allocated;
//!         }
//!     }
//!     Verdict::NotAllocated
//! }
//! ```

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use thiserror::Error;

use crate::model::{Link, LinkId, ModelError, Network, NodeId, Route, SlotError, SlotGrid};
use crate::traffic::{BitRateEntry, ModulationOption};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    Allocated,
    NotAllocated,
}

/// A callback deciding one request.
pub type Allocator = Box<dyn FnMut(&mut AllocationContext<'_>) -> Verdict + Send>;

/// Slots `[from, to)` on one link.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SlotRange {
    pub link: LinkId,
    pub from: usize,
    pub to: usize,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AllocError {
    #[error("route index {index} out of range ({count} routes)")]
    RouteIndexOutOfRange { index: usize, count: usize },
    #[error("link position {index} out of range (route has {count} links)")]
    LinkIndexOutOfRange { index: usize, count: usize },
    #[error("option index {index} out of range ({count} modulation options)")]
    OptionIndexOutOfRange { index: usize, count: usize },
    #[error("unknown link id {0}")]
    UnknownLink(LinkId),
    #[error("link {link}: {source}")]
    OutOfBounds { link: LinkId, source: SlotError },
    #[error("staging [{from}, {to}) on link {link} overlaps an earlier staged range")]
    StagedOverlap { link: LinkId, from: usize, to: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AuditViolation {
    /// Staged slots on a link do not form one gap-free interval.
    Contiguity { link: LinkId },
    /// Links of one connection use different slot intervals.
    Continuity { first: SlotRange, other: SlotRange },
}

impl core::fmt::Display for AuditViolation {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Self::Contiguity { link } => write!(f, "slots staged on link {link} are not contiguous"),
            Self::Continuity { first, other } => write!(
                f,
                "link {} uses [{}, {}) but link {} uses [{}, {})",
                first.link, first.from, first.to, other.link, other.from, other.to
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CommitError {
    #[error("allocator reported success after a rejected staging call: {0}")]
    Staging(AllocError),
    #[error("allocator reported success without staging any slots")]
    Empty,
    #[error("staged range [{}, {}) on link {} is not free", .0.from, .0.to, .0.link)]
    Conflict(SlotRange),
    #[error("audit violation: {0}")]
    Audit(AuditViolation),
}

/// Read-only view of a link handed to allocators.
#[derive(Debug, Clone, Copy)]
pub struct LinkView<'a> {
    link: &'a Link,
}

impl<'a> LinkView<'a> {
    pub fn id(&self) -> LinkId {
        self.link.id()
    }

    pub fn src(&self) -> NodeId {
        self.link.src()
    }

    pub fn dst(&self) -> NodeId {
        self.link.dst()
    }

    pub fn length_km(&self) -> f64 {
        self.link.length_km()
    }

    pub fn slot_count(&self) -> usize {
        self.link.slot_count()
    }

    pub fn is_occupied(&self, slot: usize) -> bool {
        self.link.slots().is_occupied(slot)
    }

    pub fn is_range_free(&self, from: usize, to: usize) -> Result<bool, SlotError> {
        self.link.is_range_free(from, to)
    }

    pub fn slots(&self) -> &'a SlotGrid {
        self.link.slots()
    }
}

/// Everything an allocator may see or do for the current request.
pub struct AllocationContext<'a> {
    src: NodeId,
    dst: NodeId,
    routes: &'a [Route],
    request: &'a BitRateEntry,
    network: &'a Network,
    staging: Staging,
}

impl<'a> AllocationContext<'a> {
    pub fn new(network: &'a Network, src: NodeId, dst: NodeId, routes: &'a [Route], request: &'a BitRateEntry) -> Self {
        Self {
            src,
            dst,
            routes,
            request,
            network,
            staging: Staging::default(),
        }
    }

    pub fn src(&self) -> NodeId {
        self.src
    }

    pub fn dst(&self) -> NodeId {
        self.dst
    }

    pub fn route_count(&self) -> usize {
        self.routes.len()
    }

    pub fn route(&self, route: usize) -> Result<&'a Route, AllocError> {
        self.routes.get(route).ok_or(AllocError::RouteIndexOutOfRange {
            index: route,
            count: self.routes.len(),
        })
    }

    pub fn link_count_in_route(&self, route: usize) -> Result<usize, AllocError> {
        Ok(self.route(route)?.len())
    }

    /// The `position`-th link of route `route`.
    pub fn link_in_route(&self, route: usize, position: usize) -> Result<LinkView<'a>, AllocError> {
        let r = self.route(route)?;
        let id = *r.link_ids().get(position).ok_or(AllocError::LinkIndexOutOfRange {
            index: position,
            count: r.len(),
        })?;
        self.link(id)
    }

    pub fn link(&self, id: LinkId) -> Result<LinkView<'a>, AllocError> {
        let link = self.network.link(id).map_err(|_| AllocError::UnknownLink(id))?;
        Ok(LinkView { link })
    }

    pub fn request(&self) -> &'a BitRateEntry {
        self.request
    }

    pub fn option_count(&self) -> usize {
        self.request.options().len()
    }

    fn option(&self, index: usize) -> Result<&'a ModulationOption, AllocError> {
        let opts = self.request.options();
        opts.get(index).ok_or(AllocError::OptionIndexOutOfRange {
            index,
            count: opts.len(),
        })
    }

    pub fn request_slots(&self, option: usize) -> Result<usize, AllocError> {
        Ok(self.option(option)?.slot_count)
    }

    pub fn request_reach(&self, option: usize) -> Result<f64, AllocError> {
        Ok(self.option(option)?.reach_km)
    }

    pub fn request_modulation(&self, option: usize) -> Result<&'a str, AllocError> {
        Ok(&self.option(option)?.modulation)
    }

    pub fn request_bitrate(&self) -> f64 {
        self.request.bitrate_gbps()
    }

    pub fn request_bitrate_label(&self) -> &'a str {
        self.request.label()
    }

    /// Stages `[from, to)` on `link`. Live grids are not touched; occupancy is
    /// checked when the verdict is committed.
    ///
    /// A failed call is remembered: returning [`Verdict::Allocated`] after it
    /// aborts the simulation.
    pub fn alloc_slots(&mut self, link: LinkId, from: usize, to: usize) -> Result<(), AllocError> {
        let res = self.try_stage(link, from, to);
        if let Err(e) = &res {
            self.staging.fault.get_or_insert_with(|| e.clone());
        }
        res
    }

    fn try_stage(&mut self, link: LinkId, from: usize, to: usize) -> Result<(), AllocError> {
        let l = self.network.link(link).map_err(|_| AllocError::UnknownLink(link))?;
        if !(from < to && to <= l.slot_count()) {
            return Err(AllocError::OutOfBounds {
                link,
                source: SlotError::OutOfBounds {
                    from,
                    to,
                    len: l.slot_count(),
                },
            });
        }
        let overlaps = self
            .staging
            .ranges
            .iter()
            .any(|r| r.link == link && r.from < to && from < r.to);
        if overlaps {
            return Err(AllocError::StagedOverlap { link, from, to });
        }
        self.staging.ranges.push(SlotRange { link, from, to });
        Ok(())
    }

    pub fn staged(&self) -> &[SlotRange] {
        &self.staging.ranges
    }

    /// Drops every staged range and any remembered staging fault.
    pub fn discard_staged(&mut self) {
        self.staging = Staging::default();
    }

    /// Ends the context, releasing the borrow of the network.
    pub fn into_staging(self) -> Staging {
        self.staging
    }
}

/// Ranges staged by one allocator invocation.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Staging {
    ranges: Vec<SlotRange>,
    fault: Option<AllocError>,
}

impl Staging {
    pub fn ranges(&self) -> &[SlotRange] {
        &self.ranges
    }

    /// Occupies every staged range, or none of them.
    ///
    /// With `strict_audit`, the ranges on each link must merge into a single
    /// interval and every link must use the same interval.
    pub fn commit(self, net: &mut Network, strict_audit: bool) -> Result<Vec<SlotRange>, CommitError> {
        if let Some(fault) = self.fault {
            return Err(CommitError::Staging(fault));
        }
        if self.ranges.is_empty() {
            return Err(CommitError::Empty);
        }
        if strict_audit {
            audit(&self.ranges).map_err(CommitError::Audit)?;
        }
        for r in &self.ranges {
            match net.is_range_free(r.link, r.from, r.to) {
                Ok(true) => {}
                Ok(false) => return Err(CommitError::Conflict(*r)),
                Err(ModelError::UnknownLink(l)) => return Err(CommitError::Staging(AllocError::UnknownLink(l))),
                Err(ModelError::Slot { link, source }) => {
                    return Err(CommitError::Staging(AllocError::OutOfBounds { link, source }))
                }
                Err(_) => return Err(CommitError::Conflict(*r)),
            }
        }
        // Staged ranges are pairwise disjoint per link and all free, so every
        // occupy succeeds.
        for r in &self.ranges {
            net.occupy_slots(r.link, r.from, r.to)
                .expect("validated staged range must be occupiable");
        }
        Ok(self.ranges)
    }
}

/// Checks contiguity within each link and continuity across links.
pub fn audit(ranges: &[SlotRange]) -> Result<(), AuditViolation> {
    let mut per_link: BTreeMap<LinkId, Vec<(usize, usize)>> = BTreeMap::new();
    for r in ranges {
        per_link.entry(r.link).or_default().push((r.from, r.to));
    }
    let mut merged: Vec<SlotRange> = Vec::with_capacity(per_link.len());
    for (link, mut spans) in per_link {
        spans.sort_unstable();
        let (from, mut to) = spans[0];
        for &(f, t) in &spans[1..] {
            if f != to {
                return Err(AuditViolation::Contiguity { link });
            }
            to = t;
        }
        merged.push(SlotRange { link, from, to });
    }
    let first = merged[0];
    for &other in &merged[1..] {
        if (other.from, other.to) != (first.from, first.to) {
            return Err(AuditViolation::Continuity { first, other });
        }
    }
    Ok(())
}
