//! Reference spectrum allocation algorithms: First Fit, Exact Fit and
//! First-Last Fit.
//!
//! All three walk the candidate routes in order and, per route, the
//! modulation options whose reach covers the route (in catalog order, fewest
//! slots first). The first placement found is staged on every link of the
//! route, so accepted connections satisfy continuity and contiguity by
//! construction.

use alloc::vec::Vec;
use core::str::FromStr;

use thiserror::Error;

use crate::allocation::{AllocError, AllocationContext, Allocator, Verdict};
use crate::model::SlotGrid;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AlgorithmError {
    #[error("route {route} mixes links with {first} and {other} slots")]
    HeterogeneousSlotCounts { route: usize, first: usize, other: usize },
    #[error(transparent)]
    Context(#[from] AllocError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    LowToHigh,
    HighToLow,
}

/// Free slots `[from, to)` on the intersection grid of a route.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FreeBlock {
    pub from: usize,
    pub to: usize,
}

impl FreeBlock {
    pub fn len(&self) -> usize {
        self.to - self.from
    }

    pub fn is_empty(&self) -> bool {
        self.from == self.to
    }
}

/// Grid where a slot is occupied iff it is occupied on any link of `route`.
pub fn intersection_grid(ctx: &AllocationContext<'_>, route: usize) -> Result<SlotGrid, AlgorithmError> {
    let links = ctx.route(route)?.link_ids();
    let first = ctx.link(links[0])?.slots();
    let mut grid = first.clone();
    for &id in &links[1..] {
        let other = ctx.link(id)?.slots();
        if other.len() != first.len() {
            return Err(AlgorithmError::HeterogeneousSlotCounts {
                route,
                first: first.len(),
                other: other.len(),
            });
        }
        grid.merge_occupied(other);
    }
    Ok(grid)
}

/// Placement of exactly `size` free slots with the lowest (`LowToHigh`) or
/// highest (`HighToLow`) start index.
pub fn first_free_block(grid: &SlotGrid, size: usize, direction: Direction) -> Option<FreeBlock> {
    let slots = grid.as_slice();
    if size == 0 || size > slots.len() {
        return None;
    }
    match direction {
        Direction::LowToHigh => {
            let mut run = 0;
            for (i, &occ) in slots.iter().enumerate() {
                run = if occ { 0 } else { run + 1 };
                if run == size {
                    return Some(FreeBlock {
                        from: i + 1 - size,
                        to: i + 1,
                    });
                }
            }
            None
        }
        Direction::HighToLow => {
            let mut run = 0;
            for (i, &occ) in slots.iter().enumerate().rev() {
                run = if occ { 0 } else { run + 1 };
                if run == size {
                    return Some(FreeBlock { from: i, to: i + size });
                }
            }
            None
        }
    }
}

/// Maximal runs of free slots, lowest first.
pub fn maximal_free_blocks(grid: &SlotGrid) -> Vec<FreeBlock> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, &occ) in grid.as_slice().iter().enumerate() {
        match (occ, start) {
            (false, None) => start = Some(i),
            (true, Some(s)) => {
                out.push(FreeBlock { from: s, to: i });
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push(FreeBlock {
            from: s,
            to: grid.len(),
        });
    }
    out
}

/// Lowest maximal free block whose length is exactly `size`.
pub fn exact_free_block(grid: &SlotGrid, size: usize) -> Option<FreeBlock> {
    maximal_free_blocks(grid).into_iter().find(|b| b.len() == size)
}

/// Options usable on `route`: those whose reach covers the route length, in
/// catalog order.
pub fn modulation_options(ctx: &AllocationContext<'_>, route: usize) -> Result<Vec<usize>, AllocError> {
    let length = ctx.route(route)?.length_km();
    Ok(ctx
        .request()
        .options()
        .iter()
        .enumerate()
        .filter(|(_, o)| o.reach_km >= length)
        .map(|(i, _)| i)
        .collect())
}

/// Shared route/option loop. `place` picks a block on the intersection grid.
fn allocate_with(
    ctx: &mut AllocationContext<'_>,
    mut place: impl FnMut(&SlotGrid, usize) -> Option<FreeBlock>,
) -> Result<Verdict, AlgorithmError> {
    for route in 0..ctx.route_count() {
        let options = modulation_options(ctx, route)?;
        if options.is_empty() {
            continue;
        }
        let grid = match intersection_grid(ctx, route) {
            Ok(g) => g,
            // No continuous placement exists across mismatched grids.
            Err(AlgorithmError::HeterogeneousSlotCounts { .. }) => continue,
            Err(e) => return Err(e),
        };
        for opt in options {
            let need = ctx.request_slots(opt)?;
            if let Some(block) = place(&grid, need) {
                let links = ctx.route(route)?.link_ids();
                for &link in links {
                    ctx.alloc_slots(link, block.from, block.to)?;
                }
                return Ok(Verdict::Allocated);
            }
        }
    }
    Ok(Verdict::NotAllocated)
}

fn settle(ctx: &mut AllocationContext<'_>, res: Result<Verdict, AlgorithmError>) -> Verdict {
    match res {
        Ok(v) => v,
        Err(_) => {
            // Only reachable through a malformed context; the staged fault
            // (if any) is dropped with the rest of the staging.
            ctx.discard_staged();
            Verdict::NotAllocated
        }
    }
}

pub fn first_fit(ctx: &mut AllocationContext<'_>) -> Verdict {
    let res = allocate_with(ctx, |g, n| first_free_block(g, n, Direction::LowToHigh));
    settle(ctx, res)
}

pub fn exact_fit(ctx: &mut AllocationContext<'_>) -> Verdict {
    let res = allocate_with(ctx, |g, n| {
        exact_free_block(g, n).or_else(|| first_free_block(g, n, Direction::LowToHigh))
    });
    settle(ctx, res)
}

/// Requests below `threshold_gbps` search upward from slot 0; the rest search
/// downward from the top of the spectrum.
pub fn first_last_fit(ctx: &mut AllocationContext<'_>, threshold_gbps: f64) -> Verdict {
    let direction = if ctx.request_bitrate() < threshold_gbps {
        Direction::LowToHigh
    } else {
        Direction::HighToLow
    };
    let res = allocate_with(ctx, |g, n| first_free_block(g, n, direction));
    settle(ctx, res)
}

pub const DEFAULT_FLF_THRESHOLD_GBPS: f64 = 100.0;

/// The bundled algorithms, selectable by name.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Algorithm {
    FirstFit,
    ExactFit,
    FirstLastFit { threshold_gbps: f64 },
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [
        Algorithm::FirstFit,
        Algorithm::ExactFit,
        Algorithm::FirstLastFit {
            threshold_gbps: DEFAULT_FLF_THRESHOLD_GBPS,
        },
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Self::FirstFit => "FF",
            Self::ExactFit => "EF",
            Self::FirstLastFit { .. } => "FLF",
        }
    }

    pub fn allocate(&self, ctx: &mut AllocationContext<'_>) -> Verdict {
        match *self {
            Self::FirstFit => first_fit(ctx),
            Self::ExactFit => exact_fit(ctx),
            Self::FirstLastFit { threshold_gbps } => first_last_fit(ctx, threshold_gbps),
        }
    }

    pub fn into_allocator(self) -> Allocator {
        alloc::boxed::Box::new(move |ctx: &mut AllocationContext<'_>| self.allocate(ctx))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown algorithm {0:?} (expected FF, EF or FLF)")]
pub struct UnknownAlgorithm(pub alloc::string::String);

impl FromStr for Algorithm {
    type Err = UnknownAlgorithm;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "FF" => Ok(Self::FirstFit),
            "EF" => Ok(Self::ExactFit),
            "FLF" => Ok(Self::FirstLastFit {
                threshold_gbps: DEFAULT_FLF_THRESHOLD_GBPS,
            }),
            other => Err(UnknownAlgorithm(other.into())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::allocation::{SlotRange, Staging};
    use crate::model::{Network, Route};
    use crate::traffic::{BitRateCatalog, BitRateEntry, ModulationOption};
    use alloc::vec;
    use proptest::prelude::*;

    /// Exhaustive placement search over every start index.
    fn brute_first(grid: &[bool], size: usize, dir: Direction) -> Option<FreeBlock> {
        if size == 0 || size > grid.len() {
            return None;
        }
        let fits = |i: usize| grid[i..i + size].iter().all(|&s| !s);
        let starts = 0..=grid.len() - size;
        let start = match dir {
            Direction::LowToHigh => starts.clone().find(|&i| fits(i)),
            Direction::HighToLow => starts.rev().find(|&i| fits(i)),
        };
        start.map(|from| FreeBlock { from, to: from + size })
    }

    /// Enumerates every interval and keeps the free ones bounded by an
    /// occupied slot or the grid edge on both sides.
    fn brute_exact(grid: &[bool], size: usize) -> Option<FreeBlock> {
        let n = grid.len();
        (0..n)
            .flat_map(|from| (from + 1..=n).map(move |to| (from, to)))
            .filter(|&(f, t)| grid[f..t].iter().all(|&s| !s))
            .filter(|&(f, t)| (f == 0 || grid[f - 1]) && (t == n || grid[t]))
            .filter(|&(f, t)| t - f == size)
            .map(|(from, to)| FreeBlock { from, to })
            .min_by_key(|b| b.from)
    }

    fn grid(len: usize, occ: &[usize]) -> SlotGrid {
        SlotGrid::with_occupied(len, occ.iter().copied())
    }

    #[test]
    fn first_free_block_examples() {
        let g = grid(8, &[0, 1, 4]);
        assert_eq!(
            first_free_block(&g, 2, Direction::LowToHigh),
            Some(FreeBlock { from: 2, to: 4 })
        );
        assert_eq!(
            first_free_block(&g, 2, Direction::HighToLow),
            Some(FreeBlock { from: 6, to: 8 })
        );
        assert_eq!(first_free_block(&grid(8, &[2]), 8, Direction::LowToHigh), None);
        assert_eq!(first_free_block(&grid(8, &[2]), 8, Direction::HighToLow), None);
        assert_eq!(first_free_block(&grid(8, &[]), 9, Direction::LowToHigh), None);
    }

    #[test]
    fn exact_free_block_examples() {
        let g = grid(8, &[3, 4, 7]);
        assert_eq!(exact_free_block(&g, 2), Some(FreeBlock { from: 5, to: 7 }));
        assert_eq!(exact_free_block(&g, 3), Some(FreeBlock { from: 0, to: 3 }));
        assert_eq!(exact_free_block(&grid(8, &[]), 3), None);
        assert_eq!(
            maximal_free_blocks(&g),
            vec![FreeBlock { from: 0, to: 3 }, FreeBlock { from: 5, to: 7 }]
        );
    }

    #[test]
    fn brute_force_agrees_on_fixed_examples() {
        let g = [true, true, false, false, true, false, false, false];
        assert_eq!(
            brute_first(&g, 2, Direction::LowToHigh),
            Some(FreeBlock { from: 2, to: 4 })
        );
        assert_eq!(
            brute_first(&g, 2, Direction::HighToLow),
            Some(FreeBlock { from: 6, to: 8 })
        );
        assert_eq!(brute_exact(&g, 3), Some(FreeBlock { from: 5, to: 8 }));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn kernels_match_brute_force(bits in proptest::collection::vec(any::<bool>(), 1..=16), size in 1usize..=16) {
            let g = SlotGrid::from_bools(bits.clone());
            for dir in [Direction::LowToHigh, Direction::HighToLow] {
                prop_assert_eq!(first_free_block(&g, size, dir), brute_first(&bits, size, dir));
            }
            prop_assert_eq!(exact_free_block(&g, size), brute_exact(&bits, size));
        }
    }

    /// Three nodes in a line plus a long detour; all links 320 slots.
    fn line() -> (Network, Vec<Route>) {
        let mut net = Network::new("line", 4);
        let a = net.add_link(0, 1, 400.0, 320).unwrap();
        let b = net.add_link(1, 2, 500.0, 320).unwrap();
        let c = net.add_link(0, 3, 3000.0, 320).unwrap();
        let d = net.add_link(3, 2, 3000.0, 320).unwrap();
        let routes = vec![
            Route::new(&net, vec![a, b]).unwrap(),
            Route::new(&net, vec![c, d]).unwrap(),
        ];
        (net, routes)
    }

    fn bpsk(label: &str, slots: usize) -> BitRateEntry {
        BitRateEntry::new(label, vec![ModulationOption::new("BPSK", slots, 1e9)]).unwrap()
    }

    fn staged_blocks(ctx: &AllocationContext<'_>) -> Vec<(usize, usize, usize)> {
        ctx.staged().iter().map(|r| (r.link, r.from, r.to)).collect()
    }

    #[test]
    fn intersection_is_per_slot_or() {
        let (mut net, routes) = line();
        net.occupy_slots(0, 0, 2).unwrap();
        net.occupy_slots(1, 3, 4).unwrap();
        let req = bpsk("10", 1);
        let ctx = AllocationContext::new(&net, 0, 2, &routes, &req);
        let g = intersection_grid(&ctx, 0).unwrap();
        let occ: Vec<_> = (0..320).filter(|&i| g.is_occupied(i)).collect();
        assert_eq!(occ, vec![0, 1, 3]);

        let single = [Route::new(&net, vec![0]).unwrap()];
        let ctx = AllocationContext::new(&net, 0, 1, &single, &req);
        assert_eq!(&intersection_grid(&ctx, 0).unwrap(), net.link(0).unwrap().slots());
        assert!(intersection_grid(&AllocationContext::new(&net, 0, 2, &routes, &req), 1)
            .unwrap()
            .is_all_free());
    }

    #[test]
    fn heterogeneous_routes_are_reported() {
        let mut net = Network::new("h", 3);
        let a = net.add_link(0, 1, 1.0, 8).unwrap();
        let b = net.add_link(1, 2, 1.0, 16).unwrap();
        let routes = [Route::new(&net, vec![a, b]).unwrap()];
        let req = bpsk("10", 1);
        let mut ctx = AllocationContext::new(&net, 0, 2, &routes, &req);
        assert_eq!(
            intersection_grid(&ctx, 0),
            Err(AlgorithmError::HeterogeneousSlotCounts {
                route: 0,
                first: 8,
                other: 16
            })
        );
        assert_eq!(first_fit(&mut ctx), Verdict::NotAllocated);
    }

    #[test]
    fn first_fit_on_empty_network_uses_route_zero() {
        let (net, routes) = line();
        let cat = BitRateCatalog::reference();
        for e in cat.entries() {
            let mut ctx = AllocationContext::new(&net, 0, 2, &routes, e);
            assert_eq!(first_fit(&mut ctx), Verdict::Allocated);
            let opt = modulation_options(&ctx, 0).unwrap()[0];
            let k = e.options()[opt].slot_count;
            assert_eq!(staged_blocks(&ctx), vec![(0, 0, k), (1, 0, k)]);
        }
    }

    #[test]
    fn first_fit_skips_occupied_prefix() {
        let (mut net, routes) = line();
        net.occupy_slots(1, 0, 5).unwrap();
        let req = bpsk("40", 4);
        let mut ctx = AllocationContext::new(&net, 0, 2, &routes[..1], &req);
        assert_eq!(first_fit(&mut ctx), Verdict::Allocated);
        assert_eq!(staged_blocks(&ctx), vec![(0, 5, 9), (1, 5, 9)]);
    }

    #[test]
    fn saturated_routes_block_and_retry_order_holds() {
        let (mut net, routes) = line();
        net.occupy_slots(0, 0, 320).unwrap();
        let req = bpsk("40", 4);
        let mut ctx = AllocationContext::new(&net, 0, 2, &routes, &req);
        assert_eq!(first_fit(&mut ctx), Verdict::Allocated);
        assert_eq!(staged_blocks(&ctx), vec![(2, 0, 4), (3, 0, 4)]);

        net.occupy_slots(3, 0, 320).unwrap();
        for alg in Algorithm::ALL {
            let mut ctx = AllocationContext::new(&net, 0, 2, &routes, &req);
            assert_eq!(alg.allocate(&mut ctx), Verdict::NotAllocated);
            assert!(ctx.staged().is_empty());
        }
    }

    #[test]
    fn exact_fit_prefers_exact_holes() {
        let (mut net, routes) = line();
        // Maximal blocks {[0,5), [10,12)} on the first route.
        net.occupy_slots(0, 5, 10).unwrap();
        net.occupy_slots(0, 12, 320).unwrap();
        let req = bpsk("20", 2);
        let mut ctx = AllocationContext::new(&net, 0, 2, &routes[..1], &req);
        assert_eq!(exact_fit(&mut ctx), Verdict::Allocated);
        assert_eq!(staged_blocks(&ctx), vec![(0, 10, 12), (1, 10, 12)]);

        net.release_slots(0, 5, 10).unwrap();
        net.release_slots(0, 12, 320).unwrap();
        net.occupy_slots(0, 5, 320).unwrap();
        let mut ctx = AllocationContext::new(&net, 0, 2, &routes[..1], &req);
        assert_eq!(exact_fit(&mut ctx), Verdict::Allocated);
        assert_eq!(staged_blocks(&ctx), vec![(0, 0, 2), (1, 0, 2)]);
    }

    #[test]
    fn first_last_fit_splits_on_threshold() {
        let (net, routes) = line();
        let one = &routes[..1];
        let req = bpsk("40", 4);
        let mut ctx = AllocationContext::new(&net, 0, 2, one, &req);
        assert_eq!(first_last_fit(&mut ctx, 100.0), Verdict::Allocated);
        assert_eq!(staged_blocks(&ctx)[0], (0, 0, 4));

        let req = bpsk("400", 32);
        let mut ctx = AllocationContext::new(&net, 0, 2, one, &req);
        assert_eq!(first_last_fit(&mut ctx, 100.0), Verdict::Allocated);
        assert_eq!(staged_blocks(&ctx)[0], (0, 288, 320));

        let req = bpsk("100", 8);
        let mut ctx = AllocationContext::new(&net, 0, 2, one, &req);
        assert_eq!(first_last_fit(&mut ctx, 100.0), Verdict::Allocated);
        assert_eq!(staged_blocks(&ctx)[0], (0, 312, 320));
    }

    #[test]
    fn modulation_options_follow_reach() {
        let mut net = Network::new("m", 3);
        let a = net.add_link(0, 1, 900.0, 320).unwrap();
        let b = net.add_link(1, 2, 80.0, 320).unwrap();
        let c = net.add_link(0, 2, 6000.0, 320).unwrap();
        let routes = [
            Route::new(&net, vec![a]).unwrap(),
            Route::new(&net, vec![b]).unwrap(),
            Route::new(&net, vec![c]).unwrap(),
        ];
        let cat = BitRateCatalog::reference();
        let e100 = &cat.entries()[2];
        let ctx = AllocationContext::new(&net, 0, 1, &routes, e100);
        let names = |r| {
            modulation_options(&ctx, r)
                .unwrap()
                .into_iter()
                .map(|i| (e100.options()[i].modulation.as_str(), e100.options()[i].slot_count))
                .collect::<Vec<_>>()
        };
        assert_eq!(names(0), vec![("8-QAM", 3), ("QPSK", 4), ("BPSK", 8)]);
        assert_eq!(names(1).len(), 6);
        assert_eq!(names(1)[0].0, "64-QAM");
        assert!(names(2).is_empty());
    }

    #[test]
    fn ff_and_flf_agree_below_threshold() {
        let (mut net, routes) = line();
        net.occupy_slots(0, 3, 9).unwrap();
        net.occupy_slots(1, 20, 40).unwrap();
        for e in BitRateCatalog::reference()
            .entries()
            .iter()
            .filter(|e| e.bitrate_gbps() < 100.0)
        {
            let mut a = AllocationContext::new(&net, 0, 2, &routes, e);
            let mut b = AllocationContext::new(&net, 0, 2, &routes, e);
            assert_eq!(first_fit(&mut a), first_last_fit(&mut b, 100.0));
            assert_eq!(a.staged(), b.staged());
        }
    }

    #[test]
    fn placements_pass_the_audit() {
        let (mut net, routes) = line();
        net.occupy_slots(0, 0, 7).unwrap();
        net.occupy_slots(1, 100, 180).unwrap();
        for alg in Algorithm::ALL {
            for e in BitRateCatalog::reference().entries() {
                let mut ctx = AllocationContext::new(&net, 0, 2, &routes, e);
                assert_eq!(alg.allocate(&mut ctx), Verdict::Allocated);
                let staged: Vec<SlotRange> = ctx.staged().to_vec();
                crate::allocation::audit(&staged).unwrap();
                let s: Staging = ctx.into_staging();
                s.commit(&mut net.clone(), true).unwrap();
            }
        }
    }

    #[test]
    fn names_round_trip() {
        for alg in Algorithm::ALL {
            assert_eq!(alg.name().parse::<Algorithm>().unwrap(), alg);
        }
        assert!("XF".parse::<Algorithm>().is_err());
    }
}
