//! Exhaustive solver for tiny instances.
//!
//! Lane sets are deepened in lexicographic objective order: the first set of
//! `a` bypass and `b` switching lanes that admits a full assignment is
//! optimal. For a fixed set, requests are assigned depth-first (largest
//! first), each as up to `max_splits` channels on distinct (path, lane)
//! pairs. Switching-lane feasibility tries every block order with first-fit
//! placement, which finds a layout whenever one exists.

use std::collections::{BTreeMap, HashSet};
use std::sync::atomic::{AtomicBool, Ordering};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use thiserror::Error;

use crate::alloc::AllocationState;
use crate::ilp::congestion_lower_bound;
use crate::instance::{Instance, NodePair, PathId, RequestId};
use crate::solution::Solution;
use crate::topology::Lane;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("instance exceeds oracle limits: {0}")]
    LimitExceeded(String),
    #[error("no assignment serves every request")]
    Infeasible,
    #[error("search exceeded its time budget")]
    Timeout,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleLimits {
    pub max_nodes: usize,
    pub max_lanes: Lane,
    pub max_requests: usize,
    /// Channels per request.
    pub max_splits: usize,
    pub time_budget: Duration,
}

impl Default for OracleLimits {
    fn default() -> Self {
        Self {
            max_nodes: 6,
            max_lanes: 4,
            max_requests: 4,
            max_splits: 2,
            time_budget: Duration::from_secs(30),
        }
    }
}

impl OracleLimits {
    /// Limits under which the oracle matches the integer model exactly: a
    /// request may use every (path, lane) pair.
    pub fn exact_for(inst: &Instance) -> Self {
        Self {
            max_splits: inst.k * inst.profile.lanes() as usize,
            ..Self::default()
        }
    }

    fn check(&self, inst: &Instance) -> Result<(), OracleError> {
        if inst.network.node_count() > self.max_nodes {
            return Err(OracleError::LimitExceeded(format!(
                "{} nodes",
                inst.network.node_count()
            )));
        }
        if inst.profile.lanes() > self.max_lanes {
            return Err(OracleError::LimitExceeded(format!("{} lanes", inst.profile.lanes())));
        }
        if inst.requests.len() > self.max_requests {
            return Err(OracleError::LimitExceeded(format!("{} requests", inst.requests.len())));
        }
        if self.max_splits == 0 {
            return Err(OracleError::LimitExceeded("zero splits".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Chan {
    request: RequestId,
    path: PathId,
    lane: Lane,
    ocs: u32,
}

#[derive(Debug, Clone, Copy)]
struct Block {
    path: PathId,
    fs: u32,
}

/// Incremental resource checker for one lane set.
#[derive(Debug, Clone)]
struct Checker<'a> {
    inst: &'a Instance,
    relaxed: bool,
    lanes: usize,
    /// Bypass lanes: owning path and channel count per (link, lane).
    owner: Vec<(PathId, u32)>,
    /// Spectrum used per (link, lane).
    load: Vec<u32>,
    /// Spectrum used per (path, lane) on bypass lanes.
    sch_fs: Vec<u32>,
    /// Switching lanes: blocks per lane.
    blocks: Vec<Vec<Block>>,
}

impl<'a> Checker<'a> {
    fn new(inst: &'a Instance, relaxed: bool) -> Self {
        let lanes = inst.profile.lanes() as usize;
        let links = inst.network.link_count();
        Self {
            inst,
            relaxed,
            lanes,
            owner: vec![(usize::MAX, 0); links * lanes],
            load: vec![0; links * lanes],
            sch_fs: vec![0; inst.paths().len() * lanes],
            blocks: vec![Vec::new(); lanes + 1],
        }
    }

    fn slot(&self, link: usize, lane: Lane) -> usize {
        link * self.lanes + lane as usize - 1
    }

    fn try_add(&mut self, c: Chan) -> bool {
        let inst = self.inst;
        let grid = inst.physics.grid;
        let fs = grid.fs_required(c.ocs);
        let links = inst.path(c.path).links();
        if links
            .iter()
            .any(|&e| self.load[self.slot(e, c.lane)] + fs > grid.fs_per_lane)
        {
            return false;
        }
        if self.relaxed {
            for &e in links {
                let s = self.slot(e, c.lane);
                self.load[s] += fs;
            }
            return true;
        }
        if inst.profile.is_switching(c.lane) {
            self.blocks[c.lane as usize].push(Block { path: c.path, fs });
            if first_fit_layout(inst, &self.blocks[c.lane as usize]).is_none() {
                self.blocks[c.lane as usize].pop();
                return false;
            }
        } else {
            let sch = c.path * self.lanes + c.lane as usize - 1;
            if self.sch_fs[sch] + fs > grid.fs_per_lane {
                return false;
            }
            if links.iter().any(|&e| {
                let (p, n) = self.owner[self.slot(e, c.lane)];
                n > 0 && p != c.path
            }) {
                return false;
            }
            self.sch_fs[sch] += fs;
            for &e in links {
                let s = self.slot(e, c.lane);
                self.owner[s] = (c.path, self.owner[s].1 + 1);
            }
        }
        for &e in links {
            let s = self.slot(e, c.lane);
            self.load[s] += fs;
        }
        true
    }

    fn remove(&mut self, c: Chan) {
        let inst = self.inst;
        let fs = inst.physics.grid.fs_required(c.ocs);
        let links = inst.path(c.path).links();
        for &e in links {
            let s = self.slot(e, c.lane);
            self.load[s] -= fs;
        }
        if self.relaxed {
            return;
        }
        if inst.profile.is_switching(c.lane) {
            self.blocks[c.lane as usize].pop();
        } else {
            self.sch_fs[c.path * self.lanes + c.lane as usize - 1] -= fs;
            for &e in links {
                let s = self.slot(e, c.lane);
                self.owner[s].1 -= 1;
            }
        }
    }
}

/// Per link: end of the last placed block and its path.
type Frontier = Vec<(u32, PathId)>;

/// Start index per block (input order) of a feasible layout, if any.
///
/// Blocks are placed left to right with nondecreasing starts, each at the
/// lowest position past the last block on each of its links. Any feasible
/// layout sorted by start dominates one of these sequences, so the search is
/// complete; failed (placed set, frontier) states are memoized.
fn first_fit_layout(inst: &Instance, blocks: &[Block]) -> Option<Vec<u32>> {
    struct Ctx<'b> {
        blocks: &'b [Block],
        links: Vec<Vec<usize>>,
        fs_max: u32,
        guard: u32,
        failed: HashSet<(u64, u32, Frontier)>,
    }
    fn go(cx: &mut Ctx<'_>, mask: u64, x: u32, frontier: &mut Frontier, starts: &mut [u32]) -> bool {
        let n = cx.blocks.len();
        if mask.count_ones() as usize == n {
            return true;
        }
        let key = (mask, x, frontier.clone());
        if cx.failed.contains(&key) {
            return false;
        }
        for i in 0..n {
            if mask >> i & 1 == 1 {
                continue;
            }
            let b = cx.blocks[i];
            let twin = (0..i).any(|j| mask >> j & 1 == 0 && cx.blocks[j].path == b.path && cx.blocks[j].fs == b.fs);
            if twin {
                continue;
            }
            let mut start = x;
            for &e in &cx.links[i] {
                let (end, p) = frontier[e];
                if end > 0 {
                    start = start.max(end + if p == b.path { 0 } else { cx.guard });
                }
            }
            if start + b.fs > cx.fs_max {
                continue;
            }
            let saved: Vec<(u32, PathId)> = cx.links[i].iter().map(|&e| frontier[e]).collect();
            for &e in &cx.links[i] {
                frontier[e] = (start + b.fs, b.path);
            }
            starts[i] = start;
            let ok = go(cx, mask | 1 << i, start, frontier, starts);
            for (k, &e) in cx.links[i].clone().iter().enumerate() {
                frontier[e] = saved[k];
            }
            if ok {
                return true;
            }
        }
        cx.failed.insert(key);
        false
    }
    if blocks.len() > 64 {
        return None;
    }
    let mut local: Vec<usize> = Vec::new();
    let links: Vec<Vec<usize>> = blocks
        .iter()
        .map(|b| {
            inst.path(b.path)
                .links()
                .iter()
                .map(|&e| match local.iter().position(|&x| x == e) {
                    Some(i) => i,
                    None => {
                        local.push(e);
                        local.len() - 1
                    }
                })
                .collect()
        })
        .collect();
    let grid = inst.physics.grid;
    let mut cx = Ctx {
        blocks,
        links,
        fs_max: grid.fs_per_lane,
        guard: grid.guard_fs,
        failed: HashSet::new(),
    };
    let mut frontier = vec![(0, usize::MAX); local.len()];
    let mut starts = vec![0; blocks.len()];
    go(&mut cx, 0, 0, &mut frontier, &mut starts).then_some(starts)
}

struct Search<'a> {
    inst: &'a Instance,
    order: Vec<RequestId>,
    /// Allowed lanes grouped by interchangeable class.
    classes: Vec<Vec<Lane>>,
    uses: Vec<u32>,
    max_splits: usize,
    checker: Checker<'a>,
    chosen: Vec<Chan>,
    deadline: Instant,
    steps: u64,
    timed_out: bool,
    /// When set, stop after the first request and record each option.
    collect: Option<Vec<Vec<Chan>>>,
    found: Vec<Chan>,
}

impl<'a> Search<'a> {
    fn candidate_lanes(&self) -> Vec<Lane> {
        let mut out = Vec::new();
        for class in &self.classes {
            for &l in class {
                out.push(l);
                if self.uses[l as usize] == 0 {
                    break;
                }
            }
        }
        out
    }

    fn push(&mut self, c: Chan) -> bool {
        if !self.checker.try_add(c) {
            return false;
        }
        self.uses[c.lane as usize] += 1;
        self.chosen.push(c);
        true
    }

    fn pop(&mut self) {
        let c = self.chosen.pop().expect("non-empty");
        self.uses[c.lane as usize] -= 1;
        self.checker.remove(c);
    }

    fn tick(&mut self) -> bool {
        self.steps += 1;
        if self.steps.is_multiple_of(16) && Instant::now() > self.deadline {
            self.timed_out = true;
        }
        self.timed_out
    }

    /// Necessary conditions for the requests from `ri` on: their spectrum
    /// volume fits in the free spectrum overall and around each endpoint.
    fn bounds_hold(&self, ri: usize) -> bool {
        let inst = self.inst;
        let grid = inst.physics.grid;
        let c = &self.checker;
        let nodes = inst.network.node_count();
        let mut out_need = vec![0u64; nodes];
        let mut in_need = vec![0u64; nodes];
        let mut volume = 0u64;
        for &r in &self.order[ri..] {
            let req = &inst.requests[r];
            let fs_gbps = u64::from(grid.fs_per_oc) * req.gbps;
            let cands = inst.candidates(r);
            volume += cands
                .iter()
                .map(|&p| fs_gbps * inst.path(p).links().len() as u64 / inst.path(p).gbps_per_oc)
                .min()
                .unwrap_or(0);
            let best = cands.iter().map(|&p| inst.path(p).gbps_per_oc).max().unwrap_or(1);
            out_need[req.src] += fs_gbps / best;
            in_need[req.dst] += fs_gbps / best;
        }
        let lanes: Vec<Lane> = self.classes.iter().flatten().copied().collect();
        let mut free_total = 0u64;
        let mut out_free = vec![0u64; nodes];
        let mut in_free = vec![0u64; nodes];
        for (e, link) in inst.network.links().iter().enumerate() {
            for &l in &lanes {
                let slot = c.slot(e, l);
                let free = u64::from(grid.fs_per_lane - c.load[slot]);
                free_total += free;
                let owner = (!c.relaxed && !inst.profile.is_switching(l) && c.owner[slot].1 > 0)
                    .then(|| inst.path(c.owner[slot].0).pair);
                if owner.is_none_or(|q| q.src == link.src) {
                    out_free[link.src] += free;
                }
                if owner.is_none_or(|q| q.dst == link.dst) {
                    in_free[link.dst] += free;
                }
            }
        }
        if volume > free_total || (0..nodes).any(|v| out_need[v] > out_free[v] || in_need[v] > in_free[v]) {
            return false;
        }
        c.relaxed || self.slots_hold(ri)
    }

    /// Every bypass channel holds a whole (link, lane) slot at both
    /// endpoints, so each pair's demand beyond its open channels and the
    /// switching spectrum around an endpoint needs that many fresh slots.
    fn slots_hold(&self, ri: usize) -> bool {
        let inst = self.inst;
        let grid = inst.physics.grid;
        let c = &self.checker;
        let fmax = u64::from(grid.fs_per_lane);
        let nodes = inst.network.node_count();
        let mut need: BTreeMap<NodePair, u64> = BTreeMap::new();
        for &r in &self.order[ri..] {
            let req = &inst.requests[r];
            let best = inst
                .candidates(r)
                .iter()
                .map(|&p| inst.path(p).gbps_per_oc)
                .max()
                .unwrap_or(1);
            *need.entry(req.pair()).or_default() += u64::from(grid.fs_per_oc) * req.gbps / best;
        }
        let lanes: Vec<Lane> = self.classes.iter().flatten().copied().collect();
        let mut resid: BTreeMap<NodePair, u64> = BTreeMap::new();
        for (p, rp) in inst.paths().iter().enumerate() {
            for &l in &lanes {
                if inst.profile.is_switching(l) {
                    continue;
                }
                let used = u64::from(c.sch_fs[p * c.lanes + l as usize - 1]);
                if used > 0 {
                    *resid.entry(rp.pair).or_default() += fmax - used;
                }
            }
        }
        let mut out_slots = vec![0u64; nodes];
        let mut in_slots = vec![0u64; nodes];
        let mut out_w = vec![0u64; nodes];
        let mut in_w = vec![0u64; nodes];
        for (e, link) in inst.network.links().iter().enumerate() {
            for &l in &lanes {
                let slot = c.slot(e, l);
                if inst.profile.is_switching(l) {
                    let free = fmax - u64::from(c.load[slot]);
                    out_w[link.src] += free;
                    in_w[link.dst] += free;
                } else if c.owner[slot].1 == 0 {
                    out_slots[link.src] += 1;
                    in_slots[link.dst] += 1;
                }
            }
        }
        let mut out_req = vec![0u64; nodes];
        let mut in_req = vec![0u64; nodes];
        for (pair, &fs) in &need {
            let left = fs.saturating_sub(resid.get(pair).copied().unwrap_or(0));
            out_req[pair.src] += left.saturating_sub(out_w[pair.src]).div_ceil(fmax);
            in_req[pair.dst] += left.saturating_sub(in_w[pair.dst]).div_ceil(fmax);
        }
        (0..nodes).all(|v| out_req[v] <= out_slots[v] && in_req[v] <= in_slots[v])
    }

    fn dfs(&mut self, ri: usize) -> bool {
        if ri == self.order.len() {
            self.found = self.chosen.clone();
            return true;
        }
        if self.tick() || !self.bounds_hold(ri) {
            return false;
        }
        let r = self.order[ri];
        let t = self.inst.requests[r].gbps;
        self.extend(ri, r, t, 0, None, self.chosen.len())
    }

    fn request_done(&mut self, ri: usize, first: usize) -> bool {
        if let Some(c) = self.collect.as_mut() {
            c.push(self.chosen[first..].to_vec());
            return false;
        }
        self.dfs(ri + 1)
    }

    /// Adds channels for request `r` until `t` Gbps are covered. Non-final
    /// channels come in increasing (path, lane) order.
    fn extend(
        &mut self,
        ri: usize,
        r: RequestId,
        t: u64,
        depth: usize,
        min: Option<(PathId, Lane)>,
        first: usize,
    ) -> bool {
        let inst = self.inst;
        let per_lane = inst.physics.grid.ocs_per_lane();
        let lanes = self.candidate_lanes();
        let taken = |s: &Self, p: PathId, l: Lane| s.chosen[first..].iter().any(|c| c.path == p && c.lane == l);

        for &p in inst.candidates(r) {
            let need = inst.ocs_for(p, t);
            if need > per_lane {
                continue;
            }
            for &l in &lanes {
                if taken(self, p, l) {
                    continue;
                }
                if self.push(Chan {
                    request: r,
                    path: p,
                    lane: l,
                    ocs: need,
                }) {
                    let ok = self.request_done(ri, first);
                    self.pop();
                    if ok {
                        return true;
                    }
                }
                if self.timed_out {
                    return false;
                }
            }
        }
        if depth + 1 >= self.max_splits {
            return false;
        }
        for &p in inst.candidates(r) {
            let g = inst.path(p).gbps_per_oc;
            let need = inst.ocs_for(p, t);
            for &l in &lanes {
                if min.is_some_and(|m| (p, l) <= m) || taken(self, p, l) {
                    continue;
                }
                for o in (1..need.min(per_lane + 1)).rev() {
                    if self.push(Chan {
                        request: r,
                        path: p,
                        lane: l,
                        ocs: o,
                    }) {
                        let ok = self.extend(ri, r, t - u64::from(o) * g, depth + 1, Some((p, l)), first);
                        self.pop();
                        if ok {
                            return true;
                        }
                    }
                    if self.tick() {
                        return false;
                    }
                }
            }
        }
        false
    }
}

enum Level {
    Found(Vec<Chan>),
    Infeasible,
    Timeout,
}

fn search_level(
    inst: &Instance,
    classes: Vec<Vec<Lane>>,
    relaxed: bool,
    max_splits: usize,
    deadline: Instant,
) -> Level {
    let order: Vec<RequestId> = inst.descending_volume_order();
    if order.is_empty() {
        return Level::Found(Vec::new());
    }
    let new_search = |collect| Search {
        inst,
        order: order.clone(),
        classes: classes.clone(),
        uses: vec![0; inst.profile.lanes() as usize + 1],
        max_splits,
        checker: Checker::new(inst, relaxed),
        chosen: Vec::new(),
        deadline,
        steps: 0,
        timed_out: false,
        collect,
        found: Vec::new(),
    };
    let mut root = new_search(Some(Vec::new()));
    root.dfs(0);
    if root.timed_out {
        return Level::Timeout;
    }
    let options = root.collect.take().unwrap_or_default();
    let timed_out = AtomicBool::new(false);
    let found = options.par_iter().find_map_first(|opt| {
        if Instant::now() > deadline {
            timed_out.store(true, Ordering::Relaxed);
            return None;
        }
        let mut s = new_search(None);
        for &c in opt {
            if !s.push(c) {
                return None;
            }
        }
        if s.dfs(1) {
            return Some(s.found);
        }
        if s.timed_out {
            timed_out.store(true, Ordering::Relaxed);
        }
        None
    });
    match found {
        Some(c) => Level::Found(c),
        None if timed_out.into_inner() => Level::Timeout,
        None => Level::Infeasible,
    }
}

fn build_solution(inst: &Instance, chans: &[Chan]) -> Solution {
    let mut state = AllocationState::new(inst);
    let mut sorted = chans.to_vec();
    sorted.sort_by_key(|c| (c.lane, c.path, c.request));
    for lane in inst.profile.all() {
        let on: Vec<Chan> = sorted.iter().copied().filter(|c| c.lane == lane).collect();
        if inst.profile.is_switching(lane) {
            let blocks: Vec<Block> = on
                .iter()
                .map(|c| Block {
                    path: c.path,
                    fs: inst.physics.grid.fs_required(c.ocs),
                })
                .collect();
            let starts = first_fit_layout(inst, &blocks).expect("search verified the layout");
            let mut idx: Vec<usize> = (0..on.len()).collect();
            idx.sort_by_key(|&i| starts[i]);
            for i in idx {
                let c = on[i];
                state
                    .reserve_wxc_block(c.request, c.path, lane, starts[i], c.ocs)
                    .expect("layout is feasible");
            }
        } else {
            let mut open: Vec<(PathId, usize)> = Vec::new();
            for c in on {
                match open.iter().find(|(p, _)| *p == c.path) {
                    Some(&(_, sch)) => {
                        state.append_to_sch(sch, c.request, c.ocs).expect("capacity verified");
                    }
                    None => {
                        let sch = state
                            .reserve_bypass_sch(c.request, c.path, lane, c.ocs)
                            .expect("ownership verified");
                        open.push((c.path, sch));
                    }
                }
            }
        }
    }
    Solution::from_state(&state, &[], None)
}

/// Lexicographically optimal (lanes used, switching lanes used) solution.
pub fn exact_solve(inst: &Instance, limits: &OracleLimits) -> Result<Solution, OracleError> {
    limits.check(inst)?;
    let deadline = Instant::now() + limits.time_budget;
    let lnw: Vec<Lane> = inst.profile.lnw().collect();
    let lw: Vec<Lane> = inst.profile.lw().collect();
    let mut levels: Vec<(usize, usize)> = Vec::new();
    for a in 0..=lnw.len() {
        for b in 0..=lw.len() {
            levels.push((a, b));
        }
    }
    let floor = congestion_lower_bound(inst) as usize;
    levels.retain(|&(a, b)| a + b >= floor);
    levels.sort_by_key(|&(a, b)| (a + b, b));
    for (a, b) in levels {
        let classes = vec![lnw[..a].to_vec(), lw[..b].to_vec()];
        match search_level(inst, classes, false, limits.max_splits, deadline) {
            Level::Found(chans) => return Ok(build_solution(inst, &chans)),
            Level::Timeout => return Err(OracleError::Timeout),
            Level::Infeasible => {}
        }
    }
    Err(OracleError::Infeasible)
}

/// Optimum of the relaxed lower-bound model: lanes are interchangeable,
/// spectrum is a per-(link, lane) capacity and any request may use every
/// (path, lane) pair.
pub fn relaxed_optimum(inst: &Instance, limits: &OracleLimits) -> Result<u32, OracleError> {
    limits.check(inst)?;
    let deadline = Instant::now() + limits.time_budget;
    let all: Vec<Lane> = inst.profile.all().collect();
    let splits = inst.k * all.len();
    for n in congestion_lower_bound(inst) as usize..=all.len() {
        match search_level(inst, vec![all[..n].to_vec()], true, splits, deadline) {
            Level::Found(_) => return Ok(n as u32),
            Level::Timeout => return Err(OracleError::Timeout),
            Level::Infeasible => {}
        }
    }
    Err(OracleError::Infeasible)
}
