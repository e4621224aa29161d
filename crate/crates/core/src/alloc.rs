//! Mutable resource ledger of a plan under construction.
//!
//! Bypass lanes (L_NW) are owned whole by one spatial channel (SCh) on each
//! link they cross. Switching lanes (L_W) keep a per-link ledger of occupied
//! FS intervals; a block of a different path needs `guard_fs` of clearance.
//! Every mutation is appended to a journal that [`AllocationState::replay`]
//! can apply again from empty.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instance::{Instance, NodePair, PathId, RequestId};
use crate::topology::{Lane, LinkId};

pub type SchId = usize;
pub type ChannelId = usize;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AllocError {
    #[error("lane {lane} is out of range")]
    LaneOutOfRange { lane: Lane },
    #[error("lane {lane} already occupied on link {link}")]
    LaneConflict { link: LinkId, lane: Lane },
    #[error("zero-size allocation")]
    ZeroSize,
    #[error("requested {requested} FS but only {available} available")]
    CapacityExceeded { requested: u32, available: u32 },
    #[error("node pair of the request does not match the spatial channel")]
    PairMismatch,
    #[error("path does not belong to the request's node pair")]
    PathMismatch,
    #[error("lane {0} does not support wavelength switching")]
    NotSwitchingLane(Lane),
    #[error("FS block overlaps channel {channel} on link {link}")]
    Overlap { link: LinkId, channel: ChannelId },
    #[error("FS block lacks guard band to channel {channel} on link {link}")]
    GuardBand { link: LinkId, channel: ChannelId },
    #[error("FS block ends at {end}, beyond the grid maximum {max}")]
    OutOfGrid { end: u32, max: u32 },
    #[error("unknown spatial channel {0}")]
    UnknownSch(SchId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SchKind {
    /// One superchannel.
    #[serde(rename = "I")]
    TypeI,
    /// Several same-pair superchannels without guard bands.
    #[serde(rename = "II")]
    TypeII,
    /// A block sharing a switching lane with other node pairs.
    #[serde(rename = "III")]
    TypeIII,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchRecord {
    pub id: SchId,
    pub kind: SchKind,
    pub pair: NodePair,
    pub path: PathId,
    pub lane: Lane,
    pub fs_start: u32,
    pub used_fs: u32,
    pub members: Vec<ChannelId>,
}

/// One lightpath: `ocs` carriers on `path`/`lane` over `[fs_start, fs_end]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Channel {
    pub id: ChannelId,
    pub request: RequestId,
    pub path: PathId,
    pub lane: Lane,
    pub ocs: u32,
    pub fs_start: u32,
    pub fs_end: u32,
    pub sch: SchId,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Block {
    start: u32,
    end: u32,
    path: PathId,
    channel: ChannelId,
}

/// Entry of the partially-used SCh table: `<np: p, l, B>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Table2Entry {
    pub pair: NodePair,
    pub sch: SchId,
    pub remaining_fs: u32,
}

/// Entry of the unsatisfied-traffic table: `<r: t_rem>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Table3Entry {
    pub request: RequestId,
    pub remaining_gbps: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JournalOp {
    ReserveBypass {
        request: RequestId,
        path: PathId,
        lane: Lane,
        ocs: u32,
    },
    Append {
        sch: SchId,
        request: RequestId,
        ocs: u32,
    },
    ReserveBlock {
        request: RequestId,
        path: PathId,
        lane: Lane,
        start: u32,
        ocs: u32,
    },
    Table2Push {
        sch: SchId,
    },
    Table2Set {
        index: usize,
        remaining_fs: u32,
    },
    Table2Remove {
        index: usize,
    },
    Table3Set {
        request: RequestId,
        remaining_gbps: u64,
    },
    Table3Remove {
        request: RequestId,
    },
    Table3SortDescending,
}

/// Objective values: lanes used anywhere, and switching lanes used anywhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
pub struct Objectives {
    pub obj1: u32,
    pub obj2: u32,
}

#[derive(Debug, Clone)]
pub struct AllocationState<'a> {
    inst: &'a Instance,
    lanes: usize,
    /// Bit `l-1` set when lane `l` has any occupant on the link.
    occupied: Vec<u128>,
    owner: Vec<Option<SchId>>,
    ledger: Vec<Vec<Block>>,
    schs: Vec<SchRecord>,
    channels: Vec<Channel>,
    by_request: Vec<Vec<ChannelId>>,
    table2: Vec<Table2Entry>,
    table3: Vec<Table3Entry>,
    journal: Vec<JournalOp>,
}

impl PartialEq for AllocationState<'_> {
    fn eq(&self, other: &Self) -> bool {
        std::ptr::eq(self.inst, other.inst)
            && self.occupied == other.occupied
            && self.owner == other.owner
            && self.ledger == other.ledger
            && self.schs == other.schs
            && self.channels == other.channels
            && self.by_request == other.by_request
            && self.table2 == other.table2
            && self.table3 == other.table3
            && self.journal == other.journal
    }
}

impl<'a> AllocationState<'a> {
    pub fn new(inst: &'a Instance) -> Self {
        let lanes = inst.profile.lanes() as usize;
        let links = inst.network.link_count();
        Self {
            inst,
            lanes,
            occupied: vec![0; links],
            owner: vec![None; links * lanes],
            ledger: vec![Vec::new(); links * lanes],
            schs: Vec::new(),
            channels: Vec::new(),
            by_request: vec![Vec::new(); inst.requests.len()],
            table2: Vec::new(),
            table3: Vec::new(),
            journal: Vec::new(),
        }
    }

    /// Rebuilds a state by applying `journal` from empty.
    pub fn replay(inst: &'a Instance, journal: &[JournalOp]) -> Result<Self, AllocError> {
        let mut s = Self::new(inst);
        for op in journal {
            match *op {
                JournalOp::ReserveBypass {
                    request,
                    path,
                    lane,
                    ocs,
                } => {
                    s.reserve_bypass_sch(request, path, lane, ocs)?;
                }
                JournalOp::Append { sch, request, ocs } => {
                    s.append_to_sch(sch, request, ocs)?;
                }
                JournalOp::ReserveBlock {
                    request,
                    path,
                    lane,
                    start,
                    ocs,
                } => {
                    s.reserve_wxc_block(request, path, lane, start, ocs)?;
                }
                JournalOp::Table2Push { sch } => s.table2_push(sch)?,
                JournalOp::Table2Set { index, remaining_fs } => s.table2_set(index, remaining_fs),
                JournalOp::Table2Remove { index } => {
                    s.table2_remove(index);
                }
                JournalOp::Table3Set {
                    request,
                    remaining_gbps,
                } => s.table3_set(request, remaining_gbps),
                JournalOp::Table3Remove { request } => s.table3_remove(request),
                JournalOp::Table3SortDescending => s.table3_sort_descending(),
            }
        }
        Ok(s)
    }

    pub fn instance(&self) -> &'a Instance {
        self.inst
    }

    pub fn journal(&self) -> &[JournalOp] {
        &self.journal
    }

    pub fn schs(&self) -> &[SchRecord] {
        &self.schs
    }

    pub fn sch(&self, id: SchId) -> Option<&SchRecord> {
        self.schs.get(id)
    }

    pub fn channels(&self) -> &[Channel] {
        &self.channels
    }

    pub fn request_channels(&self, request: RequestId) -> impl Iterator<Item = &Channel> {
        self.by_request[request].iter().map(|&c| &self.channels[c])
    }

    pub fn table2(&self) -> &[Table2Entry] {
        &self.table2
    }

    pub fn table3(&self) -> &[Table3Entry] {
        &self.table3
    }

    fn slot(&self, link: LinkId, lane: Lane) -> usize {
        link * self.lanes + (lane as usize - 1)
    }

    fn check_lane(&self, lane: Lane) -> Result<(), AllocError> {
        if lane == 0 || lane as usize > self.lanes {
            Err(AllocError::LaneOutOfRange { lane })
        } else {
            Ok(())
        }
    }

    fn fs_per_lane(&self) -> u32 {
        self.inst.physics.grid.fs_per_lane
    }

    /// True when `lane` holds nothing on any link of `path`.
    pub fn lane_free_on(&self, path: PathId, lane: Lane) -> bool {
        let bit = 1u128 << (lane - 1);
        self.inst
            .path(path)
            .links()
            .iter()
            .all(|&l| self.occupied[l] & bit == 0)
    }

    /// Lowest lane index free on every link of `path`.
    pub fn lowest_free_lane(&self, path: PathId) -> Option<Lane> {
        let used = self
            .inst
            .path(path)
            .links()
            .iter()
            .fold(0u128, |acc, &l| acc | self.occupied[l]);
        let first = (!used).trailing_zeros() as usize;
        (first < self.lanes).then(|| first as Lane + 1)
    }

    /// Opens a Type I SCh for `request` on `lane` along `path`, carrying `ocs`
    /// carriers from FS 0. The lane must be empty on every link of the path.
    pub fn reserve_bypass_sch(
        &mut self,
        request: RequestId,
        path: PathId,
        lane: Lane,
        ocs: u32,
    ) -> Result<SchId, AllocError> {
        self.check_lane(lane)?;
        let rp = self.inst.path(path);
        if rp.pair != self.inst.requests[request].pair() {
            return Err(AllocError::PathMismatch);
        }
        let fs = self.inst.physics.grid.fs_required(ocs);
        if fs == 0 {
            return Err(AllocError::ZeroSize);
        }
        if fs > self.fs_per_lane() {
            return Err(AllocError::CapacityExceeded {
                requested: fs,
                available: self.fs_per_lane(),
            });
        }
        let bit = 1u128 << (lane - 1);
        if let Some(&link) = rp.links().iter().find(|&&l| self.occupied[l] & bit != 0) {
            return Err(AllocError::LaneConflict { link, lane });
        }

        let sch = self.schs.len();
        let channel = self.push_channel(request, path, lane, ocs, 0, sch);
        let switching = self.inst.profile.is_switching(lane);
        for &l in rp.links() {
            self.occupied[l] |= bit;
            let slot = self.slot(l, lane);
            if switching {
                self.ledger[slot].push(Block {
                    start: 0,
                    end: fs - 1,
                    path,
                    channel,
                });
            } else {
                self.owner[slot] = Some(sch);
            }
        }
        self.schs.push(SchRecord {
            id: sch,
            kind: SchKind::TypeI,
            pair: rp.pair,
            path,
            lane,
            fs_start: 0,
            used_fs: fs,
            members: vec![channel],
        });
        self.journal.push(JournalOp::ReserveBypass {
            request,
            path,
            lane,
            ocs,
        });
        Ok(sch)
    }

    /// Adds a same-pair superchannel right after the used spectrum of `sch`,
    /// without guard band.
    pub fn append_to_sch(&mut self, sch: SchId, request: RequestId, ocs: u32) -> Result<ChannelId, AllocError> {
        let rec = self.schs.get(sch).ok_or(AllocError::UnknownSch(sch))?;
        if rec.kind == SchKind::TypeIII {
            return Err(AllocError::UnknownSch(sch));
        }
        if rec.pair != self.inst.requests[request].pair() {
            return Err(AllocError::PairMismatch);
        }
        let fs = self.inst.physics.grid.fs_required(ocs);
        if fs == 0 {
            return Err(AllocError::ZeroSize);
        }
        let available = self.fs_per_lane() - rec.fs_start - rec.used_fs;
        if fs > available {
            return Err(AllocError::CapacityExceeded {
                requested: fs,
                available,
            });
        }
        let (path, lane, start) = (rec.path, rec.lane, rec.fs_start + rec.used_fs);
        let switching = self.inst.profile.is_switching(lane);
        if switching {
            self.check_block(path, lane, start, fs)?;
        }
        let channel = self.push_channel(request, path, lane, ocs, start, sch);
        if switching {
            for &l in self.inst.path(path).links() {
                let slot = self.slot(l, lane);
                insert_sorted(
                    &mut self.ledger[slot],
                    Block {
                        start,
                        end: start + fs - 1,
                        path,
                        channel,
                    },
                );
            }
        }
        let rec = &mut self.schs[sch];
        rec.used_fs += fs;
        rec.members.push(channel);
        rec.kind = SchKind::TypeII;
        self.journal.push(JournalOp::Append { sch, request, ocs });
        Ok(channel)
    }

    /// Places a Type III block of `ocs` carriers at `start` on switching lane
    /// `lane` along `path`.
    pub fn reserve_wxc_block(
        &mut self,
        request: RequestId,
        path: PathId,
        lane: Lane,
        start: u32,
        ocs: u32,
    ) -> Result<ChannelId, AllocError> {
        self.check_lane(lane)?;
        if !self.inst.profile.is_switching(lane) {
            return Err(AllocError::NotSwitchingLane(lane));
        }
        let rp = self.inst.path(path);
        if rp.pair != self.inst.requests[request].pair() {
            return Err(AllocError::PathMismatch);
        }
        let fs = self.inst.physics.grid.fs_required(ocs);
        if fs == 0 {
            return Err(AllocError::ZeroSize);
        }
        self.check_block(path, lane, start, fs)?;

        let sch = self.schs.len();
        let channel = self.push_channel(request, path, lane, ocs, start, sch);
        let bit = 1u128 << (lane - 1);
        for &l in rp.links() {
            self.occupied[l] |= bit;
            let slot = self.slot(l, lane);
            insert_sorted(
                &mut self.ledger[slot],
                Block {
                    start,
                    end: start + fs - 1,
                    path,
                    channel,
                },
            );
        }
        self.schs.push(SchRecord {
            id: sch,
            kind: SchKind::TypeIII,
            pair: rp.pair,
            path,
            lane,
            fs_start: start,
            used_fs: fs,
            members: vec![channel],
        });
        self.journal.push(JournalOp::ReserveBlock {
            request,
            path,
            lane,
            start,
            ocs,
        });
        Ok(channel)
    }

    fn check_block(&self, path: PathId, lane: Lane, start: u32, fs: u32) -> Result<(), AllocError> {
        let max = self.inst.physics.grid.max_index();
        let end = start + fs - 1;
        if end > max {
            return Err(AllocError::OutOfGrid { end, max });
        }
        let guard = self.inst.physics.grid.guard_fs;
        for &link in self.inst.path(path).links() {
            for b in &self.ledger[self.slot(link, lane)] {
                if start <= b.end && b.start <= end {
                    return Err(AllocError::Overlap {
                        link,
                        channel: b.channel,
                    });
                }
                let gap = if b.path == path { 0 } else { guard };
                let clear = if end < b.start {
                    end + gap < b.start
                } else {
                    b.end + gap < start
                };
                if !clear {
                    return Err(AllocError::GuardBand {
                        link,
                        channel: b.channel,
                    });
                }
            }
        }
        Ok(())
    }

    /// Lowest start index at which `fs` slices fit on `lane` along `path`,
    /// honoring overlap and guard-band rules on every link.
    pub fn first_fit_block(&self, path: PathId, lane: Lane, fs: u32) -> Option<u32> {
        if fs == 0 || fs > self.fs_per_lane() || lane == 0 || lane as usize > self.lanes {
            return None;
        }
        if !self.inst.profile.is_switching(lane) {
            return None;
        }
        let guard = self.inst.physics.grid.guard_fs;
        let max = self.inst.physics.grid.max_index();
        let links = self.inst.path(path).links();
        let mut start = 0u32;
        'search: loop {
            let end = start + fs - 1;
            if end > max {
                return None;
            }
            for &link in links {
                for b in &self.ledger[self.slot(link, lane)] {
                    let gap = if b.path == path { 0 } else { guard };
                    if end + gap >= b.start && start <= b.end + gap {
                        start = b.end + gap + 1;
                        continue 'search;
                    }
                }
            }
            return Some(start);
        }
    }

    fn push_channel(
        &mut self,
        request: RequestId,
        path: PathId,
        lane: Lane,
        ocs: u32,
        start: u32,
        sch: SchId,
    ) -> ChannelId {
        let id = self.channels.len();
        let fs = self.inst.physics.grid.fs_required(ocs);
        self.channels.push(Channel {
            id,
            request,
            path,
            lane,
            ocs,
            fs_start: start,
            fs_end: start + fs - 1,
            sch,
        });
        self.by_request[request].push(id);
        id
    }

    pub fn table2_push(&mut self, sch: SchId) -> Result<(), AllocError> {
        let rec = self.schs.get(sch).ok_or(AllocError::UnknownSch(sch))?;
        let remaining_fs = self.fs_per_lane() - rec.fs_start - rec.used_fs;
        self.table2.push(Table2Entry {
            pair: rec.pair,
            sch,
            remaining_fs,
        });
        self.journal.push(JournalOp::Table2Push { sch });
        Ok(())
    }

    /// First table entry for `pair`, in insertion order.
    pub fn table2_find(&self, pair: NodePair) -> Option<(usize, Table2Entry)> {
        self.table2.iter().copied().enumerate().find(|(_, e)| e.pair == pair)
    }

    pub fn table2_set(&mut self, index: usize, remaining_fs: u32) {
        self.table2[index].remaining_fs = remaining_fs;
        self.journal.push(JournalOp::Table2Set { index, remaining_fs });
    }

    pub fn table2_remove(&mut self, index: usize) -> Table2Entry {
        self.journal.push(JournalOp::Table2Remove { index });
        self.table2.remove(index)
    }

    /// Inserts or overwrites the unsatisfied volume of `request`.
    pub fn table3_set(&mut self, request: RequestId, remaining_gbps: u64) {
        debug_assert!(remaining_gbps > 0);
        match self.table3.iter_mut().find(|e| e.request == request) {
            Some(e) => e.remaining_gbps = remaining_gbps,
            None => self.table3.push(Table3Entry {
                request,
                remaining_gbps,
            }),
        }
        self.journal.push(JournalOp::Table3Set {
            request,
            remaining_gbps,
        });
    }

    pub fn table3_remove(&mut self, request: RequestId) {
        self.table3.retain(|e| e.request != request);
        self.journal.push(JournalOp::Table3Remove { request });
    }

    /// Stable sort by unsatisfied volume, largest first.
    pub fn table3_sort_descending(&mut self) {
        self.table3.sort_by_key(|e| std::cmp::Reverse(e.remaining_gbps));
        self.journal.push(JournalOp::Table3SortDescending);
    }

    pub fn objectives(&self) -> Objectives {
        let used = self.occupied.iter().fold(0u128, |a, &m| a | m);
        let bypass = self.inst.profile.bypass_count() as u32;
        let switching_mask = if bypass >= 128 { 0 } else { !0u128 << bypass };
        Objectives {
            obj1: used.count_ones(),
            obj2: (used & switching_mask).count_ones(),
        }
    }

    /// Sum over links of occupied lanes.
    pub fn lane_link_usage(&self) -> u64 {
        self.occupied.iter().map(|m| u64::from(m.count_ones())).sum()
    }

    /// Highest used bypass-lane index (0 when none is used).
    pub fn highest_used_bypass_lane(&self) -> Lane {
        let used = self.occupied.iter().fold(0u128, |a, &m| a | m);
        let bypass = self.inst.profile.bypass_count();
        (1..=bypass)
            .rev()
            .find(|&l| used & (1u128 << (l - 1)) != 0)
            .unwrap_or(0)
    }

    /// Owner SCh of a bypass (link, lane), if any.
    pub fn bypass_owner(&self, link: LinkId, lane: Lane) -> Option<SchId> {
        self.owner[self.slot(link, lane)]
    }

    /// Traffic carried for `request` so far.
    pub fn carried_gbps(&self, request: RequestId) -> u64 {
        self.request_channels(request)
            .map(|c| u64::from(c.ocs) * self.inst.path(c.path).gbps_per_oc)
            .sum()
    }
}

fn insert_sorted(v: &mut Vec<Block>, b: Block) {
    let pos = v.partition_point(|x| x.start < b.start);
    v.insert(pos, b);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::Request;
    use crate::physical::Physics;
    use crate::topology::{LaneMode, LaneProfile, Network};

    /// a -> b -> c line plus a -> c, one switching lane on top.
    fn inst(mode: LaneMode) -> Instance {
        let net = Network::new(
            &["a", "b", "c"],
            &[("a", "b", 100.0), ("b", "c", 100.0), ("a", "c", 300.0)],
            3,
        )
        .unwrap();
        let profile = LaneProfile::new(3, mode, Some(&[3])).unwrap();
        let reqs = vec![
            Request {
                id: 0,
                src: 0,
                dst: 2,
                gbps: 2000,
            },
            Request {
                id: 1,
                src: 0,
                dst: 2,
                gbps: 2000,
            },
            Request {
                id: 2,
                src: 0,
                dst: 1,
                gbps: 2000,
            },
        ];
        Instance::new(net, profile, Physics::standard(), 2, reqs).unwrap()
    }

    fn path_via(inst: &Instance, request: RequestId, names: &[&str]) -> PathId {
        let nodes: Vec<usize> = names.iter().map(|n| inst.network.node_id(n).unwrap()).collect();
        inst.find_candidate(request, &nodes).unwrap()
    }

    #[test]
    fn bypass_reservation_and_conflict() {
        let inst = inst(LaneMode::Explicit);
        let mut s = AllocationState::new(&inst);
        let abc = path_via(&inst, 0, &["a", "b", "c"]);
        let ab = path_via(&inst, 2, &["a", "b"]);
        let sch = s.reserve_bypass_sch(0, abc, 1, 10).unwrap();
        assert_eq!(s.sch(sch).unwrap().used_fs, 30);
        assert!(matches!(
            s.reserve_bypass_sch(2, ab, 1, 1),
            Err(AllocError::LaneConflict { lane: 1, .. })
        ));
        assert_eq!(s.reserve_bypass_sch(2, ab, 2, 0), Err(AllocError::ZeroSize));
        assert_eq!(s.lowest_free_lane(ab), Some(2));
        assert_eq!(s.objectives(), Objectives { obj1: 1, obj2: 0 });
    }

    #[test]
    fn append_rules() {
        let inst = inst(LaneMode::Explicit);
        let mut s = AllocationState::new(&inst);
        let abc = path_via(&inst, 0, &["a", "b", "c"]);
        let sch = s.reserve_bypass_sch(0, abc, 1, 100).unwrap();
        let c = s.append_to_sch(sch, 1, 6).unwrap();
        assert_eq!((s.channels()[c].fs_start, s.channels()[c].fs_end), (300, 317));
        assert_eq!(s.sch(sch).unwrap().kind, SchKind::TypeII);
        assert_eq!(
            s.append_to_sch(sch, 1, 1),
            Err(AllocError::CapacityExceeded {
                requested: 3,
                available: 2
            })
        );
        assert_eq!(s.append_to_sch(sch, 2, 1), Err(AllocError::PairMismatch));
    }

    #[test]
    fn wxc_block_guard_rules() {
        let inst = inst(LaneMode::Explicit);
        let mut s = AllocationState::new(&inst);
        let abc0 = path_via(&inst, 0, &["a", "b", "c"]);
        let abc1 = path_via(&inst, 1, &["a", "b", "c"]);
        let ab = path_via(&inst, 2, &["a", "b"]);
        let c = s.reserve_wxc_block(0, abc0, 3, 0, 2).unwrap();
        assert_eq!(s.channels()[c].fs_end, 5);
        // different pair abutting at 6 needs a 1-FS guard
        assert!(matches!(
            s.reserve_wxc_block(2, ab, 3, 6, 2),
            Err(AllocError::GuardBand { .. })
        ));
        assert!(matches!(
            s.reserve_wxc_block(2, ab, 3, 5, 2),
            Err(AllocError::Overlap { .. })
        ));
        assert_eq!(s.first_fit_block(ab, 3, 6), Some(7));
        // same pair, same path may abut
        assert_eq!(s.first_fit_block(abc1, 3, 6), Some(6));
        s.reserve_wxc_block(1, abc1, 3, 6, 2).unwrap();
        assert!(matches!(
            s.reserve_wxc_block(2, ab, 3, 0, 1),
            Err(AllocError::Overlap { .. })
        ));
        assert_eq!(
            s.reserve_wxc_block(2, ab, 1, 0, 1),
            Err(AllocError::NotSwitchingLane(1))
        );
        assert_eq!(
            s.reserve_wxc_block(2, ab, 3, 318, 1),
            Err(AllocError::OutOfGrid { end: 320, max: 319 })
        );
        assert_eq!(s.first_fit_block(ab, 3, 321), None);
        assert_eq!(s.objectives(), Objectives { obj1: 1, obj2: 1 });
    }

    #[test]
    fn objectives_count_lane_indices_not_links() {
        let inst = inst(LaneMode::None);
        let mut s = AllocationState::new(&inst);
        assert_eq!(s.objectives(), Objectives::default());
        let ab = path_via(&inst, 2, &["a", "b"]);
        let abc = path_via(&inst, 0, &["a", "b", "c"]);
        let ac = path_via(&inst, 1, &["a", "c"]);
        s.reserve_bypass_sch(0, abc, 1, 1).unwrap();
        s.reserve_bypass_sch(2, ab, 2, 1).unwrap();
        s.reserve_bypass_sch(1, ac, 3, 1).unwrap();
        assert_eq!(s.objectives(), Objectives { obj1: 3, obj2: 0 });
        assert_eq!(s.lane_link_usage(), 4);
        assert_eq!(s.highest_used_bypass_lane(), 3);
    }

    #[test]
    fn replay_reproduces_state() {
        let inst = inst(LaneMode::Explicit);
        let mut s = AllocationState::new(&inst);
        let abc = path_via(&inst, 0, &["a", "b", "c"]);
        let ab = path_via(&inst, 2, &["a", "b"]);
        let sch = s.reserve_bypass_sch(0, abc, 1, 20).unwrap();
        s.table2_push(sch).unwrap();
        s.append_to_sch(sch, 1, 5).unwrap();
        s.table2_set(0, 10);
        s.table3_set(2, 700);
        s.reserve_wxc_block(2, ab, 3, 4, 3).unwrap();
        s.table3_remove(2);
        s.table2_remove(0);
        let r = AllocationState::replay(&inst, s.journal()).unwrap();
        assert_eq!(r, s);
    }
}
