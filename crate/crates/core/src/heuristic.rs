//! Three-phase first-fit heuristic.
//!
//! 1. [`algorithm1`] serves requests in sequence order with whole-lane
//!    spatial channels, filling partial lanes with later same-pair requests.
//! 2. [`algorithm2`] retries the leftovers on lanes no higher than the
//!    highest bypass lane already in use.
//! 3. [`algorithm3`] packs what remains onto switching lanes with first-fit
//!    spectrum allocation.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::alloc::{AllocationState, Table3Entry};
use crate::instance::{Instance, NodePair, PathId, RequestId};
use crate::physical::Physics;
use crate::solution::{PlanDiagnostics, Solution};
use crate::topology::{Lane, LaneMode, LaneProfile, TopologyError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HeuristicError {
    #[error("service sequence is not a permutation of the requests")]
    InvalidSequence,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhysicsProfile {
    #[default]
    Full,
    Simplified,
}

impl PhysicsProfile {
    pub fn physics(self) -> Physics {
        match self {
            PhysicsProfile::Full => Physics::standard(),
            PhysicsProfile::Simplified => Physics::simplified(),
        }
    }
}

/// Switches for the recovery steps of the pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FailurePolicy {
    /// Run the reassignment phase before switching-lane packing.
    pub reassign: bool,
    /// Rerun reassignment without the lane cap when packing leaves requests.
    pub retry_uncapped: bool,
}

impl Default for FailurePolicy {
    fn default() -> Self {
        Self {
            reassign: true,
            retry_uncapped: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeuristicConfig {
    pub k: usize,
    pub lane_mode: LaneMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lw: Option<Vec<Lane>>,
    pub physics: PhysicsProfile,
    #[serde(default)]
    pub policy: FailurePolicy,
}

impl Default for HeuristicConfig {
    fn default() -> Self {
        Self {
            k: 3,
            lane_mode: LaneMode::Ninth,
            lw: None,
            physics: PhysicsProfile::Full,
            policy: FailurePolicy::default(),
        }
    }
}

impl HeuristicConfig {
    pub fn lane_profile(&self, lanes: Lane) -> Result<LaneProfile, TopologyError> {
        LaneProfile::new(lanes, self.lane_mode, self.lw.as_deref())
    }
}

/// Result of the first phase.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhaseOutcome {
    pub table3: Vec<Table3Entry>,
    /// Highest bypass lane index used (0 when none).
    pub l_nw_a1_max: Lane,
}

/// Lowest lane free on every link of `path`.
pub fn ff_sla(state: &AllocationState<'_>, path: PathId) -> Option<Lane> {
    state.lowest_free_lane(path)
}

/// Candidate with the lowest first-fit lane; ties go to the shorter path,
/// then the lower rank.
pub fn best_ff_sla(state: &AllocationState<'_>, candidates: &[PathId]) -> Option<(PathId, Lane)> {
    let inst = state.instance();
    let mut best: Option<(PathId, Lane)> = None;
    for &p in candidates {
        let Some(lane) = ff_sla(state, p) else { continue };
        let better = match best {
            None => true,
            Some((bp, bl)) => {
                lane < bl
                    || (lane == bl
                        && inst
                            .path(p)
                            .path
                            .length_km
                            .total_cmp(&inst.path(bp).path.length_km)
                            .is_lt())
            }
        };
        if better {
            best = Some((p, lane));
        }
    }
    best
}

/// Whole-lane and same-pair-shared assignment in sequence order.
pub fn algorithm1(state: &mut AllocationState<'_>, seq: &[RequestId]) -> PhaseOutcome {
    let inst = state.instance();
    let grid = inst.physics.grid;
    let mut pending: HashMap<NodePair, usize> = inst.pairs().iter().map(|(np, e)| (*np, e.requests.len())).collect();

    for &r in seq {
        let np = inst.requests[r].pair();
        let mut t = inst.requests[r].gbps;
        if let Some(n) = pending.get_mut(&np) {
            *n = n.saturating_sub(1);
        }

        if let Some((idx, entry)) = state.table2_find(np) {
            let sch = state.sch(entry.sch).expect("table entry refers to a live channel");
            let path = sch.path;
            let t_p = inst
                .physics
                .supportable_with(inst.path(path).gbps_per_oc, entry.remaining_fs);
            if t_p > t {
                let ocs = inst.ocs_for(path, t);
                state.append_to_sch(entry.sch, r, ocs).expect("fits remaining spectrum");
                let left = entry.remaining_fs - grid.fs_required(ocs);
                if left > 0 {
                    state.table2_set(idx, left);
                } else {
                    state.table2_remove(idx);
                }
                continue;
            }
            let ocs = entry.remaining_fs / grid.fs_per_oc;
            if ocs > 0 {
                state.append_to_sch(entry.sch, r, ocs).expect("fits remaining spectrum");
            }
            t -= t_p;
            state.table2_remove(idx);
        }

        while t > 0 {
            let Some((p, lane)) = best_ff_sla(state, inst.candidates(r)) else {
                state.table3_set(r, t);
                break;
            };
            let t_best = inst.lane_capacity_gbps(p);
            if t_best > t {
                if pending.get(&np).copied().unwrap_or(0) > 0 {
                    let ocs = inst.ocs_for(p, t);
                    let sch = state.reserve_bypass_sch(r, p, lane, ocs).expect("lane is free");
                    state.table2_push(sch).expect("channel exists");
                } else {
                    state.table3_set(r, t);
                }
                t = 0;
            } else {
                state
                    .reserve_bypass_sch(r, p, lane, grid.ocs_per_lane())
                    .expect("lane is free");
                t -= t_best;
            }
        }
    }

    PhaseOutcome {
        table3: state.table3().to_vec(),
        l_nw_a1_max: state.highest_used_bypass_lane(),
    }
}

/// Retries the unsatisfied entries with whole-lane channels on lanes up to
/// `l_max` (`None` lifts the cap).
pub fn algorithm2(state: &mut AllocationState<'_>, l_max: Option<Lane>) -> Vec<Table3Entry> {
    let inst = state.instance();
    let grid = inst.physics.grid;
    state.table3_sort_descending();
    let order: Vec<RequestId> = state.table3().iter().map(|e| e.request).collect();
    for r in order {
        let mut t_rem = state
            .table3()
            .iter()
            .find(|e| e.request == r)
            .map(|e| e.remaining_gbps)
            .expect("entry present");
        while let Some((p, lane)) = best_ff_sla(state, inst.candidates(r)) {
            if l_max.is_some_and(|m| lane > m) {
                break;
            }
            let t_best = inst.lane_capacity_gbps(p);
            if t_best > t_rem {
                let ocs = inst.ocs_for(p, t_rem);
                state.reserve_bypass_sch(r, p, lane, ocs).expect("lane is free");
                state.table3_remove(r);
                break;
            }
            state
                .reserve_bypass_sch(r, p, lane, grid.ocs_per_lane())
                .expect("lane is free");
            t_rem -= t_best;
            if t_rem == 0 {
                state.table3_remove(r);
                break;
            }
            state.table3_set(r, t_rem);
        }
    }
    state.table3().to_vec()
}

/// Lowest start index for `fs` slices on switching lane `lane` along `path`.
pub fn ff_sa(state: &AllocationState<'_>, path: PathId, lane: Lane, fs: u32) -> Option<u32> {
    state.first_fit_block(path, lane, fs)
}

/// Packs the unsatisfied entries onto switching lanes, lowest lane first.
/// Returns the entries still unserved.
pub fn algorithm3(state: &mut AllocationState<'_>, policy: FailurePolicy) -> Vec<Table3Entry> {
    let inst = state.instance();
    let grid = inst.physics.grid;
    state.table3_sort_descending();
    for lane in inst.profile.lw() {
        if state.table3().is_empty() {
            break;
        }
        let entries: Vec<Table3Entry> = state.table3().to_vec();
        for e in entries {
            let mut best: Option<(u32, PathId, u32, u32)> = None;
            for &p in inst.candidates(e.request) {
                let ocs = inst.ocs_for(p, e.remaining_gbps);
                let fs = grid.fs_required(ocs);
                if let Some(start) = ff_sa(state, p, lane, fs) {
                    let end = start + fs - 1;
                    if best.is_none_or(|(b, ..)| end < b) {
                        best = Some((end, p, start, ocs));
                    }
                }
            }
            if let Some((_, p, start, ocs)) = best {
                state
                    .reserve_wxc_block(e.request, p, lane, start, ocs)
                    .expect("first-fit placement is feasible");
                state.table3_remove(e.request);
            }
        }
    }
    if !state.table3().is_empty() && policy.retry_uncapped {
        algorithm2(state, None);
    }
    state.table3().to_vec()
}

fn check_sequence(inst: &Instance, seq: &[RequestId]) -> Result<(), HeuristicError> {
    let n = inst.requests.len();
    if seq.len() != n {
        return Err(HeuristicError::InvalidSequence);
    }
    let mut seen = vec![false; n];
    for &r in seq {
        if r >= n || std::mem::replace(&mut seen[r], true) {
            return Err(HeuristicError::InvalidSequence);
        }
    }
    Ok(())
}

fn unserved_gbps(entries: &[Table3Entry]) -> u64 {
    entries.iter().map(|e| e.remaining_gbps).sum()
}

/// Runs all phases and returns the final state, the unserved entries and
/// per-phase diagnostics.
pub fn run_phases<'a>(
    inst: &'a Instance,
    seq: &[RequestId],
    policy: FailurePolicy,
) -> Result<(AllocationState<'a>, Vec<Table3Entry>, PlanDiagnostics), HeuristicError> {
    check_sequence(inst, seq)?;
    let mut state = AllocationState::new(inst);
    let a1 = algorithm1(&mut state, seq);
    let mut diag = PlanDiagnostics {
        bypass_lane_max: a1.l_nw_a1_max,
        pending_after_assignment: a1.table3.len(),
        unserved_gbps_after_assignment: unserved_gbps(&a1.table3),
        ..PlanDiagnostics::default()
    };
    let after2 = if policy.reassign {
        algorithm2(&mut state, Some(a1.l_nw_a1_max))
    } else {
        a1.table3
    };
    diag.unserved_gbps_after_reassignment = unserved_gbps(&after2);
    let left = algorithm3(&mut state, policy);
    diag.unserved_gbps_after_sharing = unserved_gbps(&left);
    Ok((state, left, diag))
}

/// Plans `inst` serving requests in `seq` order.
pub fn plan(inst: &Instance, seq: &[RequestId]) -> Result<Solution, HeuristicError> {
    plan_with(inst, seq, FailurePolicy::default())
}

pub fn plan_with(inst: &Instance, seq: &[RequestId], policy: FailurePolicy) -> Result<Solution, HeuristicError> {
    let (state, left, diag) = run_phases(inst, seq, policy)?;
    Ok(Solution::from_state(&state, &left, Some(diag)))
}
