//! Self-contained solution export: objectives plus the per-request channel map.

use serde::{Deserialize, Serialize};

use crate::alloc::{AllocationState, Objectives, SchId, SchKind, Table3Entry};
use crate::instance::RequestId;
use crate::topology::Lane;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChannelDoc {
    pub path: Vec<String>,
    pub lane: Lane,
    pub modulation: String,
    pub ocs: u32,
    pub fs_start: u32,
    pub fs_end: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sch: Option<SchId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<SchKind>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RequestAssignment {
    pub request: RequestId,
    pub src: String,
    pub dst: String,
    pub gbps: u64,
    pub channels: Vec<ChannelDoc>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnservedEntry {
    pub request: RequestId,
    pub remaining_gbps: u64,
}

/// Per-phase figures recorded by the heuristic pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PlanDiagnostics {
    /// Highest bypass lane index in use after the first phase.
    pub bypass_lane_max: Lane,
    pub pending_after_assignment: usize,
    pub unserved_gbps_after_assignment: u64,
    pub unserved_gbps_after_reassignment: u64,
    pub unserved_gbps_after_sharing: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Solution {
    pub objectives: Objectives,
    /// Sum over links of occupied lanes.
    pub lane_link_usage: u64,
    pub assignments: Vec<RequestAssignment>,
    #[serde(default)]
    pub unserved: Vec<UnservedEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<PlanDiagnostics>,
}

impl Solution {
    pub fn from_state(
        state: &AllocationState<'_>,
        unserved: &[Table3Entry],
        diagnostics: Option<PlanDiagnostics>,
    ) -> Self {
        let inst = state.instance();
        let net = &inst.network;
        let assignments = inst
            .requests
            .iter()
            .map(|r| RequestAssignment {
                request: r.id,
                src: net.node_name(r.src).to_string(),
                dst: net.node_name(r.dst).to_string(),
                gbps: r.gbps,
                channels: state
                    .request_channels(r.id)
                    .map(|c| {
                        let rp = inst.path(c.path);
                        ChannelDoc {
                            path: rp.path.names(net).into_iter().map(str::to_string).collect(),
                            lane: c.lane,
                            modulation: inst.physics.modulation.get(rp.modulation).name.clone(),
                            ocs: c.ocs,
                            fs_start: c.fs_start,
                            fs_end: c.fs_end,
                            sch: Some(c.sch),
                            kind: state.sch(c.sch).map(|s| s.kind),
                        }
                    })
                    .collect(),
            })
            .collect();
        let mut unserved: Vec<UnservedEntry> = unserved
            .iter()
            .map(|e| UnservedEntry {
                request: e.request,
                remaining_gbps: e.remaining_gbps,
            })
            .collect();
        unserved.sort_by_key(|e| e.request);
        Self {
            objectives: state.objectives(),
            lane_link_usage: state.lane_link_usage(),
            assignments,
            unserved,
            diagnostics,
        }
    }

    pub fn is_complete(&self) -> bool {
        self.unserved.is_empty()
    }

    pub fn unserved_gbps(&self) -> u64 {
        self.unserved.iter().map(|e| e.remaining_gbps).sum()
    }

    pub fn channel_count(&self) -> usize {
        self.assignments.iter().map(|a| a.channels.len()).sum()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("solution serializes")
    }

    pub fn from_json(json: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(json)
    }
}
