use std::collections::{BTreeMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::instance::{Instance, PathId, RequestId};
use crate::solution::Solution;
use crate::topology::{Lane, LinkId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationClass {
    /// Assignment names a request that does not exist, mismatches its
    /// endpoints, or repeats it.
    UnknownRequest,
    /// Channel path is not among the request's candidate paths.
    NonCandidatePath,
    /// Channel modulation differs from the highest feasible one for its path.
    ModulationMismatch,
    /// Zero carriers, or FS interval length differs from carriers x F_OC.
    ChannelArithmetic,
    /// Lane index or ending FS index outside the grid.
    OutOfGrid,
    /// Carried traffic below the requested volume.
    DemandShortfall,
    /// Two channels overlap on a shared (link, lane).
    SpectrumOverlap,
    /// Channels on different paths closer than the guard band on a switching lane.
    GuardBand,
    /// Same node pair, different paths sharing a link on a bypass lane.
    LaneDoubleBooking,
    /// Different node pairs sharing a link on a bypass lane.
    CrossPairSharing,
}

impl ViolationClass {
    pub fn label(self) -> &'static str {
        match self {
            ViolationClass::UnknownRequest => "unknown-request",
            ViolationClass::NonCandidatePath => "non-candidate-path",
            ViolationClass::ModulationMismatch => "modulation-mismatch",
            ViolationClass::ChannelArithmetic => "channel-arithmetic",
            ViolationClass::OutOfGrid => "out-of-grid",
            ViolationClass::DemandShortfall => "demand-shortfall",
            ViolationClass::SpectrumOverlap => "spectrum-overlap",
            ViolationClass::GuardBand => "guard-band",
            ViolationClass::LaneDoubleBooking => "lane-double-booking",
            ViolationClass::CrossPairSharing => "cross-pair-sharing",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub class: ViolationClass,
    pub requests: Vec<RequestId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub link: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lane: Option<Lane>,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditReport {
    pub channels_checked: usize,
    pub violations: Vec<Violation>,
}

impl AuditReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn count(&self, class: ViolationClass) -> usize {
        self.violations.iter().filter(|v| v.class == class).count()
    }

    /// Distinct violation classes present, in order.
    pub fn classes(&self) -> Vec<ViolationClass> {
        let mut v: Vec<_> = self.violations.iter().map(|v| v.class).collect();
        v.sort();
        v.dedup();
        v
    }
}

impl fmt::Display for AuditReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "channels: {}", self.channels_checked)?;
        writeln!(f, "violations: {}", self.violations.len())?;
        for v in &self.violations {
            write!(f, "{} requests=", v.class.label())?;
            let ids: Vec<String> = v.requests.iter().map(|r| r.to_string()).collect();
            write!(f, "{}", ids.join(","))?;
            if let Some(link) = &v.link {
                write!(f, " link={link}")?;
            }
            if let Some(lane) = v.lane {
                write!(f, " lane={lane}")?;
            }
            writeln!(f, " {}", v.detail)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
struct Resolved {
    request: RequestId,
    path: PathId,
    lane: Lane,
    start: u32,
    end: u32,
}

/// Audits `solution` against every constraint of the planning model.
pub fn validate_solution(inst: &Instance, solution: &Solution) -> AuditReport {
    let net = &inst.network;
    let grid = inst.physics.grid;
    let lanes = inst.profile.lanes();
    let mut report = AuditReport::default();
    let push =
        |report: &mut AuditReport, class, requests: Vec<RequestId>, link: Option<LinkId>, lane, detail: String| {
            report.violations.push(Violation {
                class,
                requests,
                link: link.map(|l| {
                    let e = net.link(l);
                    format!("{}->{}", net.node_name(e.src), net.node_name(e.dst))
                }),
                lane,
                detail,
            });
        };

    let mut carried = vec![0u64; inst.requests.len()];
    let mut seen = vec![false; inst.requests.len()];
    let mut resolved: Vec<Resolved> = Vec::new();

    for a in &solution.assignments {
        let Some(req) = inst.requests.get(a.request) else {
            push(
                &mut report,
                ViolationClass::UnknownRequest,
                vec![a.request],
                None,
                None,
                "no such request".into(),
            );
            continue;
        };
        if net.node_id(&a.src) != Some(req.src) || net.node_id(&a.dst) != Some(req.dst) {
            push(
                &mut report,
                ViolationClass::UnknownRequest,
                vec![a.request],
                None,
                None,
                format!("endpoints {}->{} do not match the request", a.src, a.dst),
            );
            continue;
        }
        if std::mem::replace(&mut seen[a.request], true) {
            push(
                &mut report,
                ViolationClass::UnknownRequest,
                vec![a.request],
                None,
                None,
                "request assigned twice".into(),
            );
            continue;
        }
        for ch in &a.channels {
            report.channels_checked += 1;
            let nodes: Option<Vec<usize>> = ch.path.iter().map(|n| net.node_id(n)).collect();
            let Some(path) = nodes.and_then(|n| inst.find_candidate(a.request, &n)) else {
                push(
                    &mut report,
                    ViolationClass::NonCandidatePath,
                    vec![a.request],
                    None,
                    Some(ch.lane),
                    format!("path {} is not a candidate", ch.path.join("-")),
                );
                continue;
            };
            let rp = inst.path(path);
            let expected = &inst.physics.modulation.get(rp.modulation).name;
            if &ch.modulation != expected {
                push(
                    &mut report,
                    ViolationClass::ModulationMismatch,
                    vec![a.request],
                    None,
                    Some(ch.lane),
                    format!("uses {} where the path supports {}", ch.modulation, expected),
                );
            }
            if ch.lane == 0 || ch.lane > lanes {
                push(
                    &mut report,
                    ViolationClass::OutOfGrid,
                    vec![a.request],
                    None,
                    Some(ch.lane),
                    format!("lane {} outside 1..={lanes}", ch.lane),
                );
                continue;
            }
            carried[a.request] += u64::from(ch.ocs) * rp.gbps_per_oc;
            if ch.ocs == 0 || ch.fs_end < ch.fs_start || ch.fs_end - ch.fs_start + 1 != grid.fs_required(ch.ocs) {
                push(
                    &mut report,
                    ViolationClass::ChannelArithmetic,
                    vec![a.request],
                    None,
                    Some(ch.lane),
                    format!("{} carriers on FS {}..={}", ch.ocs, ch.fs_start, ch.fs_end),
                );
                continue;
            }
            if ch.fs_end > grid.max_index() {
                push(
                    &mut report,
                    ViolationClass::OutOfGrid,
                    vec![a.request],
                    None,
                    Some(ch.lane),
                    format!("ending index {} beyond {}", ch.fs_end, grid.max_index()),
                );
                continue;
            }
            resolved.push(Resolved {
                request: a.request,
                path,
                lane: ch.lane,
                start: ch.fs_start,
                end: ch.fs_end,
            });
        }
    }

    for r in &inst.requests {
        if carried[r.id] < r.gbps {
            push(
                &mut report,
                ViolationClass::DemandShortfall,
                vec![r.id],
                None,
                None,
                format!("carries {} of {} Gbps", carried[r.id], r.gbps),
            );
        }
    }

    let mut on: BTreeMap<(LinkId, Lane), Vec<usize>> = BTreeMap::new();
    for (i, c) in resolved.iter().enumerate() {
        for &l in inst.path(c.path).links() {
            on.entry((l, c.lane)).or_default().push(i);
        }
    }
    let mut checked: HashSet<(usize, usize)> = HashSet::new();
    for ((link, lane), chans) in &on {
        let switching = inst.profile.is_switching(*lane);
        for (x, &i) in chans.iter().enumerate() {
            for &j in &chans[x + 1..] {
                if !checked.insert((i, j)) {
                    continue;
                }
                let (a, b) = (&resolved[i], &resolved[j]);
                let pa = inst.path(a.path).pair;
                let pb = inst.path(b.path).pair;
                let overlap = a.start <= b.end && b.start <= a.end;
                let gap = if a.end < b.start {
                    b.start - a.end - 1
                } else {
                    a.start.saturating_sub(b.end + 1)
                };
                let class = if !switching {
                    if pa != pb {
                        Some(ViolationClass::CrossPairSharing)
                    } else if a.path != b.path {
                        Some(ViolationClass::LaneDoubleBooking)
                    } else if overlap {
                        Some(ViolationClass::SpectrumOverlap)
                    } else {
                        None
                    }
                } else if overlap {
                    Some(ViolationClass::SpectrumOverlap)
                } else if a.path != b.path && gap < grid.guard_fs {
                    Some(ViolationClass::GuardBand)
                } else {
                    None
                };
                if let Some(class) = class {
                    push(
                        &mut report,
                        class,
                        vec![a.request, b.request],
                        Some(*link),
                        Some(*lane),
                        format!("FS {}..={} vs {}..={}", a.start, a.end, b.start, b.end),
                    );
                }
            }
        }
    }
    report
}
