//! Planning instances: network, lane profile, physics, requests and the
//! per-node-pair candidate path index.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::physical::{ocs_required, Physics, PhysicsError};
use crate::topology::{k_shortest_paths, CandidatePath, LaneProfile, LinkId, Network, NodeId, NodeName};

/// Identifier of a routed candidate path inside an [`Instance`].
pub type PathId = usize;
/// Index of a request inside an [`Instance`].
pub type RequestId = usize;

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("failed to parse requests document: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("request {0}: unknown node `{1}`")]
    UnknownNode(RequestId, String),
    #[error("request {0} has identical source and destination")]
    SameEndpoints(RequestId),
    #[error("request {0} has zero traffic volume")]
    ZeroVolume(RequestId),
    #[error("k must be at least 1")]
    ZeroK,
    #[error("lane profile has {profile} lanes but the network has {network}")]
    LaneMismatch { profile: u16, network: u16 },
    #[error(transparent)]
    Physics(#[from] PhysicsError),
}

/// Ordered (source, destination) pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NodePair {
    pub src: NodeId,
    pub dst: NodeId,
}

/// Connection request `<s, d, t>` with `t` in Gbps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Request {
    pub id: RequestId,
    pub src: NodeId,
    pub dst: NodeId,
    pub gbps: u64,
}

impl Request {
    pub fn pair(&self) -> NodePair {
        NodePair {
            src: self.src,
            dst: self.dst,
        }
    }
}

/// A candidate path with its modulation resolved.
#[derive(Debug, Clone)]
pub struct RoutedPath {
    pub id: PathId,
    pub pair: NodePair,
    pub path: CandidatePath,
    /// Index into the modulation table.
    pub modulation: usize,
    pub gbps_per_oc: u64,
}

impl RoutedPath {
    pub fn links(&self) -> &[LinkId] {
        &self.path.links
    }
}

/// Candidate paths `P_np` and requests `R_np` of one node pair.
#[derive(Debug, Clone, Default)]
pub struct PairEntry {
    pub paths: Vec<PathId>,
    pub requests: Vec<RequestId>,
}

#[derive(Debug, Clone)]
pub struct Instance {
    pub network: Network,
    pub profile: LaneProfile,
    pub physics: Physics,
    pub k: usize,
    pub requests: Vec<Request>,
    paths: Vec<RoutedPath>,
    pairs: BTreeMap<NodePair, PairEntry>,
}

impl Instance {
    /// Builds the instance and its node-pair index. Candidate paths whose
    /// length exceeds every modulation reach are dropped.
    pub fn new(
        network: Network,
        profile: LaneProfile,
        physics: Physics,
        k: usize,
        requests: Vec<Request>,
    ) -> Result<Self, InstanceError> {
        if k == 0 {
            return Err(InstanceError::ZeroK);
        }
        if profile.lanes() != network.lanes_per_link() {
            return Err(InstanceError::LaneMismatch {
                profile: profile.lanes(),
                network: network.lanes_per_link(),
            });
        }
        physics.validate()?;
        let mut requests = requests;
        for (i, r) in requests.iter_mut().enumerate() {
            r.id = i;
            if r.src >= network.node_count() {
                return Err(InstanceError::UnknownNode(i, r.src.to_string()));
            }
            if r.dst >= network.node_count() {
                return Err(InstanceError::UnknownNode(i, r.dst.to_string()));
            }
            if r.src == r.dst {
                return Err(InstanceError::SameEndpoints(i));
            }
            if r.gbps == 0 {
                return Err(InstanceError::ZeroVolume(i));
            }
        }

        let mut pairs: BTreeMap<NodePair, PairEntry> = BTreeMap::new();
        for r in &requests {
            pairs.entry(r.pair()).or_default().requests.push(r.id);
        }
        let mut paths = Vec::new();
        for (pair, entry) in pairs.iter_mut() {
            for cand in k_shortest_paths(&network, pair.src, pair.dst, k) {
                let Ok(modulation) = physics.modulation.highest_feasible(cand.length_km) else {
                    continue;
                };
                let id = paths.len();
                entry.paths.push(id);
                paths.push(RoutedPath {
                    id,
                    pair: *pair,
                    gbps_per_oc: physics.modulation.get(modulation).gbps_per_oc,
                    modulation,
                    path: cand,
                });
            }
        }
        Ok(Self {
            network,
            profile,
            physics,
            k,
            requests,
            paths,
            pairs,
        })
    }

    /// Same network, physics and requests under a different lane profile.
    pub fn with_profile(&self, profile: LaneProfile) -> Self {
        Self {
            profile,
            ..self.clone()
        }
    }

    pub fn paths(&self) -> &[RoutedPath] {
        &self.paths
    }

    pub fn path(&self, id: PathId) -> &RoutedPath {
        &self.paths[id]
    }

    pub fn pairs(&self) -> &BTreeMap<NodePair, PairEntry> {
        &self.pairs
    }

    pub fn pair_entry(&self, pair: NodePair) -> Option<&PairEntry> {
        self.pairs.get(&pair)
    }

    /// Candidate paths `P_r` of a request, in rank order.
    pub fn candidates(&self, request: RequestId) -> &[PathId] {
        self.pairs
            .get(&self.requests[request].pair())
            .map(|e| e.paths.as_slice())
            .unwrap_or(&[])
    }

    pub fn total_gbps(&self) -> u64 {
        self.requests.iter().map(|r| r.gbps).sum()
    }

    /// Traffic a whole lane carries on `path`.
    pub fn lane_capacity_gbps(&self, path: PathId) -> u64 {
        self.physics
            .supportable_with(self.paths[path].gbps_per_oc, self.physics.grid.fs_per_lane)
    }

    /// Carriers needed on `path` for `gbps` of traffic.
    pub fn ocs_for(&self, path: PathId, gbps: u64) -> u32 {
        ocs_required(gbps, self.paths[path].gbps_per_oc)
    }

    /// Looks up the candidate path of `request` with the given node sequence.
    pub fn find_candidate(&self, request: RequestId, nodes: &[NodeId]) -> Option<PathId> {
        self.candidates(request)
            .iter()
            .copied()
            .find(|&p| self.paths[p].path.nodes == nodes)
    }

    /// Requests in descending volume order (ties keep input order).
    pub fn descending_volume_order(&self) -> Vec<RequestId> {
        let mut seq: Vec<RequestId> = (0..self.requests.len()).collect();
        seq.sort_by(|&a, &b| self.requests[b].gbps.cmp(&self.requests[a].gbps));
        seq
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RequestDoc {
    pub src: NodeName,
    pub dst: NodeName,
    pub gbps: u64,
}

/// On-disk request list.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct RequestsDoc {
    pub requests: Vec<RequestDoc>,
}

impl RequestsDoc {
    pub fn resolve(&self, network: &Network) -> Result<Vec<Request>, InstanceError> {
        self.requests
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let lookup = |n: &NodeName| {
                    let name = n.clone().into_string();
                    network.node_id(&name).ok_or(InstanceError::UnknownNode(i, name))
                };
                Ok(Request {
                    id: i,
                    src: lookup(&r.src)?,
                    dst: lookup(&r.dst)?,
                    gbps: r.gbps,
                })
            })
            .collect()
    }

    pub fn from_requests(network: &Network, requests: &[Request]) -> Self {
        Self {
            requests: requests
                .iter()
                .map(|r| RequestDoc {
                    src: NodeName::Text(network.node_name(r.src).to_string()),
                    dst: NodeName::Text(network.node_name(r.dst).to_string()),
                    gbps: r.gbps,
                })
                .collect(),
        }
    }
}

pub fn load_requests(json: &str, network: &Network) -> Result<Vec<Request>, InstanceError> {
    let doc: RequestsDoc = serde_json::from_str(json)?;
    doc.resolve(network)
}
