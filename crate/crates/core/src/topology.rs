//! Network topologies, lane profiles and candidate path computation.
//!
//! A [`Network`] is a directed graph whose links all carry the same number of
//! space lanes. Lanes are indexed `1..=lanes_per_link` and the index is shared
//! network-wide: a channel keeps its lane index on every link it traverses.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Index of a node inside a [`Network`].
pub type NodeId = usize;
/// Index of a directed link inside a [`Network`].
pub type LinkId = usize;
/// One-based space lane index.
pub type Lane = u16;

/// Lane occupancy is tracked in a 128-bit mask per link.
pub const MAX_LANES: Lane = 128;

#[derive(Debug, Error)]
pub enum TopologyError {
    #[error("failed to parse topology document: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("duplicate node `{0}`")]
    DuplicateNode(String),
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("self-loop link at node `{0}`")]
    SelfLoop(String),
    #[error("duplicate link {0} -> {1}")]
    DuplicateLink(String, String),
    #[error("link {src} -> {dst} has non-positive length {length_km} km")]
    NonPositiveLength { src: String, dst: String, length_km: f64 },
    #[error("lanes_per_link must be at least 1")]
    ZeroLanes,
    #[error("at most {MAX_LANES} lanes per link are supported, got {0}")]
    TooManyLanes(Lane),
    #[error("lane {lane} is outside 1..={lanes}")]
    LaneOutOfRange { lane: Lane, lanes: Lane },
    #[error("switching lanes must take the highest indices; lane {0} breaks the partition")]
    SwitchingNotOnTop(Lane),
    #[error("lane mode `explicit` requires an `lw` list")]
    MissingExplicitLanes,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Link {
    pub src: NodeId,
    pub dst: NodeId,
    pub length_km: f64,
}

/// Directed network with a uniform lane count per link. Immutable once built.
#[derive(Debug, Clone)]
pub struct Network {
    names: Vec<String>,
    index: BTreeMap<String, NodeId>,
    links: Vec<Link>,
    out_links: Vec<Vec<LinkId>>,
    link_index: BTreeMap<(NodeId, NodeId), LinkId>,
    lanes_per_link: Lane,
}

impl Network {
    /// Builds a network from node names and `(src, dst, length_km)` triples.
    pub fn new<S: AsRef<str>>(nodes: &[S], links: &[(S, S, f64)], lanes_per_link: Lane) -> Result<Self, TopologyError> {
        if lanes_per_link == 0 {
            return Err(TopologyError::ZeroLanes);
        }
        if lanes_per_link > MAX_LANES {
            return Err(TopologyError::TooManyLanes(lanes_per_link));
        }
        let mut names = Vec::with_capacity(nodes.len());
        let mut index = BTreeMap::new();
        for name in nodes {
            let name = name.as_ref().to_string();
            if index.insert(name.clone(), names.len()).is_some() {
                return Err(TopologyError::DuplicateNode(name));
            }
            names.push(name);
        }
        let lookup = |n: &str| {
            index
                .get(n)
                .copied()
                .ok_or_else(|| TopologyError::UnknownNode(n.to_string()))
        };

        let mut out = Vec::with_capacity(links.len());
        let mut out_links = vec![Vec::new(); names.len()];
        let mut link_index = BTreeMap::new();
        for (src, dst, length_km) in links {
            let (s, d) = (lookup(src.as_ref())?, lookup(dst.as_ref())?);
            if s == d {
                return Err(TopologyError::SelfLoop(names[s].clone()));
            }
            if !(*length_km > 0.0) || !length_km.is_finite() {
                return Err(TopologyError::NonPositiveLength {
                    src: names[s].clone(),
                    dst: names[d].clone(),
                    length_km: *length_km,
                });
            }
            if link_index.insert((s, d), out.len()).is_some() {
                return Err(TopologyError::DuplicateLink(names[s].clone(), names[d].clone()));
            }
            out_links[s].push(out.len());
            out.push(Link {
                src: s,
                dst: d,
                length_km: *length_km,
            });
        }
        Ok(Self {
            names,
            index,
            links: out,
            out_links,
            link_index,
            lanes_per_link,
        })
    }

    pub fn node_count(&self) -> usize {
        self.names.len()
    }

    pub fn link_count(&self) -> usize {
        self.links.len()
    }

    pub fn lanes_per_link(&self) -> Lane {
        self.lanes_per_link
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn link(&self, id: LinkId) -> &Link {
        &self.links[id]
    }

    pub fn out_links(&self, node: NodeId) -> &[LinkId] {
        &self.out_links[node]
    }

    pub fn node_name(&self, node: NodeId) -> &str {
        &self.names[node]
    }

    pub fn node_names(&self) -> &[String] {
        &self.names
    }

    pub fn node_id(&self, name: &str) -> Option<NodeId> {
        self.index.get(name).copied()
    }

    pub fn link_between(&self, src: NodeId, dst: NodeId) -> Option<LinkId> {
        self.link_index.get(&(src, dst)).copied()
    }

    /// Resolves a node-name sequence into a path, if every hop is a link and no
    /// node repeats.
    pub fn resolve_path<S: AsRef<str>>(&self, nodes: &[S]) -> Option<CandidatePath> {
        let ids: Vec<NodeId> = nodes.iter().map(|n| self.node_id(n.as_ref())).collect::<Option<_>>()?;
        self.path_from_nodes(ids, 0)
    }

    pub(crate) fn path_from_nodes(&self, nodes: Vec<NodeId>, rank: usize) -> Option<CandidatePath> {
        if nodes.len() < 2 {
            return None;
        }
        let mut seen = vec![false; self.node_count()];
        for &n in &nodes {
            if std::mem::replace(&mut seen[n], true) {
                return None;
            }
        }
        let links: Vec<LinkId> = nodes
            .windows(2)
            .map(|w| self.link_between(w[0], w[1]))
            .collect::<Option<_>>()?;
        let length_km = links.iter().map(|&l| self.links[l].length_km).sum();
        Some(CandidatePath {
            nodes,
            links,
            length_km,
            rank,
        })
    }
}

/// How the lanes of every link are split into bypass-only and switching lanes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LaneMode {
    /// Every lane supports wavelength switching (stacked WXC nodes).
    Full,
    /// `ceil(|L| / 9)` switching lanes on the top indices (SXC+WXC nodes).
    Ninth,
    /// No lane supports wavelength switching (SXC-only nodes).
    None,
    /// Switching lanes listed explicitly.
    Explicit,
}

impl LaneMode {
    pub fn label(self) -> &'static str {
        match self {
            LaneMode::Full => "full",
            LaneMode::Ninth => "ninth",
            LaneMode::None => "none",
            LaneMode::Explicit => "explicit",
        }
    }
}

impl fmt::Display for LaneMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for LaneMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "full" | "wxc" => Ok(LaneMode::Full),
            "ninth" | "sxc+wxc" | "hoxc" => Ok(LaneMode::Ninth),
            "none" | "sxc" => Ok(LaneMode::None),
            "explicit" => Ok(LaneMode::Explicit),
            other => Err(format!("unknown lane mode `{other}`")),
        }
    }
}

/// Partition of lane indices into bypass lanes (`1..=bypass`) followed by
/// switching lanes (`bypass+1..=lanes`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LaneProfile {
    lanes: Lane,
    switching: Lane,
    mode: LaneMode,
}

impl LaneProfile {
    /// Builds the profile for `mode`; `explicit` carries the switching lanes
    /// for [`LaneMode::Explicit`] and is ignored otherwise.
    pub fn new(lanes: Lane, mode: LaneMode, explicit: Option<&[Lane]>) -> Result<Self, TopologyError> {
        if lanes == 0 {
            return Err(TopologyError::ZeroLanes);
        }
        if lanes > MAX_LANES {
            return Err(TopologyError::TooManyLanes(lanes));
        }
        let switching = match mode {
            LaneMode::Full => lanes,
            LaneMode::None => 0,
            LaneMode::Ninth => lanes.div_ceil(9),
            LaneMode::Explicit => {
                let mut lw = explicit.ok_or(TopologyError::MissingExplicitLanes)?.to_vec();
                lw.sort_unstable();
                lw.dedup();
                for &lane in &lw {
                    if lane == 0 || lane > lanes {
                        return Err(TopologyError::LaneOutOfRange { lane, lanes });
                    }
                }
                let count = lw.len() as Lane;
                let first = lanes - count + 1;
                if let Some(&bad) = lw.iter().find(|&&l| l < first) {
                    return Err(TopologyError::SwitchingNotOnTop(bad));
                }
                count
            }
        };
        Ok(Self { lanes, switching, mode })
    }

    pub fn lanes(&self) -> Lane {
        self.lanes
    }

    pub fn mode(&self) -> LaneMode {
        self.mode
    }

    pub fn switching_count(&self) -> Lane {
        self.switching
    }

    pub fn bypass_count(&self) -> Lane {
        self.lanes - self.switching
    }

    pub fn is_switching(&self, lane: Lane) -> bool {
        lane > self.bypass_count() && lane <= self.lanes
    }

    /// Switching lanes (L_W), ascending. Empty when the mode is `none`.
    pub fn lw(&self) -> RangeInclusive<Lane> {
        self.bypass_count() + 1..=self.lanes
    }

    /// Bypass-only lanes (L_NW), ascending.
    pub fn lnw(&self) -> RangeInclusive<Lane> {
        1..=self.bypass_count()
    }

    pub fn all(&self) -> RangeInclusive<Lane> {
        1..=self.lanes
    }
}

/// A loopless routing path with its precomputed link list.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidatePath {
    pub nodes: Vec<NodeId>,
    pub links: Vec<LinkId>,
    pub length_km: f64,
    /// One-based position in the k-shortest list (0 when not ranked).
    pub rank: usize,
}

impl CandidatePath {
    pub fn src(&self) -> NodeId {
        self.nodes[0]
    }

    pub fn dst(&self) -> NodeId {
        *self.nodes.last().expect("paths have at least two nodes")
    }

    pub fn shares_link(&self, other: &CandidatePath) -> bool {
        self.links.iter().any(|l| other.links.contains(l))
    }

    pub fn names<'a>(&self, network: &'a Network) -> Vec<&'a str> {
        self.nodes.iter().map(|&n| network.node_name(n)).collect()
    }
}

/// Total order used for path ranking: length, then node sequence.
pub(crate) fn path_order(a_len: f64, a_nodes: &[NodeId], b_len: f64, b_nodes: &[NodeId]) -> Ordering {
    a_len.total_cmp(&b_len).then_with(|| a_nodes.cmp(b_nodes))
}

/// Up to `k` loopless paths from `src` to `dst` in non-decreasing length,
/// equal lengths ordered by node sequence. Returns an empty list when `dst`
/// is unreachable, `k == 0` or `src == dst`.
pub fn k_shortest_paths(network: &Network, src: NodeId, dst: NodeId, k: usize) -> Vec<CandidatePath> {
    if k == 0 || src == dst {
        return Vec::new();
    }
    let n = network.node_count();
    let mut banned_nodes = vec![false; n];
    let mut banned_links = vec![false; network.link_count()];
    let Some(first) = shortest_path(network, src, dst, &banned_nodes, &banned_links) else {
        return Vec::new();
    };
    let mut accepted: Vec<Vec<NodeId>> = vec![first];
    let mut candidates: Vec<(f64, Vec<NodeId>)> = Vec::new();

    while accepted.len() < k {
        let last = accepted.last().unwrap().clone();
        for spur_idx in 0..last.len() - 1 {
            let root = &last[..=spur_idx];
            banned_nodes.iter_mut().for_each(|b| *b = false);
            banned_links.iter_mut().for_each(|b| *b = false);
            for p in &accepted {
                if p.len() > spur_idx + 1 && &p[..=spur_idx] == root {
                    if let Some(l) = network.link_between(p[spur_idx], p[spur_idx + 1]) {
                        banned_links[l] = true;
                    }
                }
            }
            for &node in &root[..spur_idx] {
                banned_nodes[node] = true;
            }
            if let Some(spur) = shortest_path(network, last[spur_idx], dst, &banned_nodes, &banned_links) {
                let mut full = root[..spur_idx].to_vec();
                full.extend_from_slice(&spur);
                if !accepted.contains(&full) && !candidates.iter().any(|(_, c)| *c == full) {
                    let len = nodes_length(network, &full);
                    candidates.push((len, full));
                }
            }
        }
        let Some(best) = candidates
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| path_order(a.0, &a.1, b.0, &b.1))
            .map(|(i, _)| i)
        else {
            break;
        };
        accepted.push(candidates.swap_remove(best).1);
    }

    accepted
        .into_iter()
        .enumerate()
        .map(|(i, nodes)| {
            network
                .path_from_nodes(nodes, i + 1)
                .expect("generated paths are valid")
        })
        .collect()
}

fn nodes_length(network: &Network, nodes: &[NodeId]) -> f64 {
    nodes
        .windows(2)
        .map(|w| network.link(network.link_between(w[0], w[1]).unwrap()).length_km)
        .sum()
}

/// Label-setting shortest path returning the lexicographically smallest node
/// sequence among all shortest paths.
fn shortest_path(
    network: &Network,
    src: NodeId,
    dst: NodeId,
    banned_nodes: &[bool],
    banned_links: &[bool],
) -> Option<Vec<NodeId>> {
    let n = network.node_count();
    let mut label: Vec<Option<(f64, Vec<NodeId>)>> = vec![None; n];
    let mut settled = vec![false; n];
    label[src] = Some((0.0, vec![src]));
    loop {
        let mut pick: Option<NodeId> = None;
        for v in 0..n {
            if settled[v] || banned_nodes[v] {
                continue;
            }
            if let Some((d, p)) = &label[v] {
                let better = match pick {
                    None => true,
                    Some(u) => {
                        let (du, pu) = label[u].as_ref().unwrap();
                        path_order(*d, p, *du, pu) == Ordering::Less
                    }
                };
                if better {
                    pick = Some(v);
                }
            }
        }
        let u = pick?;
        if u == dst {
            return label[u].take().map(|(_, p)| p);
        }
        settled[u] = true;
        let (du, pu) = label[u].clone().unwrap();
        for &l in network.out_links(u) {
            if banned_links[l] {
                continue;
            }
            let link = network.link(l);
            let v = link.dst;
            if settled[v] || banned_nodes[v] {
                continue;
            }
            let nd = du + link.length_km;
            let mut np = pu.clone();
            np.push(v);
            let replace = match &label[v] {
                None => true,
                Some((dv, pv)) => path_order(nd, &np, *dv, pv) == Ordering::Less,
            };
            if replace {
                label[v] = Some((nd, np));
            }
        }
    }
}

/// Node identifier in documents: either a string or an integer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NodeName {
    Text(String),
    Number(u64),
}

impl NodeName {
    pub fn into_string(self) -> String {
        match self {
            NodeName::Text(s) => s,
            NodeName::Number(n) => n.to_string(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LinkDoc {
    pub src: NodeName,
    pub dst: NodeName,
    pub length_km: f64,
}

fn default_lane_mode() -> LaneMode {
    LaneMode::Ninth
}

/// On-disk topology document.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TopologyDoc {
    pub nodes: Vec<NodeName>,
    pub links: Vec<LinkDoc>,
    pub lanes_per_link: Lane,
    #[serde(default = "default_lane_mode")]
    pub lane_mode: LaneMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lw: Option<Vec<Lane>>,
}

/// A validated network together with the lane profile its document requested.
#[derive(Debug, Clone)]
pub struct Topology {
    pub network: Network,
    pub profile: LaneProfile,
}

impl TopologyDoc {
    pub fn build(self) -> Result<Topology, TopologyError> {
        let nodes: Vec<String> = self.nodes.into_iter().map(NodeName::into_string).collect();
        let links: Vec<(String, String, f64)> = self
            .links
            .into_iter()
            .map(|l| (l.src.into_string(), l.dst.into_string(), l.length_km))
            .collect();
        let network = Network::new(&nodes, &links, self.lanes_per_link)?;
        let profile = LaneProfile::new(self.lanes_per_link, self.lane_mode, self.lw.as_deref())?;
        Ok(Topology { network, profile })
    }
}

/// Parses and validates a JSON topology document.
pub fn load_topology(json: &str) -> Result<Topology, TopologyError> {
    let doc: TopologyDoc = serde_json::from_str(json)?;
    doc.build()
}
