#![allow(dead_code)]

use proptest::prelude::*;
use rscsa_core::*;

/// Plain description of a random instance, kept so failures print readably.
#[derive(Debug, Clone)]
pub struct Draft {
    pub nodes: usize,
    /// `(a, b, km)` spans, each added in both directions.
    pub spans: Vec<(usize, usize, f64)>,
    pub lanes: Lane,
    pub mode: LaneMode,
    pub physics: Physics,
    pub k: usize,
    /// `(src, dst, gbps)`.
    pub requests: Vec<(usize, usize, u64)>,
}

impl Draft {
    pub fn network(&self) -> Network {
        let names: Vec<String> = (0..self.nodes).map(|i| format!("n{i}")).collect();
        let mut links = Vec::new();
        for &(a, b, km) in &self.spans {
            links.push((names[a].clone(), names[b].clone(), km));
            links.push((names[b].clone(), names[a].clone(), km));
        }
        Network::new(&names, &links, self.lanes).expect("valid network")
    }

    pub fn build(&self) -> Instance {
        self.build_with(self.mode)
    }

    pub fn build_with(&self, mode: LaneMode) -> Instance {
        let profile = LaneProfile::new(self.lanes, mode, None).expect("valid profile");
        let reqs = self
            .requests
            .iter()
            .enumerate()
            .map(|(id, &(src, dst, gbps))| Request { id, src, dst, gbps })
            .collect();
        Instance::new(self.network(), profile, self.physics.clone(), self.k, reqs).expect("valid instance")
    }

    /// Same instance with requests listed in `order`.
    pub fn permuted(&self, order: &[usize]) -> Self {
        Self {
            requests: order.iter().map(|&i| self.requests[i]).collect(),
            ..self.clone()
        }
    }
}

pub fn mode() -> impl Strategy<Value = LaneMode> {
    prop_oneof![Just(LaneMode::Full), Just(LaneMode::Ninth), Just(LaneMode::None)]
}

/// Spanning tree plus a few chords over `nodes` nodes.
fn spans(nodes: usize, km: std::ops::RangeInclusive<u32>) -> impl Strategy<Value = Vec<(usize, usize, f64)>> {
    let tree: Vec<_> = (1..nodes).map(|v| (0..v, km.clone())).collect();
    let chords = prop::collection::vec((0..nodes, 0..nodes, km), 0..=nodes);
    (tree, chords).prop_map(move |(tree, chords)| {
        let mut out: Vec<(usize, usize, f64)> = tree
            .into_iter()
            .enumerate()
            .map(|(i, (p, l))| (p, i + 1, f64::from(l) * 100.0))
            .collect();
        for (a, b, l) in chords {
            if a != b && !out.iter().any(|&(x, y, _)| (x, y) == (a, b) || (x, y) == (b, a)) {
                out.push((a, b, f64::from(l) * 100.0));
            }
        }
        out
    })
}

fn requests(
    nodes: usize,
    count: std::ops::RangeInclusive<usize>,
    gbps: Vec<u64>,
) -> impl Strategy<Value = Vec<(usize, usize, u64)>> {
    prop::collection::vec((0..nodes, 1..nodes, prop::sample::select(gbps)), count)
        .prop_map(move |v| v.into_iter().map(|(s, off, g)| (s, (s + off) % nodes, g)).collect())
}

/// Mid-sized instances on the standard or simplified physics, sized for the
/// heuristic and annealer.
pub fn planning_draft() -> impl Strategy<Value = Draft> {
    (3usize..=7, 2 as Lane..=12, mode(), any::<bool>(), 1usize..=3).prop_flat_map(
        |(nodes, lanes, mode, simplified, k)| {
            let physics = if simplified {
                Physics::simplified()
            } else {
                Physics::standard()
            };
            (spans(nodes, 2..=40), requests(nodes, 0..=16, vec![1000, 4000, 10000])).prop_map(
                move |(spans, requests)| Draft {
                    nodes,
                    spans,
                    lanes,
                    mode,
                    physics: physics.clone(),
                    k,
                    requests,
                },
            )
        },
    )
}

/// Instances small enough for exhaustive search: small grids and at most
/// four requests, each fitting one lane.
pub fn tiny_draft() -> impl Strategy<Value = Draft> {
    (
        3usize..=5,
        1usize..=4,
        mode(),
        any::<bool>(),
        12u32..=24,
        1u32..=3,
        1usize..=3,
    )
        .prop_flat_map(|(nodes, count, mode, fixed, fs_per_lane, fs_per_oc, k)| {
            let grid = GridParams {
                fs_per_lane,
                fs_per_oc,
                guard_fs: 1,
                fs_width_ghz: 12.5,
            };
            let physics = if fixed {
                Physics::fixed_capacity(100, grid)
            } else {
                Physics {
                    modulation: ModulationTable::standard(),
                    grid,
                }
            };
            (
                spans(nodes, 1..=20),
                requests(nodes, count..=count, (1..=8).map(|i| 50 * i).collect()),
                (count.max(2) as Lane)..=4,
            )
                .prop_map(move |(spans, requests, lanes)| Draft {
                    nodes,
                    spans,
                    lanes,
                    mode,
                    physics: physics.clone(),
                    k,
                    requests,
                })
        })
}

/// Every request has a candidate path and fits one lane on each of them.
pub fn servable(inst: &Instance) -> bool {
    inst.requests.iter().all(|r| {
        let paths = inst.candidates(r.id);
        !paths.is_empty() && paths.iter().all(|&p| inst.lane_capacity_gbps(p) >= r.gbps)
    })
}
