use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::instance::{Instance, PathId, RequestId};
use crate::solution::Solution;
use crate::topology::Lane;

/// Which objective the emitted model minimizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelPhase {
    /// Total lanes used.
    Main,
    /// Switching lanes used, with total lanes capped at `obj1_bound`.
    Minor { obj1_bound: u32 },
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum WarmStartError {
    #[error("request {0}: channel path is not a candidate")]
    UnknownPath(RequestId),
    #[error("request {request}: channels on lane {lane} of one path are not contiguous")]
    NotContiguous { request: RequestId, lane: Lane },
}

/// One (request, candidate path, lane) triple.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct LightpathVar {
    pub request: RequestId,
    /// 1-based position in the request's candidate list.
    pub rank: usize,
    pub path: PathId,
    pub lane: Lane,
}

/// Index sets of the model.
#[derive(Debug, Clone)]
pub struct VariableSpace {
    pub lanes: Vec<Lane>,
    pub lightpaths: Vec<LightpathVar>,
    /// Lightpaths on switching lanes (carry start/end indices).
    pub switching: Vec<usize>,
    /// Ordered pairs of lightpath indices on the same switching lane whose
    /// paths share a link.
    pub orderings: Vec<(usize, usize)>,
}

impl VariableSpace {
    pub fn new(inst: &Instance) -> Self {
        let lanes: Vec<Lane> = inst.profile.all().collect();
        let mut lightpaths = Vec::new();
        for r in &inst.requests {
            for (i, &p) in inst.candidates(r.id).iter().enumerate() {
                for &l in &lanes {
                    lightpaths.push(LightpathVar {
                        request: r.id,
                        rank: i + 1,
                        path: p,
                        lane: l,
                    });
                }
            }
        }
        let switching: Vec<usize> = (0..lightpaths.len())
            .filter(|&i| inst.profile.is_switching(lightpaths[i].lane))
            .collect();
        let mut orderings = Vec::new();
        for &i in &switching {
            for &j in &switching {
                let (a, b) = (&lightpaths[i], &lightpaths[j]);
                if i != j
                    && a.lane == b.lane
                    && (a.request, a.path) != (b.request, b.path)
                    && inst.path(a.path).path.shares_link(&inst.path(b.path).path)
                {
                    orderings.push((i, j));
                }
            }
        }
        Self {
            lanes,
            lightpaths,
            switching,
            orderings,
        }
    }

    pub fn x(&self, i: usize) -> String {
        let v = &self.lightpaths[i];
        format!("x_{}_{}_{}", v.request, v.rank, v.lane)
    }

    pub fn o(&self, i: usize) -> String {
        let v = &self.lightpaths[i];
        format!("o_{}_{}_{}", v.request, v.rank, v.lane)
    }

    pub fn alpha(&self, i: usize) -> String {
        let v = &self.lightpaths[i];
        format!("a_{}_{}_{}", v.request, v.rank, v.lane)
    }

    pub fn beta(&self, i: usize) -> String {
        let v = &self.lightpaths[i];
        format!("b_{}_{}_{}", v.request, v.rank, v.lane)
    }

    pub fn theta(&self, i: usize, j: usize) -> String {
        let (a, b) = (&self.lightpaths[i], &self.lightpaths[j]);
        format!("t_{}_{}_{}_{}_{}", a.request, a.rank, b.request, b.rank, a.lane)
    }
}

fn u(l: Lane) -> String {
    format!("u_{l}")
}

/// Writes `name: terms op rhs`, wrapping long sums.
fn row(out: &mut String, name: &str, terms: &[(i64, String)], op: &str, rhs: i64) {
    expr(out, name, terms);
    let _ = writeln!(out, " {op} {rhs}");
}

fn objective(out: &mut String, terms: &[(i64, String)]) {
    out.push_str("Minimize\n");
    expr(out, "obj", terms);
    out.push('\n');
}

fn expr(out: &mut String, name: &str, terms: &[(i64, String)]) {
    let _ = write!(out, " {name}:");
    if terms.is_empty() {
        out.push_str(" 0 u_1");
    }
    for (n, (c, v)) in terms.iter().enumerate() {
        if n > 0 && n % 8 == 0 {
            out.push_str("\n   ");
        }
        let sign = if *c < 0 { "-" } else { "+" };
        let mag = c.unsigned_abs();
        if n == 0 && *c >= 0 {
            if mag == 1 {
                let _ = write!(out, " {v}");
            } else {
                let _ = write!(out, " {mag} {v}");
            }
        } else if mag == 1 {
            let _ = write!(out, " {sign} {v}");
        } else {
            let _ = write!(out, " {sign} {mag} {v}");
        }
    }
}

fn header(out: &mut String, inst: &Instance, title: &str) {
    let _ = writeln!(out, "\\ {title}");
    let _ = writeln!(
        out,
        "\\ nodes {} links {} lanes {} switching {} requests {} k {}",
        inst.network.node_count(),
        inst.network.link_count(),
        inst.profile.lanes(),
        inst.profile.switching_count(),
        inst.requests.len(),
        inst.k
    );
}

fn capacity_rows(out: &mut String, inst: &Instance, vs: &VariableSpace) {
    let grid = inst.physics.grid;
    let mut by_link_lane: BTreeMap<(usize, Lane), Vec<usize>> = BTreeMap::new();
    for (i, v) in vs.lightpaths.iter().enumerate() {
        for &e in inst.path(v.path).links() {
            by_link_lane.entry((e, v.lane)).or_default().push(i);
        }
    }
    for e in 0..inst.network.link_count() {
        for &l in &vs.lanes {
            let Some(list) = by_link_lane.get(&(e, l)) else {
                continue;
            };
            let mut terms: Vec<(i64, String)> = list.iter().map(|&i| (grid.fs_per_oc as i64, vs.o(i))).collect();
            terms.push((-(grid.fs_per_lane as i64), u(l)));
            row(out, &format!("fs_cap_e{e}_l{l}"), &terms, "<=", 0);
        }
    }
}

fn demand_rows(out: &mut String, inst: &Instance, vs: &VariableSpace) {
    for r in &inst.requests {
        let terms: Vec<(i64, String)> = vs
            .lightpaths
            .iter()
            .enumerate()
            .filter(|(_, v)| v.request == r.id)
            .map(|(i, v)| (inst.path(v.path).gbps_per_oc as i64, vs.o(i)))
            .collect();
        row(out, &format!("demand_r{}", r.id), &terms, ">=", r.gbps as i64);
    }
}

fn wrap_list(out: &mut String, names: impl IntoIterator<Item = String>) {
    for (n, v) in names.into_iter().enumerate() {
        if n % 10 == 0 {
            out.push_str("\n ");
        }
        let _ = write!(out, " {v}");
    }
    out.push('\n');
}

/// Full lexicographic model in LP format for the requested phase.
pub fn emit_full_model(inst: &Instance, phase: ModelPhase) -> String {
    let vs = VariableSpace::new(inst);
    let grid = inst.physics.grid;
    let f_max = grid.fs_per_lane as i64;
    let f_idx = grid.max_index() as i64;
    let f_oc = grid.fs_per_oc as i64;
    let f_gb = grid.guard_fs as i64;
    let mut out = String::new();
    header(&mut out, inst, "spatial channel planning model");

    let terms: Vec<(i64, String)> = match phase {
        ModelPhase::Main => vs.lanes.iter().map(|&l| (1, u(l))).collect(),
        ModelPhase::Minor { .. } => inst.profile.lw().map(|l| (1, u(l))).collect(),
    };
    objective(&mut out, &terms);

    out.push_str("Subject To\n");
    demand_rows(&mut out, inst, &vs);
    for (i, v) in vs.lightpaths.iter().enumerate() {
        if !inst.profile.is_switching(v.lane) {
            row(
                &mut out,
                &format!("link_{}", &vs.x(i)[2..]),
                &[(f_max, vs.x(i)), (-f_oc, vs.o(i))],
                ">=",
                0,
            );
        }
    }
    for &i in &vs.switching {
        let tag = &vs.x(i)[2..];
        row(
            &mut out,
            &format!("span_{tag}"),
            &[(1, vs.beta(i)), (-1, vs.alpha(i)), (-f_oc, vs.o(i)), (1, vs.x(i))],
            "=",
            0,
        );
        row(
            &mut out,
            &format!("grid_{tag}"),
            &[(f_idx, vs.x(i)), (-1, vs.beta(i))],
            ">=",
            0,
        );
    }
    let big = (inst.requests.len() * inst.k) as i64;
    for &l in &vs.lanes {
        let mut terms = vec![(big, u(l))];
        terms.extend(
            vs.lightpaths
                .iter()
                .enumerate()
                .filter(|(_, v)| v.lane == l)
                .map(|(i, _)| (-1, vs.x(i))),
        );
        row(&mut out, &format!("lane_use_l{l}"), &terms, ">=", 0);
    }
    for (i, a) in vs.lightpaths.iter().enumerate() {
        if inst.profile.is_switching(a.lane) {
            continue;
        }
        for (j, b) in vs.lightpaths.iter().enumerate() {
            if b.lane != a.lane || a.path == b.path {
                continue;
            }
            if !inst.path(a.path).path.shares_link(&inst.path(b.path).path) {
                continue;
            }
            row(
                &mut out,
                &format!("excl_{}_{}_{}_{}_{}", a.request, a.rank, b.request, b.rank, a.lane),
                &[(f_max, vs.x(i)), (f_oc, vs.o(j))],
                "<=",
                f_max,
            );
        }
    }
    for (np, entry) in inst.pairs() {
        for (rank, &p) in entry.paths.iter().enumerate() {
            for l in inst.profile.lnw() {
                let terms: Vec<(i64, String)> = vs
                    .lightpaths
                    .iter()
                    .enumerate()
                    .filter(|(_, v)| v.path == p && v.lane == l)
                    .map(|(i, _)| (f_oc, vs.o(i)))
                    .collect();
                if terms.is_empty() {
                    continue;
                }
                row(
                    &mut out,
                    &format!("sch_cap_{}_{}_{}_{}", np.src, np.dst, rank + 1, l),
                    &terms,
                    "<=",
                    f_max,
                );
            }
        }
    }
    for &(i, j) in &vs.orderings {
        if i < j {
            row(
                &mut out,
                &format!("order_{}", &vs.theta(i, j)[2..]),
                &[(1, vs.theta(i, j)), (1, vs.theta(j, i))],
                "=",
                1,
            );
        }
        let (a, b) = (&vs.lightpaths[i], &vs.lightpaths[j]);
        if a.path == b.path {
            row(
                &mut out,
                &format!("abut_{}", &vs.theta(i, j)[2..]),
                &[
                    (1, vs.alpha(j)),
                    (-f_max, vs.theta(i, j)),
                    (-1, vs.beta(i)),
                    (-1, vs.x(i)),
                ],
                ">=",
                -f_max,
            );
        } else {
            row(
                &mut out,
                &format!("guard_{}", &vs.theta(i, j)[2..]),
                &[
                    (1, vs.alpha(j)),
                    (-(f_max + f_gb), vs.theta(i, j)),
                    (-1, vs.beta(i)),
                    (-(f_gb + 1), vs.x(i)),
                ],
                ">=",
                -(f_max + f_gb),
            );
        }
    }
    capacity_rows(&mut out, inst, &vs);
    if let ModelPhase::Minor { obj1_bound } = phase {
        let terms: Vec<(i64, String)> = vs.lanes.iter().map(|&l| (1, u(l))).collect();
        row(&mut out, "lane_total_cap", &terms, "<=", obj1_bound as i64);
    }

    out.push_str("Bounds\n");
    let max_ocs = grid.ocs_per_lane();
    for i in 0..vs.lightpaths.len() {
        let _ = writeln!(out, " 0 <= {} <= {max_ocs}", vs.o(i));
    }
    for &i in &vs.switching {
        let _ = writeln!(out, " 0 <= {} <= {f_idx}", vs.alpha(i));
        let _ = writeln!(out, " 0 <= {} <= {f_idx}", vs.beta(i));
    }

    out.push_str("Binaries");
    let mut bins: Vec<String> = vs.lanes.iter().map(|&l| u(l)).collect();
    bins.extend((0..vs.lightpaths.len()).map(|i| vs.x(i)));
    bins.extend(vs.orderings.iter().map(|&(i, j)| vs.theta(i, j)));
    wrap_list(&mut out, bins);
    out.push_str("Generals");
    let mut ints: Vec<String> = (0..vs.lightpaths.len()).map(|i| vs.o(i)).collect();
    for &i in &vs.switching {
        ints.push(vs.alpha(i));
        ints.push(vs.beta(i));
    }
    wrap_list(&mut out, ints);
    out.push_str("End\n");
    out
}

/// Relaxed lower-bound model: lane indicators, carrier counts, demand and
/// per-(link, lane) spectrum capacity only.
pub fn emit_relaxed_lb_model(inst: &Instance) -> String {
    let vs = VariableSpace::new(inst);
    let mut out = String::new();
    header(&mut out, inst, "relaxed lane-count lower bound");
    let terms: Vec<(i64, String)> = vs.lanes.iter().map(|&l| (1, u(l))).collect();
    objective(&mut out, &terms);
    out.push_str("Subject To\n");
    demand_rows(&mut out, inst, &vs);
    capacity_rows(&mut out, inst, &vs);
    if inst.requests.is_empty() {
        row(&mut out, "empty", &[(1, u(1))], ">=", 0);
    }
    out.push_str("Bounds\n");
    let max_ocs = inst.physics.grid.ocs_per_lane();
    for i in 0..vs.lightpaths.len() {
        let _ = writeln!(out, " 0 <= {} <= {max_ocs}", vs.o(i));
    }
    out.push_str("Binaries");
    wrap_list(&mut out, vs.lanes.iter().map(|&l| u(l)));
    out.push_str("Generals");
    wrap_list(&mut out, (0..vs.lightpaths.len()).map(|i| vs.o(i)));
    out.push_str("End\n");
    out
}

/// `name=value` assignment of every full-model variable, derived from a
/// solution. Channels of one request sharing a (path, lane) are merged.
pub fn warm_start(inst: &Instance, solution: &Solution) -> Result<String, WarmStartError> {
    let vs = VariableSpace::new(inst);
    let mut index: BTreeMap<(RequestId, PathId, Lane), usize> = BTreeMap::new();
    for (i, v) in vs.lightpaths.iter().enumerate() {
        index.insert((v.request, v.path, v.lane), i);
    }
    let n = vs.lightpaths.len();
    let mut ocs = vec![0u32; n];
    let mut spans: Vec<Vec<(u32, u32)>> = vec![Vec::new(); n];
    for a in &solution.assignments {
        for ch in &a.channels {
            let nodes: Option<Vec<usize>> = ch.path.iter().map(|s| inst.network.node_id(s)).collect();
            let path = nodes
                .and_then(|nodes| inst.find_candidate(a.request, &nodes))
                .ok_or(WarmStartError::UnknownPath(a.request))?;
            let i = *index
                .get(&(a.request, path, ch.lane))
                .ok_or(WarmStartError::UnknownPath(a.request))?;
            ocs[i] += ch.ocs;
            spans[i].push((ch.fs_start, ch.fs_end));
        }
    }
    let mut alpha = vec![0u32; n];
    let mut beta = vec![0u32; n];
    for i in 0..n {
        let s = &mut spans[i];
        if s.is_empty() {
            continue;
        }
        s.sort_unstable();
        if inst.profile.is_switching(vs.lightpaths[i].lane) && s.windows(2).any(|w| w[1].0 != w[0].1 + 1) {
            return Err(WarmStartError::NotContiguous {
                request: vs.lightpaths[i].request,
                lane: vs.lightpaths[i].lane,
            });
        }
        alpha[i] = s[0].0;
        beta[i] = s.last().expect("non-empty").1;
    }
    let used = |i: usize| ocs[i] > 0;

    let mut out = String::new();
    for &l in &vs.lanes {
        let on = vs.lightpaths.iter().enumerate().any(|(i, v)| v.lane == l && used(i));
        let _ = writeln!(out, "{}={}", u(l), u8::from(on));
    }
    for i in 0..n {
        let _ = writeln!(out, "{}={}", vs.x(i), u8::from(used(i)));
    }
    for (i, count) in ocs.iter().enumerate() {
        let _ = writeln!(out, "{}={}", vs.o(i), count);
    }
    for &i in &vs.switching {
        let _ = writeln!(out, "{}={}", vs.alpha(i), alpha[i]);
        let _ = writeln!(out, "{}={}", vs.beta(i), beta[i]);
    }
    for &(i, j) in &vs.orderings {
        let before = match (used(i), used(j)) {
            (true, true) => beta[i] < alpha[j],
            (true, false) => false,
            (false, true) => true,
            (false, false) => i < j,
        };
        let _ = writeln!(out, "{}={}", vs.theta(i, j), u8::from(before));
    }
    Ok(out)
}
