use microlp::{ComparisonOp, OptimizationDirection, Problem, SolveOutcome};

use crate::instance::Instance;

/// Lanes forced on the busiest link: every request whose candidates all
/// cross a link contributes its smallest spectrum need there.
pub fn weak_lower_bound(inst: &Instance) -> u32 {
    let grid = inst.physics.grid;
    let mut forced = vec![0u64; inst.network.link_count()];
    for r in &inst.requests {
        let cands = inst.candidates(r.id);
        let Some((&first, rest)) = cands.split_first() else {
            continue;
        };
        let need = cands
            .iter()
            .map(|&p| u64::from(grid.fs_required(inst.ocs_for(p, r.gbps))))
            .min()
            .unwrap_or(0);
        for &e in inst.path(first).links() {
            if rest.iter().all(|&p| inst.path(p).links().contains(&e)) {
                forced[e] += need;
            }
        }
    }
    let lane = u64::from(grid.fs_per_lane);
    forced.iter().map(|&f| f.div_ceil(lane)).max().unwrap_or(0) as u32
}

/// Lanes needed by the best fractional routing over candidate paths, with
/// spectrum treated as a fluid: `ceil` of the minimum link congestion.
pub fn congestion_lower_bound(inst: &Instance) -> u32 {
    let grid = inst.physics.grid;
    let fmax = f64::from(grid.fs_per_lane);
    let mut pb = Problem::new(OptimizationDirection::Minimize);
    let lanes = pb.add_var(1.0, (0.0, f64::INFINITY));
    let mut link_terms: Vec<Vec<(microlp::Variable, f64)>> = vec![Vec::new(); inst.network.link_count()];
    let mut any = false;
    for r in &inst.requests {
        let cands = inst.candidates(r.id);
        if cands.is_empty() || r.gbps == 0 {
            continue;
        }
        any = true;
        let mut share = Vec::new();
        for &p in cands {
            let rp = inst.path(p);
            let v = pb.add_var(0.0, (0.0, 1.0));
            share.push((v, 1.0));
            let load = r.gbps as f64 * f64::from(grid.fs_per_oc) / rp.gbps_per_oc as f64 / fmax;
            for &e in rp.links() {
                link_terms[e].push((v, load));
            }
        }
        pb.add_constraint(share, ComparisonOp::Eq, 1.0);
    }
    if !any {
        return 0;
    }
    for mut terms in link_terms.into_iter().filter(|t| !t.is_empty()) {
        terms.push((lanes, -1.0));
        pb.add_constraint(terms, ComparisonOp::Le, 0.0);
    }
    match pb.solve() {
        Ok(SolveOutcome::Solution(sol)) => (sol.objective() - 1e-6).ceil().max(0.0) as u32,
        _ => 0,
    }
}
