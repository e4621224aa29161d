mod common;

use common::{planning_draft, Draft};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rscsa_core::heuristic::run_phases;
use rscsa_core::ilp::{validate_solution, ViolationClass};
use rscsa_core::*;

fn shuffled(n: usize, seed: u64) -> Vec<RequestId> {
    let mut seq: Vec<RequestId> = (0..n).collect();
    seq.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    seq
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn plans_pass_the_audit(d in planning_draft(), seed in any::<u64>()) {
        let inst = d.build();
        let sol = plan(&inst, &shuffled(inst.requests.len(), seed)).unwrap();
        let audit = validate_solution(&inst, &sol);
        // Only unserved demand may show up, and exactly for the unserved requests.
        let mut short: Vec<RequestId> = audit
            .violations
            .iter()
            .map(|v| {
                prop_assert_eq!(v.class, ViolationClass::DemandShortfall, "{}", audit);
                Ok(v.requests[0])
            })
            .collect::<Result<_, TestCaseError>>()?;
        short.sort_unstable();
        let unserved: Vec<RequestId> = sol.unserved.iter().map(|e| e.request).collect();
        prop_assert_eq!(short, unserved);
        for e in &sol.unserved {
            let a = &sol.assignments[e.request];
            let carried: u64 = a.channels.iter().map(|c| {
                let nodes: Vec<usize> = c.path.iter().map(|n| inst.network.node_id(n).unwrap()).collect();
                let p = inst.find_candidate(e.request, &nodes).unwrap();
                u64::from(c.ocs) * inst.path(p).gbps_per_oc
            }).sum();
            prop_assert!(e.remaining_gbps > 0 && carried < a.gbps);
            prop_assert!(carried + e.remaining_gbps >= a.gbps);
        }
    }

    #[test]
    fn journal_replay_reproduces_state(d in planning_draft(), seed in any::<u64>()) {
        let inst = d.build();
        let (state, _, _) = run_phases(&inst, &shuffled(inst.requests.len(), seed), FailurePolicy::default()).unwrap();
        let again = AllocationState::replay(&inst, state.journal()).unwrap();
        prop_assert_eq!(state.channels(), again.channels());
        prop_assert_eq!(state.schs(), again.schs());
        prop_assert_eq!(state.table2(), again.table2());
        prop_assert_eq!(state.table3(), again.table3());
        prop_assert_eq!(state.objectives(), again.objectives());
        prop_assert_eq!(state.lane_link_usage(), again.lane_link_usage());
    }

    #[test]
    fn unserved_volume_shrinks_across_phases(d in planning_draft(), seed in any::<u64>()) {
        let inst = d.build();
        let sol = plan(&inst, &shuffled(inst.requests.len(), seed)).unwrap();
        let g = sol.diagnostics.unwrap();
        prop_assert!(g.unserved_gbps_after_assignment >= g.unserved_gbps_after_reassignment);
        prop_assert!(g.unserved_gbps_after_reassignment >= g.unserved_gbps_after_sharing);
        prop_assert_eq!(g.unserved_gbps_after_sharing, sol.unserved_gbps());
        if inst.profile.mode() == LaneMode::None {
            prop_assert_eq!(sol.objectives.obj2, 0);
        }
    }

    #[test]
    fn first_phase_places_no_shared_blocks(d in planning_draft(), seed in any::<u64>()) {
        let inst = d.build();
        let mut state = AllocationState::new(&inst);
        rscsa_core::heuristic::algorithm1(&mut state, &shuffled(inst.requests.len(), seed));
        for sch in state.schs() {
            prop_assert!(sch.kind != SchKind::TypeIII, "{:?}", sch);
        }
    }

    #[test]
    fn planning_is_deterministic(d in planning_draft(), seed in any::<u64>()) {
        let inst = d.build();
        let seq = shuffled(inst.requests.len(), seed);
        let a = plan(&inst, &seq).unwrap().to_json();
        let b = plan(&d.build(), &seq).unwrap().to_json();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn candidate_paths_are_sorted_and_loopless(d in planning_draft()) {
        let inst = d.build();
        for pair in inst.pairs().values() {
            let lens: Vec<f64> = pair.paths.iter().map(|&p| inst.path(p).path.length_km).collect();
            prop_assert!(lens.windows(2).all(|w| w[0] <= w[1]), "{:?}", lens);
            for &p in &pair.paths {
                let nodes = &inst.path(p).path.nodes;
                let mut seen = nodes.clone();
                seen.sort_unstable();
                seen.dedup();
                prop_assert_eq!(seen.len(), nodes.len());
                let total: f64 = inst.path(p).links().iter().map(|&l| inst.network.link(l).length_km).sum();
                prop_assert!((total - inst.path(p).path.length_km).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn exported_solutions_round_trip(d in planning_draft()) {
        let inst = d.build();
        let sol = plan(&inst, &inst.descending_volume_order()).unwrap();
        let back = Solution::from_json(&sol.to_json()).unwrap();
        prop_assert_eq!(&back, &sol);
        prop_assert!(validate_solution(&inst, &back).count(ViolationClass::SpectrumOverlap) == 0);
    }
}

#[test]
fn switching_channels_keep_carrier_arithmetic() {
    let draft = Draft {
        nodes: 4,
        spans: vec![(0, 1, 800.0), (1, 2, 900.0), (2, 3, 700.0), (0, 3, 1500.0)],
        lanes: 3,
        mode: LaneMode::Full,
        physics: Physics::standard(),
        k: 2,
        requests: (0..12)
            .map(|i| (i % 4, (i + 1 + i / 4) % 4, [1000, 4000, 10000][i % 3]))
            .filter(|r| r.0 != r.1)
            .collect(),
    };
    let inst = draft.build();
    let sol = plan(&inst, &inst.descending_volume_order()).unwrap();
    let f_oc = inst.physics.grid.fs_per_oc;
    for a in &sol.assignments {
        for c in &a.channels {
            assert!(c.ocs >= 1);
            assert_eq!(c.fs_end, c.fs_start + f_oc * c.ocs - 1);
        }
    }
}
