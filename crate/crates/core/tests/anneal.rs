mod common;

use common::planning_draft;
use proptest::prelude::*;
use rscsa_core::siman::{run_chain, write_trace_csv};
use rscsa_core::*;

fn config(iterations: usize, seed: u64, neighbor: NeighborRule) -> AnnealConfig {
    AnnealConfig {
        iterations,
        neighbor,
        seed,
        ..AnnealConfig::default()
    }
}

fn neighbor_rule() -> impl Strategy<Value = NeighborRule> {
    prop_oneof![Just(NeighborRule::Swap), Just(NeighborRule::Reinsert)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn best_energy_never_rises(d in planning_draft(), seed in any::<u64>(), rule in neighbor_rule()) {
        let inst = d.build();
        let chain = run_chain(&inst, &config(40, seed, rule), seed).unwrap();
        prop_assert!(chain.trace.windows(2).all(|w| w[1].best <= w[0].best));
        for row in &chain.trace {
            prop_assert!(row.best <= row.candidate);
        }
        prop_assert_eq!(chain.trace.last().unwrap().best, chain.energy);
        let start = Energy::of(&plan(&inst, &inst.descending_volume_order()).unwrap());
        prop_assert!(chain.energy <= start);
    }

    #[test]
    fn fixed_seed_repeats_the_run(d in planning_draft(), seed in any::<u64>(), rule in neighbor_rule()) {
        let inst = d.build();
        let cfg = AnnealConfig { restarts: 2, ..config(30, seed, rule) };
        let a = optimize_sequence(&inst, &cfg).unwrap();
        let b = optimize_sequence(&inst, &cfg).unwrap();
        prop_assert_eq!(&a.trace, &b.trace);
        prop_assert_eq!(&a.sequence, &b.sequence);
        prop_assert_eq!(&a.chains, &b.chains);
        prop_assert_eq!(a.solution.to_json(), b.solution.to_json());
    }

    #[test]
    fn winning_sequence_is_a_permutation_with_matching_energy(d in planning_draft(), seed in any::<u64>()) {
        let inst = d.build();
        let out = optimize_sequence(&inst, &config(30, seed, NeighborRule::Swap)).unwrap();
        let mut seq = out.sequence.clone();
        seq.sort_unstable();
        prop_assert_eq!(seq, (0..inst.requests.len()).collect::<Vec<_>>());
        for row in &out.trace {
            prop_assert_eq!(row.sequence.len(), inst.requests.len());
        }
        let replanned = plan(&inst, &out.sequence).unwrap();
        prop_assert_eq!(Energy::of(&replanned), out.energy);
        prop_assert_eq!(Energy::of(&out.solution), out.energy);
        let best_chain = out.chains.iter().map(|c| c.1).min().unwrap();
        prop_assert_eq!(best_chain, out.energy);
    }
}

#[test]
fn rejects_bad_configs() {
    let bad = [
        AnnealConfig {
            iterations: 0,
            ..AnnealConfig::default()
        },
        AnnealConfig {
            cooling: 1.0,
            ..AnnealConfig::default()
        },
        AnnealConfig {
            cooling: 0.0,
            ..AnnealConfig::default()
        },
        AnnealConfig {
            restarts: 0,
            ..AnnealConfig::default()
        },
        AnnealConfig {
            initial_temperature: InitialTemperature::Fixed(-1.0),
            ..AnnealConfig::default()
        },
        AnnealConfig {
            initial_temperature: InitialTemperature::Sampled(0),
            ..AnnealConfig::default()
        },
    ];
    for cfg in bad {
        assert!(matches!(cfg.validate(), Err(AnnealError::InvalidConfig(_))), "{cfg:?}");
    }
}

#[test]
fn trace_csv_has_one_row_per_iteration() {
    let d = common::Draft {
        nodes: 4,
        spans: vec![(0, 1, 500.0), (1, 2, 500.0), (2, 3, 500.0), (3, 0, 500.0)],
        lanes: 4,
        mode: LaneMode::Ninth,
        physics: Physics::simplified(),
        k: 2,
        requests: vec![(0, 2, 4000), (1, 3, 10000), (2, 0, 1000), (3, 1, 4000)],
    };
    let inst = d.build();
    let chain = run_chain(&inst, &config(25, 3, NeighborRule::Swap), 3).unwrap();
    assert_eq!(chain.trace.len(), 25);
    let mut buf = Vec::new();
    write_trace_csv(&chain.trace, &mut buf).unwrap();
    let mut rd = csv::Reader::from_reader(buf.as_slice());
    assert_eq!(rd.records().count(), 25);
}
