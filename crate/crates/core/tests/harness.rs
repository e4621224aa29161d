mod common;

use common::Draft;
use proptest::prelude::*;
use rscsa_core::harness::{write_aggregate_csv, write_raw_csv, write_series_csv};
use rscsa_core::*;
use statrs::distribution::{ChiSquared, ContinuousCDF, StudentsT};

fn ring(nodes: usize) -> Network {
    Draft {
        nodes,
        spans: (0..nodes).map(|v| (v, (v + 1) % nodes, 400.0)).collect(),
        lanes: 9,
        mode: LaneMode::Ninth,
        physics: Physics::standard(),
        k: 2,
        requests: Vec::new(),
    }
    .network()
}

/// Upper-tail p-value of Pearson's statistic for observed counts against
/// expected probabilities.
fn chi_square_p(observed: &[u64], probs: &[f64]) -> f64 {
    let n: u64 = observed.iter().sum();
    let stat: f64 = observed
        .iter()
        .zip(probs)
        .map(|(&o, &p)| {
            let e = p * n as f64;
            (o as f64 - e).powi(2) / e
        })
        .sum();
    let dist = ChiSquared::new((observed.len() - 1) as f64).unwrap();
    1.0 - dist.cdf(stat)
}

#[test]
fn traffic_volumes_follow_the_profile() {
    let profile = TrafficProfile::default();
    for seed in [1, 2, 3] {
        let reqs = generate_traffic(&ring(6), 10_000, &profile, seed).unwrap();
        let counts: Vec<u64> = profile
            .volumes_gbps
            .iter()
            .map(|&v| reqs.iter().filter(|r| r.gbps == v).count() as u64)
            .collect();
        assert_eq!(counts.iter().sum::<u64>(), 10_000);
        let p = chi_square_p(&counts, &profile.probabilities);
        assert!(p > 1e-3, "seed {seed}: counts {counts:?}, p = {p}");
    }
}

#[test]
fn traffic_pairs_are_uniform() {
    let n = 6;
    let reqs = generate_traffic(&ring(n), 10_000, &TrafficProfile::default(), 7).unwrap();
    let mut counts = vec![0u64; n * n];
    for r in &reqs {
        assert_ne!(r.src, r.dst);
        counts[r.src * n + r.dst] += 1;
    }
    let observed: Vec<u64> = (0..n * n).filter(|i| i / n != i % n).map(|i| counts[i]).collect();
    let probs = vec![1.0 / observed.len() as f64; observed.len()];
    let p = chi_square_p(&observed, &probs);
    assert!(p > 1e-3, "p = {p}");
}

#[test]
fn traffic_is_seeded() {
    let net = ring(5);
    let profile = TrafficProfile::default();
    let a = generate_traffic(&net, 50, &profile, 11).unwrap();
    assert_eq!(a, generate_traffic(&net, 50, &profile, 11).unwrap());
    assert_ne!(a, generate_traffic(&net, 50, &profile, 12).unwrap());
    assert!(a.iter().enumerate().all(|(i, r)| r.id == i));
}

#[test]
fn bad_traffic_profiles_are_rejected() {
    let net = ring(4);
    let bad = [
        TrafficProfile {
            volumes_gbps: vec![100, 200],
            probabilities: vec![1.0],
        },
        TrafficProfile {
            volumes_gbps: vec![],
            probabilities: vec![],
        },
        TrafficProfile {
            volumes_gbps: vec![0],
            probabilities: vec![1.0],
        },
        TrafficProfile {
            volumes_gbps: vec![100, 200],
            probabilities: vec![0.5, 0.6],
        },
        TrafficProfile {
            volumes_gbps: vec![100, 200],
            probabilities: vec![1.5, -0.5],
        },
    ];
    for p in bad {
        assert!(generate_traffic(&net, 3, &p, 0).is_err(), "{p:?}");
    }
}

proptest! {
    #[test]
    fn t_quantile_matches_reference(p in 0.001f64..0.999, df in 1u32..200) {
        let reference = StudentsT::new(0.0, 1.0, f64::from(df)).unwrap().inverse_cdf(p);
        let q = t_quantile(p, f64::from(df)).unwrap();
        prop_assert!((q - reference).abs() <= 1e-6 * (1.0 + reference.abs()), "{} vs {}", q, reference);
    }

    #[test]
    fn confidence_interval_matches_reference(
        xs in prop::collection::vec(-1e3f64..1e3, 2..60),
        level in prop::sample::select(vec![0.8, 0.9, 0.95, 0.99]),
    ) {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let sd = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        let t = StudentsT::new(0.0, 1.0, n - 1.0).unwrap().inverse_cdf(0.5 + level / 2.0);
        let (m, h) = mean_ci(&xs, level).unwrap();
        prop_assert!((m - mean).abs() < 1e-9);
        prop_assert!((h - t * sd / n.sqrt()).abs() < 1e-6 * (1.0 + h));
    }
}

fn small_plan(seed: u64) -> ExperimentPlan {
    ExperimentPlan {
        loads: vec![4, 8],
        matrices: 3,
        iterations: 20,
        seed,
        k: 2,
        ..ExperimentPlan::standard("ring6")
    }
}

fn csvs(res: &ExperimentResults) -> [Vec<u8>; 3] {
    let (mut raw, mut agg, mut series) = (Vec::new(), Vec::new(), Vec::new());
    write_raw_csv(&res.raw, &mut raw).unwrap();
    write_aggregate_csv(&res.aggregate, &mut agg).unwrap();
    write_series_csv(&res.aggregate, &mut series).unwrap();
    [raw, agg, series]
}

#[test]
fn experiments_are_reproducible() {
    let net = ring(6);
    let a = run_experiment(&small_plan(5), &net).unwrap();
    let b = run_experiment(&small_plan(5), &net).unwrap();
    assert_eq!(csvs(&a), csvs(&b));
    assert_eq!(a.raw.len(), 3 * 2 * 3);
    assert_eq!(a.aggregate.len(), 3 * 2);
    assert!(a.raw.iter().all(|r| r.error.is_empty()));
    let c = run_experiment(&small_plan(6), &net).unwrap();
    assert_ne!(csvs(&a)[0], csvs(&c)[0]);
}

#[test]
fn matrices_are_shared_across_profiles() {
    let res = run_experiment(&small_plan(5), &ring(6)).unwrap();
    for load in [4, 8] {
        for m in 0..3 {
            let cell: Vec<_> = res.raw.iter().filter(|r| r.load == load && r.matrix == m).collect();
            assert_eq!(cell.len(), 3);
            assert!(cell
                .iter()
                .all(|r| r.seed == cell[0].seed && r.total_gbps == cell[0].total_gbps));
        }
    }
    for s in &res.aggregate {
        let obj1: Vec<f64> = res
            .raw
            .iter()
            .filter(|r| r.profile == s.profile && r.load == s.load)
            .map(|r| f64::from(r.obj1))
            .collect();
        let (m, h) = mean_ci(&obj1, 0.95).unwrap();
        assert_eq!((s.obj1_mean, s.obj1_half_width), (m, Some(h)));
        assert_eq!(s.samples, 3);
    }
}

#[test]
fn invalid_plans_are_rejected() {
    let net = ring(4);
    let bad = [
        ExperimentPlan {
            loads: vec![],
            ..small_plan(1)
        },
        ExperimentPlan {
            profiles: vec![],
            ..small_plan(1)
        },
        ExperimentPlan {
            profiles: vec![LaneMode::Explicit],
            ..small_plan(1)
        },
        ExperimentPlan {
            matrices: 0,
            ..small_plan(1)
        },
        ExperimentPlan {
            iterations: 0,
            ..small_plan(1)
        },
        ExperimentPlan { k: 0, ..small_plan(1) },
        ExperimentPlan {
            confidence: 1.0,
            ..small_plan(1)
        },
    ];
    for p in bad {
        assert!(run_experiment(&p, &net).is_err(), "{p:?}");
    }
}
