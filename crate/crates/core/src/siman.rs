//! Simulated annealing over service sequences.

use std::cmp::Ordering;
use std::io::Write;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::heuristic::{plan_with, FailurePolicy, HeuristicError};
use crate::instance::{Instance, RequestId};
use crate::solution::Solution;

#[derive(Debug, Error)]
pub enum AnnealError {
    #[error("invalid annealing configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Heuristic(#[from] HeuristicError),
    #[error("trace export failed: {0}")]
    Csv(#[from] csv::Error),
    #[error("trace export failed: {0}")]
    Io(#[from] std::io::Error),
}

/// Lexicographic energy: unserved traffic first, then lanes used, switching
/// lanes used and occupied (link, lane) slots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
pub struct Energy {
    pub unserved_gbps: u64,
    pub obj1: u32,
    pub obj2: u32,
    pub tie_key: u64,
}

impl Energy {
    pub fn of(solution: &Solution) -> Self {
        Self {
            unserved_gbps: solution.unserved_gbps(),
            obj1: solution.objectives.obj1,
            obj2: solution.objectives.obj2,
            tie_key: solution.lane_link_usage,
        }
    }

    fn components(&self) -> [u64; 4] {
        [
            self.unserved_gbps,
            u64::from(self.obj1),
            u64::from(self.obj2),
            self.tie_key,
        ]
    }

    /// Signed difference `other - self` on the first component where they
    /// differ.
    pub fn delta_to(&self, other: &Energy) -> f64 {
        self.components()
            .iter()
            .zip(other.components())
            .find(|(a, b)| **a != *b)
            .map_or(0.0, |(&a, b)| b as f64 - a as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NeighborRule {
    /// Exchange two uniformly chosen positions.
    Swap,
    /// Remove one request and reinsert it at another position.
    Reinsert,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialTemperature {
    /// Mean absolute energy change over this many random neighbors of the
    /// initial sequence (1.0 when every sample ties).
    Sampled(usize),
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnealConfig {
    pub iterations: usize,
    pub initial_temperature: InitialTemperature,
    pub cooling: f64,
    pub neighbor: NeighborRule,
    pub seed: u64,
    /// Independent chains, seeded `seed`, `seed + 1`, ...
    pub restarts: usize,
    pub policy: FailurePolicy,
}

impl Default for AnnealConfig {
    fn default() -> Self {
        Self {
            iterations: 1000,
            initial_temperature: InitialTemperature::Sampled(20),
            cooling: 0.95,
            neighbor: NeighborRule::Swap,
            seed: 0,
            restarts: 1,
            policy: FailurePolicy::default(),
        }
    }
}

impl AnnealConfig {
    pub fn validate(&self) -> Result<(), AnnealError> {
        if self.iterations == 0 {
            return Err(AnnealError::InvalidConfig("iterations must be at least 1".into()));
        }
        if !(self.cooling > 0.0 && self.cooling < 1.0) {
            return Err(AnnealError::InvalidConfig(format!(
                "cooling factor {} outside (0, 1)",
                self.cooling
            )));
        }
        if self.restarts == 0 {
            return Err(AnnealError::InvalidConfig("restarts must be at least 1".into()));
        }
        match self.initial_temperature {
            InitialTemperature::Fixed(t) if !(t > 0.0 && t.is_finite()) => Err(AnnealError::InvalidConfig(format!(
                "initial temperature {t} must be positive"
            ))),
            InitialTemperature::Sampled(0) => Err(AnnealError::InvalidConfig("zero temperature samples".into())),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub temperature: f64,
    pub candidate: Energy,
    pub accepted: bool,
    pub best: Energy,
    pub sequence: Vec<RequestId>,
}

#[derive(Debug, Clone)]
pub struct ChainResult {
    pub seed: u64,
    pub energy: Energy,
    pub sequence: Vec<RequestId>,
    pub solution: Solution,
    pub trace: Vec<TraceRow>,
}

#[derive(Debug, Clone)]
pub struct AnnealOutcome {
    pub solution: Solution,
    pub sequence: Vec<RequestId>,
    pub energy: Energy,
    /// Seed of the winning chain.
    pub seed: u64,
    /// Trace of the winning chain.
    pub trace: Vec<TraceRow>,
    /// Final (seed, energy) of every chain.
    pub chains: Vec<(u64, Energy)>,
}

fn neighbor(seq: &[RequestId], rule: NeighborRule, rng: &mut ChaCha8Rng) -> Vec<RequestId> {
    let mut out = seq.to_vec();
    let n = out.len();
    if n < 2 {
        return out;
    }
    let i = rng.random_range(0..n);
    let mut j = rng.random_range(0..n - 1);
    if j >= i {
        j += 1;
    }
    match rule {
        NeighborRule::Swap => out.swap(i, j),
        NeighborRule::Reinsert => {
            let r = out.remove(i);
            out.insert(j, r);
        }
    }
    out
}

/// Runs one annealing chain.
pub fn run_chain(inst: &Instance, config: &AnnealConfig, seed: u64) -> Result<ChainResult, AnnealError> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let eval = |seq: &[RequestId]| -> Result<(Energy, Solution), AnnealError> {
        let sol = plan_with(inst, seq, config.policy)?;
        Ok((Energy::of(&sol), sol))
    };
    let mut current = inst.descending_volume_order();
    let (mut e_cur, sol) = eval(&current)?;
    let mut best = (e_cur, current.clone(), sol);

    let t0 = match config.initial_temperature {
        InitialTemperature::Fixed(t) => t,
        InitialTemperature::Sampled(samples) => {
            let mut sum = 0.0;
            if current.len() >= 2 {
                for _ in 0..samples {
                    let cand = neighbor(&current, config.neighbor, &mut rng);
                    sum += e_cur.delta_to(&eval(&cand)?.0).abs();
                }
            }
            let mean = sum / samples as f64;
            if mean > 0.0 {
                mean
            } else {
                1.0
            }
        }
    };

    let mut trace = vec![TraceRow {
        iteration: 0,
        temperature: t0,
        candidate: e_cur,
        accepted: true,
        best: e_cur,
        sequence: current.clone(),
    }];
    if current.len() >= 2 {
        let mut temperature = t0;
        for iteration in 1..config.iterations {
            temperature *= config.cooling;
            let cand = neighbor(&current, config.neighbor, &mut rng);
            let (e, sol) = eval(&cand)?;
            let delta = e_cur.delta_to(&e);
            let accepted = delta <= 0.0 || rng.random::<f64>() < (-delta / temperature).exp();
            if e < best.0 {
                best = (e, cand.clone(), sol);
            }
            trace.push(TraceRow {
                iteration,
                temperature,
                candidate: e,
                accepted,
                best: best.0,
                sequence: cand.clone(),
            });
            if accepted {
                current = cand;
                e_cur = e;
            }
        }
    }
    let (energy, sequence, solution) = best;
    Ok(ChainResult {
        seed,
        energy,
        sequence,
        solution,
        trace,
    })
}

/// Searches for a service sequence minimizing the energy of the planned
/// solution. Chains run in parallel; the lowest energy wins, ties going to
/// the lowest seed.
pub fn optimize_sequence(inst: &Instance, config: &AnnealConfig) -> Result<AnnealOutcome, AnnealError> {
    config.validate()?;
    let seeds: Vec<u64> = (0..config.restarts as u64)
        .map(|i| config.seed.wrapping_add(i))
        .collect();
    let chains = seeds
        .par_iter()
        .map(|&s| run_chain(inst, config, s))
        .collect::<Result<Vec<_>, _>>()?;
    let summary = chains.iter().map(|c| (c.seed, c.energy)).collect();
    let win = chains
        .into_iter()
        .min_by(|a, b| match a.energy.cmp(&b.energy) {
            Ordering::Equal => a.seed.cmp(&b.seed),
            o => o,
        })
        .expect("at least one chain");
    Ok(AnnealOutcome {
        solution: win.solution,
        sequence: win.sequence,
        energy: win.energy,
        seed: win.seed,
        trace: win.trace,
        chains: summary,
    })
}

/// Shuffled copy of the request ids, for random-sequence baselines.
pub fn random_sequence(inst: &Instance, seed: u64) -> Vec<RequestId> {
    let mut seq: Vec<RequestId> = (0..inst.requests.len()).collect();
    seq.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    seq
}

pub fn write_trace_csv<W: Write>(trace: &[TraceRow], out: W) -> Result<(), AnnealError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "iteration",
        "temperature",
        "candidate_unserved_gbps",
        "candidate_obj1",
        "candidate_obj2",
        "candidate_tie_key",
        "accepted",
        "best_unserved_gbps",
        "best_obj1",
        "best_obj2",
        "best_tie_key",
    ])?;
    for row in trace {
        let c = row.candidate;
        let b = row.best;
        w.write_record([
            row.iteration.to_string(),
            format!("{:.6}", row.temperature),
            c.unserved_gbps.to_string(),
            c.obj1.to_string(),
            c.obj2.to_string(),
            c.tie_key.to_string(),
            row.accepted.to_string(),
            b.unserved_gbps.to_string(),
            b.obj1.to_string(),
            b.obj2.to_string(),
            b.tie_key.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
