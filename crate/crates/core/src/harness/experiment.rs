use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::stats::mean_ci;
use super::traffic::{generate_traffic, TrafficError, TrafficProfile};
use crate::heuristic::PhysicsProfile;
use crate::instance::Instance;
use crate::siman::{optimize_sequence, AnnealConfig};
use crate::topology::{LaneMode, LaneProfile, Network};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid experiment plan: {0}")]
    InvalidPlan(String),
    #[error(transparent)]
    Traffic(#[from] TrafficError),
    #[error("csv output failed: {0}")]
    Csv(#[from] csv::Error),
    #[error("output failed: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    /// Label written into every output row.
    pub topology: String,
    pub profiles: Vec<LaneMode>,
    /// Requests per traffic matrix.
    pub loads: Vec<usize>,
    pub matrices: usize,
    pub iterations: usize,
    pub seed: u64,
    pub k: usize,
    pub physics: PhysicsProfile,
    pub traffic: TrafficProfile,
    pub confidence: f64,
}

impl ExperimentPlan {
    /// Loads 20 to 100 in steps of 20, 50 matrices each, 1000 annealing
    /// iterations, all three lane profiles.
    pub fn standard(topology: impl Into<String>) -> Self {
        Self {
            topology: topology.into(),
            profiles: vec![LaneMode::Full, LaneMode::Ninth, LaneMode::None],
            loads: (1..=5).map(|i| i * 20).collect(),
            matrices: 50,
            iterations: 1000,
            seed: 1,
            k: 3,
            physics: PhysicsProfile::Full,
            traffic: TrafficProfile::default(),
            confidence: 0.95,
        }
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |m: &str| Err(ExperimentError::InvalidPlan(m.into()));
        if self.loads.is_empty() {
            return bad("load grid is empty");
        }
        if self.profiles.is_empty() {
            return bad("no lane profiles");
        }
        if self.profiles.contains(&LaneMode::Explicit) {
            return bad("explicit lane profiles are not supported in experiments");
        }
        if self.matrices == 0 {
            return bad("matrices must be at least 1");
        }
        if self.iterations == 0 {
            return bad("iterations must be at least 1");
        }
        if self.k == 0 {
            return bad("k must be at least 1");
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return bad("confidence level outside (0, 1)");
        }
        self.traffic.validate()?;
        Ok(())
    }

    /// Seed shared by the traffic matrix and the annealing chain of one
    /// (load, matrix) cell across all profiles.
    pub fn matrix_seed(&self, load: usize, matrix: usize) -> u64 {
        let mut z = self
            .seed
            .wrapping_add((load as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
            .wrapping_add((matrix as u64).wrapping_mul(0xBF58_476D_1CE4_E5B9));
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
}

/// One (profile, load, matrix) run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawRow {
    pub topology: String,
    pub profile: LaneMode,
    pub load: usize,
    pub matrix: usize,
    pub seed: u64,
    pub total_gbps: u64,
    pub obj1: u32,
    pub obj2: u32,
    pub tie_key: u64,
    pub unserved_requests: usize,
    pub unserved_gbps: u64,
    /// Empty on success.
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingRow {
    pub profile: LaneMode,
    pub load: usize,
    pub matrix: usize,
    pub seconds: f64,
}

/// Aggregate over the matrices of one (profile, load) cell. Half-widths are
/// `None` with fewer than two samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatRow {
    pub topology: String,
    pub profile: LaneMode,
    pub load: usize,
    pub samples: usize,
    pub obj1_mean: f64,
    pub obj1_half_width: Option<f64>,
    pub obj2_mean: f64,
    pub obj2_half_width: Option<f64>,
    pub unserved_requests_mean: f64,
    pub failed: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResults {
    pub plan: ExperimentPlan,
    /// Ordered by (profile, load, matrix).
    pub raw: Vec<RawRow>,
    pub timing: Vec<TimingRow>,
    pub aggregate: Vec<StatRow>,
}

impl ExperimentResults {
    /// `(obj1 under a, obj1 under b)` for every successful matrix run under
    /// both profiles.
    pub fn paired_obj1(&self, a: LaneMode, b: LaneMode) -> Vec<(u32, u32)> {
        let find = |p: LaneMode, load: usize, m: usize| {
            self.raw
                .iter()
                .find(|r| r.profile == p && r.load == load && r.matrix == m && r.error.is_empty())
        };
        self.raw
            .iter()
            .filter(|r| r.profile == a && r.error.is_empty())
            .filter_map(|ra| find(b, ra.load, ra.matrix).map(|rb| (ra.obj1, rb.obj1)))
            .collect()
    }

    pub fn stat(&self, profile: LaneMode, load: usize) -> Option<&StatRow> {
        self.aggregate.iter().find(|s| s.profile == profile && s.load == load)
    }
}

fn run_cell(plan: &ExperimentPlan, network: &Network, load: usize, matrix: usize) -> Vec<(RawRow, TimingRow)> {
    let seed = plan.matrix_seed(load, matrix);
    let lanes = network.lanes_per_link();
    let requests = generate_traffic(network, load, &plan.traffic, seed).unwrap_or_default();
    let total_gbps = requests.iter().map(|r| r.gbps).sum();
    let anneal = AnnealConfig {
        iterations: plan.iterations,
        seed,
        ..AnnealConfig::default()
    };
    plan.profiles
        .iter()
        .map(|&mode| {
            let started = Instant::now();
            let mut row = RawRow {
                topology: plan.topology.clone(),
                profile: mode,
                load,
                matrix,
                seed,
                total_gbps,
                obj1: 0,
                obj2: 0,
                tie_key: 0,
                unserved_requests: 0,
                unserved_gbps: 0,
                error: String::new(),
            };
            let outcome = LaneProfile::new(lanes, mode, None)
                .map_err(|e| e.to_string())
                .and_then(|profile| {
                    Instance::new(
                        network.clone(),
                        profile,
                        plan.physics.physics(),
                        plan.k,
                        requests.clone(),
                    )
                    .map_err(|e| e.to_string())
                })
                .and_then(|inst| optimize_sequence(&inst, &anneal).map_err(|e| e.to_string()));
            match outcome {
                Ok(out) => {
                    row.obj1 = out.energy.obj1;
                    row.obj2 = out.energy.obj2;
                    row.tie_key = out.energy.tie_key;
                    row.unserved_requests = out.solution.unserved.len();
                    row.unserved_gbps = out.energy.unserved_gbps;
                }
                Err(e) => row.error = e,
            }
            let timing = TimingRow {
                profile: mode,
                load,
                matrix,
                seconds: started.elapsed().as_secs_f64(),
            };
            (row, timing)
        })
        .collect()
}

fn aggregate(plan: &ExperimentPlan, raw: &[RawRow]) -> Vec<StatRow> {
    let mut out = Vec::new();
    for &profile in &plan.profiles {
        for &load in &plan.loads {
            let cell: Vec<&RawRow> = raw.iter().filter(|r| r.profile == profile && r.load == load).collect();
            let ok: Vec<&RawRow> = cell.iter().copied().filter(|r| r.error.is_empty()).collect();
            let series = |f: fn(&RawRow) -> f64| -> (f64, Option<f64>) {
                let xs: Vec<f64> = ok.iter().map(|r| f(r)).collect();
                match mean_ci(&xs, plan.confidence) {
                    Ok((m, h)) => (m, Some(h)),
                    Err(_) => (xs.first().copied().unwrap_or(f64::NAN), None),
                }
            };
            let (obj1_mean, obj1_half_width) = series(|r| f64::from(r.obj1));
            let (obj2_mean, obj2_half_width) = series(|r| f64::from(r.obj2));
            let unserved_requests_mean = if ok.is_empty() {
                f64::NAN
            } else {
                ok.iter().map(|r| r.unserved_requests as f64).sum::<f64>() / ok.len() as f64
            };
            out.push(StatRow {
                topology: plan.topology.clone(),
                profile,
                load,
                samples: ok.len(),
                obj1_mean,
                obj1_half_width,
                obj2_mean,
                obj2_half_width,
                unserved_requests_mean,
                failed: cell.len() - ok.len(),
            });
        }
    }
    out
}

/// Runs every (profile, load, matrix) cell. Each matrix is replayed under
/// all profiles with the same annealing seed.
pub fn run_experiment(plan: &ExperimentPlan, network: &Network) -> Result<ExperimentResults, ExperimentError> {
    plan.validate()?;
    let cells: Vec<(usize, usize)> = plan
        .loads
        .iter()
        .flat_map(|&l| (0..plan.matrices).map(move |m| (l, m)))
        .collect();
    let runs: Vec<(RawRow, TimingRow)> = cells
        .par_iter()
        .flat_map_iter(|&(l, m)| run_cell(plan, network, l, m))
        .collect();
    let rank = |mode: LaneMode, load: usize, matrix: usize| {
        let p = plan.profiles.iter().position(|&x| x == mode).unwrap_or(usize::MAX);
        let l = plan.loads.iter().position(|&x| x == load).unwrap_or(usize::MAX);
        (p, l, matrix)
    };
    let (mut raw, mut timing): (Vec<RawRow>, Vec<TimingRow>) = runs.into_iter().unzip();
    raw.sort_by_key(|r| rank(r.profile, r.load, r.matrix));
    timing.sort_by_key(|t| rank(t.profile, t.load, t.matrix));
    let aggregate = aggregate(plan, &raw);
    Ok(ExperimentResults {
        plan: plan.clone(),
        raw,
        timing,
        aggregate,
    })
}

fn fmt_f(x: f64) -> String {
    if x.is_nan() {
        "NA".into()
    } else {
        format!("{x:.6}")
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "NA".into(), fmt_f)
}

pub fn write_raw_csv<W: Write>(rows: &[RawRow], out: W) -> Result<(), ExperimentError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "topology",
        "profile",
        "load",
        "matrix",
        "seed",
        "total_gbps",
        "obj1",
        "obj2",
        "tie_key",
        "unserved_requests",
        "unserved_gbps",
        "error",
    ])?;
    for r in rows {
        w.write_record([
            r.topology.clone(),
            r.profile.to_string(),
            r.load.to_string(),
            r.matrix.to_string(),
            r.seed.to_string(),
            r.total_gbps.to_string(),
            r.obj1.to_string(),
            r.obj2.to_string(),
            r.tie_key.to_string(),
            r.unserved_requests.to_string(),
            r.unserved_gbps.to_string(),
            r.error.clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_aggregate_csv<W: Write>(rows: &[StatRow], out: W) -> Result<(), ExperimentError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "topology",
        "profile",
        "load",
        "samples",
        "obj1_mean",
        "obj1_half_width",
        "obj2_mean",
        "obj2_half_width",
        "unserved_requests_mean",
        "failed",
    ])?;
    for s in rows {
        w.write_record([
            s.topology.clone(),
            s.profile.to_string(),
            s.load.to_string(),
            s.samples.to_string(),
            fmt_f(s.obj1_mean),
            fmt_opt(s.obj1_half_width),
            fmt_f(s.obj2_mean),
            fmt_opt(s.obj2_half_width),
            fmt_f(s.unserved_requests_mean),
            s.failed.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Plot-ready series: obj1 for every profile plus obj2 for the mixed
/// profile, one row per (series, load).
pub fn write_series_csv<W: Write>(rows: &[StatRow], out: W) -> Result<(), ExperimentError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["series", "load", "mean", "half_width"])?;
    let mut profiles: Vec<LaneMode> = Vec::new();
    for s in rows {
        if !profiles.contains(&s.profile) {
            profiles.push(s.profile);
        }
    }
    for p in profiles {
        let cell: Vec<&StatRow> = rows.iter().filter(|s| s.profile == p).collect();
        for s in &cell {
            w.write_record([
                format!("{p}-obj1"),
                s.load.to_string(),
                fmt_f(s.obj1_mean),
                fmt_opt(s.obj1_half_width),
            ])?;
        }
        if p == LaneMode::Ninth {
            for s in &cell {
                w.write_record([
                    format!("{p}-obj2"),
                    s.load.to_string(),
                    fmt_f(s.obj2_mean),
                    fmt_opt(s.obj2_half_width),
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_timing_csv<W: Write>(rows: &[TimingRow], out: W) -> Result<(), ExperimentError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["profile", "load", "matrix", "seconds"])?;
    for t in rows {
        w.write_record([
            t.profile.to_string(),
            t.load.to_string(),
            t.matrix.to_string(),
            format!("{:.6}", t.seconds),
        ])?;
    }
    w.flush()?;
    Ok(())
}
