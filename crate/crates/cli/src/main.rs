use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rscsa_core::harness::{requests_doc, write_aggregate_csv, write_raw_csv, write_series_csv, write_timing_csv};
use rscsa_core::ilp::{emit_full_model, emit_relaxed_lb_model, validate_solution, warm_start, ModelPhase};
use rscsa_core::instance::load_requests;
use rscsa_core::siman::write_trace_csv;
use rscsa_core::topology::load_topology;
use rscsa_core::{
    exact_solve, generate_traffic, optimize_sequence, plan_with, relaxed_optimum, run_experiment, AnnealConfig,
    ExperimentPlan, FailurePolicy, Instance, Lane, LaneMode, LaneProfile, NeighborRule, OracleLimits, PhysicsProfile,
    Solution, TrafficProfile,
};

#[derive(Parser)]
#[command(
    name = "rscsa",
    version,
    about = "Static routing, spatial channel and spectrum assignment planner"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Plan one instance with the three-phase heuristic.
    Plan(PlanArgs),
    /// Search service sequences with simulated annealing.
    Anneal(AnnealArgs),
    /// Write the integer model (or its relaxation) in LP format.
    IlpExport(IlpArgs),
    /// Audit a solution against every model constraint.
    Validate(ValidateArgs),
    /// Solve a tiny instance exactly.
    Oracle(OracleArgs),
    /// Draw a random request list.
    GenTraffic(TrafficArgs),
    /// Run the load sweep over lane profiles.
    Experiment(ExperimentArgs),
}

#[derive(Args)]
struct InstanceArgs {
    /// Topology JSON file.
    #[arg(long, short = 't')]
    topology: PathBuf,
    /// Request list JSON file.
    #[arg(long, short = 'r')]
    requests: PathBuf,
    /// Override the topology's lane mode (full, ninth, none, explicit).
    #[arg(long)]
    lane_mode: Option<LaneMode>,
    /// Switching lanes for the explicit mode, comma separated.
    #[arg(long, value_delimiter = ',')]
    lw: Option<Vec<Lane>>,
    /// Candidate paths per node pair.
    #[arg(long, short = 'k', default_value_t = 3)]
    k: usize,
    #[arg(long, value_enum, default_value_t = Phys::Full)]
    physics: Phys,
}

#[derive(Clone, Copy, ValueEnum)]
enum Phys {
    /// Modulation by reach, 3 FS per carrier.
    Full,
    /// 100 Gbps and 4 FS per carrier on every path.
    Simplified,
}

impl From<Phys> for PhysicsProfile {
    fn from(p: Phys) -> Self {
        match p {
            Phys::Full => PhysicsProfile::Full,
            Phys::Simplified => PhysicsProfile::Simplified,
        }
    }
}

impl InstanceArgs {
    fn load(&self) -> Result<Instance> {
        let text = read(&self.topology)?;
        let topo = load_topology(&text).with_context(|| format!("parsing {}", self.topology.display()))?;
        let profile = match self.lane_mode {
            Some(mode) => LaneProfile::new(topo.network.lanes_per_link(), mode, self.lw.as_deref())?,
            None if self.lw.is_some() => {
                LaneProfile::new(topo.network.lanes_per_link(), LaneMode::Explicit, self.lw.as_deref())?
            }
            None => topo.profile,
        };
        let reqs = load_requests(&read(&self.requests)?, &topo.network)
            .with_context(|| format!("parsing {}", self.requests.display()))?;
        Ok(Instance::new(
            topo.network,
            profile,
            PhysicsProfile::from(self.physics).physics(),
            self.k,
            reqs,
        )?)
    }
}

#[derive(Args)]
struct PolicyArgs {
    /// Skip re-assignment of leftovers into existing spatial channels.
    #[arg(long)]
    no_reassign: bool,
    /// Skip the uncapped re-assignment retry after switching-lane sharing.
    #[arg(long)]
    no_retry: bool,
}

impl PolicyArgs {
    fn policy(&self) -> FailurePolicy {
        FailurePolicy {
            reassign: !self.no_reassign,
            retry_uncapped: !self.no_retry,
        }
    }
}

#[derive(Args)]
struct PlanArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[command(flatten)]
    policy: PolicyArgs,
    /// Service sequence as request indices (default: descending volume).
    #[arg(long, value_delimiter = ',')]
    sequence: Option<Vec<usize>>,
    /// Output file (default: stdout).
    #[arg(long, short = 'o')]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct AnnealArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[command(flatten)]
    policy: PolicyArgs,
    #[arg(long, default_value_t = 1000)]
    iterations: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    restarts: usize,
    #[arg(long, default_value_t = 0.95)]
    cooling: f64,
    #[arg(long, value_enum, default_value_t = Neighbor::Swap)]
    neighbor: Neighbor,
    /// Per-iteration trace CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long, short = 'o')]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Neighbor {
    Swap,
    Reinsert,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelKind {
    Full,
    Relaxed,
}

#[derive(Args)]
struct IlpArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[arg(long, value_enum, default_value_t = ModelKind::Full)]
    model: ModelKind,
    /// Emit the switching-lane phase with total lanes capped at this value.
    #[arg(long)]
    obj1_bound: Option<u32>,
    /// Solution to turn into a variable assignment.
    #[arg(long)]
    warm_start: Option<PathBuf>,
    /// Where to write the assignment (default: model path with `.mst`).
    #[arg(long)]
    warm_out: Option<PathBuf>,
    #[arg(long, short = 'o')]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    /// Solution JSON to audit.
    #[arg(long, short = 's')]
    solution: PathBuf,
    /// Print the report as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    /// Channels per request (default 2; `exact` lifts the cap).
    #[arg(long)]
    max_splits: Option<usize>,
    /// Allow every (path, lane) pair per request.
    #[arg(long)]
    exact: bool,
    #[arg(long, default_value_t = 30.0)]
    time_budget: f64,
    #[arg(long, default_value_t = 6)]
    max_nodes: usize,
    #[arg(long, default_value_t = 4)]
    max_lanes: Lane,
    #[arg(long, default_value_t = 4)]
    max_requests: usize,
    /// Print only the optimum of the relaxed model.
    #[arg(long)]
    relaxed: bool,
    #[arg(long, short = 'o')]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct TrafficArgs {
    #[arg(long, short = 't')]
    topology: PathBuf,
    #[arg(long, short = 'n')]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, short = 'o')]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long, short = 't')]
    topology: PathBuf,
    /// Requests per matrix.
    #[arg(long, value_delimiter = ',', default_values_t = [20, 40, 60, 80, 100])]
    loads: Vec<usize>,
    #[arg(long, default_value_t = 50)]
    matrices: usize,
    #[arg(long, default_value_t = 1000)]
    iterations: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, value_delimiter = ',', default_values_t = [LaneMode::Full, LaneMode::Ninth, LaneMode::None])]
    profiles: Vec<LaneMode>,
    #[arg(long, short = 'k', default_value_t = 3)]
    k: usize,
    #[arg(long, value_enum, default_value_t = Phys::Full)]
    physics: Phys,
    /// Directory for raw.csv, aggregate.csv, series.csv and timing.csv.
    #[arg(long, short = 'o')]
    out_dir: PathBuf,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn emit(output: Option<&Path>, text: &str) -> Result<()> {
    match output {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn summarize(sol: &Solution) {
    eprintln!(
        "obj1 {} obj2 {} channels {} unserved {} Gbps",
        sol.objectives.obj1,
        sol.objectives.obj2,
        sol.channel_count(),
        sol.unserved_gbps()
    );
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Plan(a) => {
            let inst = a.instance.load()?;
            let seq = a.sequence.unwrap_or_else(|| inst.descending_volume_order());
            let sol = plan_with(&inst, &seq, a.policy.policy())?;
            summarize(&sol);
            emit(a.output.as_deref(), &(sol.to_json() + "\n"))?;
        }
        Command::Anneal(a) => {
            let inst = a.instance.load()?;
            let cfg = AnnealConfig {
                iterations: a.iterations,
                seed: a.seed,
                restarts: a.restarts,
                cooling: a.cooling,
                neighbor: match a.neighbor {
                    Neighbor::Swap => NeighborRule::Swap,
                    Neighbor::Reinsert => NeighborRule::Reinsert,
                },
                policy: a.policy.policy(),
                ..AnnealConfig::default()
            };
            let out = optimize_sequence(&inst, &cfg)?;
            if let Some(p) = &a.trace {
                let f = fs::File::create(p).with_context(|| format!("creating {}", p.display()))?;
                write_trace_csv(&out.trace, f)?;
            }
            eprintln!("sequence {:?}", out.sequence);
            summarize(&out.solution);
            emit(a.output.as_deref(), &(out.solution.to_json() + "\n"))?;
        }
        Command::IlpExport(a) => {
            let inst = a.instance.load()?;
            let model = match (a.model, a.obj1_bound) {
                (ModelKind::Relaxed, Some(_)) => bail!("the relaxed model has no switching-lane phase"),
                (ModelKind::Relaxed, None) => emit_relaxed_lb_model(&inst),
                (ModelKind::Full, None) => emit_full_model(&inst, ModelPhase::Main),
                (ModelKind::Full, Some(b)) => emit_full_model(&inst, ModelPhase::Minor { obj1_bound: b }),
            };
            emit(a.output.as_deref(), &model)?;
            if let Some(ws) = &a.warm_start {
                let sol = Solution::from_json(&read(ws)?).with_context(|| format!("parsing {}", ws.display()))?;
                let text = warm_start(&inst, &sol)?;
                let target = match (&a.warm_out, &a.output) {
                    (Some(p), _) => p.clone(),
                    (None, Some(o)) => o.with_extension("mst"),
                    (None, None) => bail!("--warm-start needs --warm-out or --output"),
                };
                fs::write(&target, text).with_context(|| format!("writing {}", target.display()))?;
            }
        }
        Command::Validate(a) => {
            let inst = a.instance.load()?;
            let sol = Solution::from_json(&read(&a.solution)?)
                .with_context(|| format!("parsing {}", a.solution.display()))?;
            let report = validate_solution(&inst, &sol);
            if a.json {
                println!("{}", serde_json::to_string_pretty(&report)?);
            } else {
                print!("{report}");
            }
            if !report.is_clean() {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Oracle(a) => {
            let inst = a.instance.load()?;
            let base = if a.exact {
                OracleLimits::exact_for(&inst)
            } else {
                OracleLimits::default()
            };
            let limits = OracleLimits {
                max_nodes: a.max_nodes,
                max_lanes: a.max_lanes,
                max_requests: a.max_requests,
                max_splits: a.max_splits.unwrap_or(base.max_splits),
                time_budget: Duration::from_secs_f64(a.time_budget),
            };
            if a.relaxed {
                println!("{}", relaxed_optimum(&inst, &limits)?);
            } else {
                let sol = exact_solve(&inst, &limits)?;
                summarize(&sol);
                emit(a.output.as_deref(), &(sol.to_json() + "\n"))?;
            }
        }
        Command::GenTraffic(a) => {
            let topo = load_topology(&read(&a.topology)?)?;
            let reqs = generate_traffic(&topo.network, a.count, &TrafficProfile::default(), a.seed)?;
            let doc = requests_doc(&topo.network, &reqs);
            emit(a.output.as_deref(), &(serde_json::to_string_pretty(&doc)? + "\n"))?;
        }
        Command::Experiment(a) => {
            let topo = load_topology(&read(&a.topology)?)?;
            let label = a
                .topology
                .file_stem()
                .and_then(|s| s.to_str())
                .map_or("topology", |s| s.trim_end_matches(".topology"))
                .to_string();
            let plan = ExperimentPlan {
                profiles: a.profiles,
                loads: a.loads,
                matrices: a.matrices,
                iterations: a.iterations,
                seed: a.seed,
                k: a.k,
                physics: a.physics.into(),
                ..ExperimentPlan::standard(label)
            };
            let res = run_experiment(&plan, &topo.network)?;
            fs::create_dir_all(&a.out_dir).with_context(|| format!("creating {}", a.out_dir.display()))?;
            let file = |name: &str| {
                let p = a.out_dir.join(name);
                fs::File::create(&p).with_context(|| format!("creating {}", p.display()))
            };
            write_raw_csv(&res.raw, file("raw.csv")?)?;
            write_aggregate_csv(&res.aggregate, file("aggregate.csv")?)?;
            write_series_csv(&res.aggregate, file("series.csv")?)?;
            write_timing_csv(&res.timing, file("timing.csv")?)?;
            let failed: usize = res.aggregate.iter().map(|s| s.failed).sum();
            eprintln!(
                "{} runs, {} failed, outputs in {}",
                res.raw.len(),
                failed,
                a.out_dir.display()
            );
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
