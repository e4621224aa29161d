//! Static routing, spatial channel and spectrum assignment (RSCSA) for
//! multi-lane spatial-division-multiplexing optical networks.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod alloc;
pub mod harness;
pub mod heuristic;
pub mod ilp;
pub mod instance;
pub mod oracle;
pub mod physical;
pub mod siman;
pub mod solution;
pub mod topology;

pub use alloc::{AllocError, AllocationState, Channel, ChannelId, Objectives, SchId, SchKind, SchRecord};
pub use harness::{
    generate_traffic, mean_ci, run_experiment, t_quantile, ExperimentPlan, ExperimentResults, StatRow, TrafficProfile,
};
pub use heuristic::{plan, plan_with, FailurePolicy, HeuristicConfig, HeuristicError, PhysicsProfile};
pub use instance::{Instance, InstanceError, NodePair, PathId, Request, RequestId, RoutedPath};
pub use oracle::{exact_solve, relaxed_optimum, OracleError, OracleLimits};
pub use physical::{GridParams, ModulationFormat, ModulationTable, Physics, PhysicsError};
pub use siman::{
    optimize_sequence, AnnealConfig, AnnealError, AnnealOutcome, Energy, InitialTemperature, NeighborRule, TraceRow,
};
pub use solution::{ChannelDoc, PlanDiagnostics, RequestAssignment, Solution, UnservedEntry};
pub use topology::{CandidatePath, Lane, LaneMode, LaneProfile, LinkId, Network, NodeId, Topology, TopologyError};
