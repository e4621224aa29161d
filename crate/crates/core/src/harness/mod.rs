//! Traffic generation, statistics and experiment orchestration.

mod experiment;
mod stats;
mod traffic;

pub use experiment::{
    run_experiment, write_aggregate_csv, write_raw_csv, write_series_csv, write_timing_csv, ExperimentError,
    ExperimentPlan, ExperimentResults, RawRow, StatRow, TimingRow,
};
pub use stats::{mean_ci, t_quantile, StatsError};
pub use traffic::{generate_traffic, requests_doc, TrafficError, TrafficProfile};
