//! Replication runner, regret aggregation, timing and result files.

mod aggregate;
mod config;
mod output;
mod runner;
mod timing;

pub use aggregate::{
    aggregate, average_results, default_checkpoints, mean_stderr, AggregateResult, CheckpointStat, DEFAULT_CHECKPOINTS,
};
pub use config::{ExperimentConfig, PolicyId, PolicyParams};
pub use output::{
    read_results_csv, result_rows, write_json, write_results_csv, write_table_csv, write_traces_csv, ResultRow,
    SummaryEntry, RESULT_COLUMNS,
};
pub use runner::{bugb_config, gp_params, run_experiment, run_replication};
pub use timing::{
    bugb_pass_seconds, gp_refit_seconds, policy_wall_times, timing_run, PolicyTiming, ScalingPoint, TimingReport,
};
