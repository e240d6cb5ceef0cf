//! Benchmark runner: problem sets, method execution, ground-truth scoring,
//! traces, metrics and result tables.

mod config;
mod metrics;
mod problems;
mod replay;
mod run;
mod tables;
mod trace;

pub use config::{Ablation, BackendKind, ExperimentConfig, Method, TaskKind};
pub use metrics::{summarize, BucketMetrics, MetricsSummary, ProblemResult, RunMetrics, Stat};
pub use problems::{build_problem_set, load_graph, Problem, ProblemFile, ProblemSet};
pub use replay::{replay_plan, ReplayOutcome};
pub use run::{job_seed, run_experiment, run_experiment_with, ExperimentOutput};
pub use tables::{emit_tables, fmt_num, Tables};
pub use trace::{
    read_results, read_trace, recompute_dir, recompute_metrics, trace_file_name, trace_files, write_trace, TraceLine,
};
