//! Experiment plumbing: datasets, sweep configuration, the CSV-producing
//! runner, flip statistics and coordinate export.

mod config;
mod dataset;
mod runner;
mod stats;

pub use config::{AttackKind, ExperimentConfig, Metric, OUTPUT_DIR_ENV};
pub use dataset::{hex_digest, Dataset, DatasetSpec, BUILTIN_DATASETS};
pub use runner::{
    budget_count, evaluate_metrics, evaluation_seed, parse_rows, results_path, rows_to_csv, run_attack, run_experiment,
    task_seed, tasks, ResultRow, Task, BASELINE, CSV_HEADER, RESULTS_FILE, SKIPPED_METRIC,
};
pub use stats::{export_embedding_coordinates, flip_statistics, FlipStats};
