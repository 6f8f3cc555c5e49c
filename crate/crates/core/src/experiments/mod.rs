//! Experiment grids, the synthetic dataset generator and report files.

pub mod config;
pub mod dataset;
pub mod report;
pub mod run;
pub mod synth;

pub use config::RunConfig;
pub use dataset::{best_temporal_config, e1_grid, e2_grid, e3_grid, DatasetSpec};
pub use report::{emit_report, read_results, ExperimentKind, ExperimentReport, ReportRow, RowOutcome};
pub use run::{build_matrix, evaluate_spec, fold_plan, run_experiment, run_on};
pub use synth::{generate_synthetic, EmbeddingMode, SynthConfig};
