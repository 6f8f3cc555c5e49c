use std::path::Path;
use std::time::Instant;

use log::info;
use rayon::prelude::*;

use super::config::RunConfig;
use super::dataset::{best_temporal_config, e1_grid, e2_grid, e3_grid, DatasetSpec};
use super::report::{ExperimentKind, ExperimentReport, ReportRow, RowOutcome};
use crate::error::{Error, Result};
use crate::evaluation::{cross_validate, make_group_folds, FoldPlan};
use crate::features::{assemble, column_names, Assembled};
use crate::matching::MatchStrategy;
use crate::ingestion::{load_dataset, Dataset, Sensor};
use crate::matching::build_samples;

/// Why `spec` cannot be evaluated on `data`, if some modality is absent altogether.
fn missing_modality(data: &Dataset, spec: &DatasetSpec) -> Option<String> {
    if spec.needs_s2() && data.index.count(Sensor::S2) == 0 {
        return Some("no S2 patches in the dataset".into());
    }
    if spec.use_s1 {
        let any = data
            .index
            .iter()
            .any(|(k, _)| k.sensor == Sensor::S1 && spec.orbit.admits(k.orbit));
        if !any {
            return Some(format!("no S1 {} patches in the dataset", spec.orbit.label()));
        }
    }
    if spec.use_embeddings && data.embeddings.is_none() {
        return Some("no embeddings file".into());
    }
    None
}

/// Matches and assembles the design matrix for one grid row.
pub fn build_matrix(data: &Dataset, spec: &DatasetSpec, cfg: &RunConfig) -> Result<Assembled> {
    spec.validate()?;
    let mut plan = spec.match_plan(cfg.closest_window_days);
    plan.max_cloud = cfg.max_cloud_fraction;
    plan.prev_max_gap_days = cfg.prev_max_gap_days;
    let samples = build_samples(&data.measurements, &data.index, &plan);
    assemble(
        &samples.samples,
        &spec.blocks(),
        &data.index,
        &data.era5,
        data.embeddings.as_ref(),
    )
}

fn slug(label: &str) -> String {
    let mut s: String = label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c.to_ascii_lowercase() } else { '_' })
        .collect();
    while s.contains("__") {
        s = s.replace("__", "_");
    }
    s.trim_matches('_').to_string()
}

/// Cross-validates one grid row. Rows whose modality is absent, or that match
/// no sample, are skipped with a reason.
pub fn evaluate_spec(
    data: &Dataset,
    spec: &DatasetSpec,
    label: &str,
    cfg: &RunConfig,
    folds: &FoldPlan,
    dump_dir: Option<&Path>,
) -> Result<ReportRow> {
    let n_columns = column_names(&spec.blocks()).len();
    let row = |outcome| ReportRow {
        label: label.to_string(),
        spec: *spec,
        n_columns,
        outcome,
    };
    if let Some(why) = missing_modality(data, spec) {
        return Ok(row(RowOutcome::Skipped(why)));
    }
    let started = Instant::now();
    let Assembled { matrix, targets, .. } = build_matrix(data, spec, cfg)?;
    if let Some(dir) = dump_dir {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        matrix.write_csv(&dir.join(format!("{}.csv", slug(label))), &targets)?;
    }
    if matrix.n_rows() == 0 {
        return Ok(row(RowOutcome::Skipped("no matched samples".into())));
    }
    debug_assert!(matrix.columns().iter().any(|c| c.starts_with("precip_total_lag")));
    let result = cross_validate(&matrix, &targets, folds, &cfg.forest_params())?;
    info!(
        "{label}: r2 {:.4}, rmse {:.4}, {} rows x {} cols, {:.1}s",
        result.r2,
        result.rmse,
        matrix.n_rows(),
        matrix.n_cols(),
        started.elapsed().as_secs_f64()
    );
    Ok(row(RowOutcome::Scored(result)))
}

/// Grid rows and their report labels.
pub fn grid(kind: ExperimentKind, cfg: &RunConfig) -> Vec<(String, DatasetSpec)> {
    match kind {
        ExperimentKind::E1 => e1_grid(cfg.era5_lookback).into_iter().map(|s| (s.to_string(), s)).collect(),
        ExperimentKind::E2 => e2_grid(cfg.lag_min..=cfg.lag_max)
            .into_iter()
            .map(|s| (format!("{s} (ERA5 lag {})", s.era5_lookback), s))
            .collect(),
        ExperimentKind::E3 => {
            let mut rows: Vec<(String, DatasetSpec)> =
                e3_grid(cfg.era5_lookback).into_iter().map(|s| (s.to_string(), s)).collect();
            // hand-crafted counterparts measured in the same run
            let with_s1 = best_temporal_config(cfg.era5_lookback);
            let s2_only = DatasetSpec::s2(MatchStrategy::current_day(), cfg.era5_lookback);
            rows.extend([s2_only, with_s1].map(|s| (s.to_string(), s)));
            rows
        }
    }
}

/// Station-grouped folds over every station that has measurements.
pub fn fold_plan(data: &Dataset, cfg: &RunConfig) -> Result<FoldPlan> {
    let counts = data.measurements.count_by_station();
    let ids: Vec<&str> = data.stations.ids().filter(|id| counts.contains_key(id)).collect();
    make_group_folds(&ids, cfg.folds, cfg.seed)
}

/// Runs a grid on an already loaded dataset.
pub fn run_on(kind: ExperimentKind, data: &Dataset, cfg: &RunConfig, dump_dir: Option<&Path>) -> Result<ExperimentReport> {
    cfg.validate()?;
    if kind == ExperimentKind::E3 && data.embeddings.is_none() {
        return Err(Error::Config(format!(
            "{} requires an embeddings file",
            kind.as_str()
        )));
    }
    let folds = fold_plan(data, cfg)?;
    let rows = grid(kind, cfg)
        .par_iter()
        .map(|(label, spec)| evaluate_spec(data, spec, label, cfg, &folds, dump_dir))
        .collect::<Result<Vec<_>>>()?;
    Ok(ExperimentReport {
        kind,
        rows,
        seed: cfg.seed,
        folds: cfg.folds,
        config: cfg.resolved(),
    })
}

/// Loads the dataset named by `cfg` and runs one experiment grid.
pub fn run_experiment(kind: ExperimentKind, cfg: &RunConfig, dump_dir: Option<&Path>) -> Result<ExperimentReport> {
    cfg.validate()?;
    let paths = cfg.data_paths();
    if kind == ExperimentKind::E3 && !paths.embeddings.is_file() {
        return Err(Error::Config(format!(
            "{} requires {}",
            kind.as_str(),
            paths.embeddings.display()
        )));
    }
    let started = Instant::now();
    let data = load_dataset(&paths, &cfg.load_options(kind == ExperimentKind::E3))?;
    info!(
        "loaded {} stations, {} measurements, {} S2 / {} S1 patches in {:.1}s",
        data.summary.retained_stations,
        data.summary.measurements,
        data.summary.s2_patches,
        data.summary.s1_patches,
        started.elapsed().as_secs_f64()
    );
    run_on(kind, &data, cfg, dump_dir)
}
