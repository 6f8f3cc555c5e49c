use rayon::prelude::*;

use super::era5_stack::{era5_columns, era5_lag_stack, MAX_LOOKBACK};
use super::spectral::{sar_features, spectral_indices, temporal_dynamics, BandMeans, SarFeatures, SpectralIndices};
use super::FeatureMatrix;
use crate::error::{Error, Result};
use crate::ingestion::{embeddings::embedding_column, AcquisitionIndex, BandId, EmbeddingTable, Era5Table, Sensor, EMBEDDING_DIM};
use crate::matching::{key, Acquisition, MatchedSample};

/// Which column blocks a matrix carries. ERA5 lags are always present.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FeatureBlocks {
    /// The 12 S2 reflectance band means.
    pub s2_bands: bool,
    /// NDVI, NDWI, NDMI, MSI.
    pub s2_indices: bool,
    pub s1: bool,
    pub embeddings: bool,
    pub era5_lookback: usize,
}

impl FeatureBlocks {
    fn s2_feature_names(&self) -> Vec<String> {
        let mut names = Vec::new();
        if self.s2_bands {
            names.extend(BandId::OPTICAL.iter().map(|b| b.name().to_string()));
        }
        if self.s2_indices {
            names.extend(SpectralIndices::NAMES.iter().map(|s| s.to_string()));
        }
        names
    }
}

fn dynamics_names(features: &[String]) -> Vec<String> {
    features
        .iter()
        .flat_map(|f| [format!("{f}_diff"), format!("{f}_rate")])
        .collect()
}

/// Column layout: S2 bands, S2 indices, S2 dynamics, S1 features, S1 dynamics,
/// ERA5 lag stack, embeddings.
pub fn column_names(blocks: &FeatureBlocks) -> Vec<String> {
    let s2 = blocks.s2_feature_names();
    let mut cols = s2.clone();
    cols.extend(dynamics_names(&s2));
    if blocks.s1 {
        let s1: Vec<String> = SarFeatures::NAMES.iter().map(|s| s.to_string()).collect();
        cols.extend(s1.iter().cloned());
        cols.extend(dynamics_names(&s1));
    }
    cols.extend(era5_columns(blocks.era5_lookback));
    if blocks.embeddings {
        cols.extend((0..EMBEDDING_DIM).map(embedding_column));
    }
    cols
}

#[derive(Debug, Clone)]
pub struct Assembled {
    pub matrix: FeatureMatrix,
    /// In-situ soil moisture per matrix row.
    pub targets: Vec<f64>,
    /// Samples dropped because no embedding exists for their S2 acquisition.
    pub dropped_missing_embedding: usize,
}

fn means_of(index: &AcquisitionIndex, station: &str, sensor: Sensor, a: Option<Acquisition>) -> Option<BandMeans> {
    a.and_then(|a| index.get(&key(station, sensor, a)))
        .map(|e| e.means)
}

fn s2_values(blocks: &FeatureBlocks, means: Option<BandMeans>) -> Vec<Option<f64>> {
    let mut v = Vec::new();
    if blocks.s2_bands {
        v.extend(BandId::OPTICAL.iter().map(|&b| means.and_then(|m| m.get(b))));
    }
    if blocks.s2_indices {
        match means {
            Some(m) => v.extend(spectral_indices(&m).values()),
            None => v.extend([None; 4]),
        }
    }
    v
}

fn s1_values(means: Option<BandMeans>) -> Vec<Option<f64>> {
    match means.and_then(|m| sar_features(&m)) {
        Some(f) => f.values().iter().map(|&x| Some(x)).collect(),
        None => vec![None; 3],
    }
}

fn push_dynamics(row: &mut Vec<Option<f64>>, curr: &[Option<f64>], prev: &[Option<f64>], gap: Option<i32>) {
    for (i, &c) in curr.iter().enumerate() {
        let d = gap.and_then(|g| temporal_dynamics(c, prev.get(i).copied().flatten(), g));
        row.push(d.map(|d| d.diff));
        row.push(d.map(|d| d.rate));
    }
}

fn gap(main: Option<Acquisition>, prev: Option<Acquisition>) -> Option<i32> {
    Some(main?.date.days_since(prev?.date))
}

/// Builds the design matrix for `samples`. Rows follow sample order.
pub fn assemble(
    samples: &[MatchedSample],
    blocks: &FeatureBlocks,
    index: &AcquisitionIndex,
    era5: &Era5Table,
    embeddings: Option<&EmbeddingTable>,
) -> Result<Assembled> {
    if blocks.era5_lookback > MAX_LOOKBACK {
        return Err(Error::Config(format!(
            "ERA5 lookback {} exceeds {MAX_LOOKBACK}",
            blocks.era5_lookback
        )));
    }
    let embeddings = match (blocks.embeddings, embeddings) {
        (true, None) => {
            return Err(Error::Config(
                "dataset requests embeddings but no embeddings table is loaded".into(),
            ))
        }
        (true, Some(t)) => Some(t),
        (false, _) => None,
    };
    let columns = column_names(blocks);
    let width = columns.len();

    let rows: Vec<Option<Vec<Option<f64>>>> = samples
        .par_iter()
        .map(|s| {
            let id = s.station_id.as_str();
            let mut row = Vec::with_capacity(width);
            if blocks.s2_bands || blocks.s2_indices {
                let curr = s2_values(blocks, means_of(index, id, Sensor::S2, s.s2));
                let prev = s2_values(blocks, means_of(index, id, Sensor::S2, s.s2_prev));
                row.extend_from_slice(&curr);
                push_dynamics(&mut row, &curr, &prev, gap(s.s2, s.s2_prev));
            }
            if blocks.s1 {
                let curr = s1_values(means_of(index, id, Sensor::S1, s.s1));
                let prev = s1_values(means_of(index, id, Sensor::S1, s.s1_prev));
                row.extend_from_slice(&curr);
                push_dynamics(&mut row, &curr, &prev, gap(s.s1, s.s1_prev));
            }
            row.extend(era5_lag_stack(era5, id, s.target_date, blocks.era5_lookback));
            if let Some(table) = embeddings {
                let vector = s.s2.and_then(|a| table.get(id, a.date))?;
                row.extend(vector.iter().map(|&v| Some(v as f64)));
            }
            debug_assert_eq!(row.len(), width);
            Some(row)
        })
        .collect();

    let mut matrix = FeatureMatrix::new(columns);
    let mut targets = Vec::with_capacity(samples.len());
    let mut dropped = 0;
    for (s, row) in samples.iter().zip(rows) {
        match row {
            Some(row) => {
                matrix.push_row(&row, s.station_id.clone(), s.target_date)?;
                targets.push(s.sm);
            }
            None => dropped += 1,
        }
    }
    Ok(Assembled {
        matrix,
        targets,
        dropped_missing_embedding: dropped,
    })
}
