//! Loading and validating stations, measurements, patches, reanalysis and embeddings.

pub(crate) mod csvio;
pub mod embeddings;
pub mod era5;
pub mod index;
pub mod patch;
pub mod stations;

use std::path::{Path, PathBuf};

use crate::domain::{MeasurementTable, StationTable};
use crate::error::Result;

pub use embeddings::{load_embeddings, EmbeddingRecord, EmbeddingTable, EMBEDDING_DIM};
pub use era5::{load_era5, Era5Record, Era5Table, ERA5_VARIABLES, N_ERA5_VARIABLES};
pub use index::{build_index, patch_path, AcquisitionEntry, AcquisitionIndex, AcquisitionKey};
pub use patch::{cloud_fraction, decode_patch, encode_patch, BandId, Orbit, Patch, PatchError, Sensor};
pub use stations::{dedup_stations, load_measurements, load_stations, MeasurementLoad};

/// File locations of one dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct DataPaths {
    pub stations: PathBuf,
    pub measurements: PathBuf,
    pub era5: PathBuf,
    pub embeddings: PathBuf,
    pub patches: PathBuf,
}

impl DataPaths {
    /// The standard layout under one data directory.
    pub fn in_dir(dir: &Path) -> Self {
        Self {
            stations: dir.join("stations.csv"),
            measurements: dir.join("measurements.csv"),
            era5: dir.join("era5.csv"),
            embeddings: dir.join("embeddings.csv"),
            patches: dir.join("patches"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct LoadOptions {
    pub dedup_km: f64,
    pub window: usize,
    /// Load the embeddings file when it exists.
    pub embeddings: bool,
}

impl Default for LoadOptions {
    fn default() -> Self {
        Self {
            dedup_km: 1.0,
            window: crate::features::spectral::DEFAULT_WINDOW,
            embeddings: true,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct IngestSummary {
    pub vegetated_stations: usize,
    pub retained_stations: usize,
    pub measurements: usize,
    pub unknown_station_rows: usize,
    pub s2_patches: usize,
    pub s1_patches: usize,
    pub era5_records: usize,
    pub embedding_records: usize,
}

/// Every table of one dataset, validated and screened.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub stations: StationTable,
    pub measurements: MeasurementTable,
    pub era5: Era5Table,
    pub embeddings: Option<EmbeddingTable>,
    pub index: AcquisitionIndex,
    pub summary: IngestSummary,
}

/// Loads all sources, removes stations within `dedup_km` of each other and
/// drops their measurements.
pub fn load_dataset(paths: &DataPaths, opts: &LoadOptions) -> Result<Dataset> {
    let vegetated = load_stations(&paths.stations)?;
    let MeasurementLoad {
        table: mut measurements,
        unknown_station_rows,
    } = load_measurements(&paths.measurements, &vegetated)?;
    let stations = dedup_stations(&vegetated, &measurements, opts.dedup_km)?;
    measurements.retain_stations(&stations);

    let (era5, embeddings) = rayon::join(
        || load_era5(&paths.era5),
        || -> Result<Option<EmbeddingTable>> {
            if opts.embeddings && paths.embeddings.is_file() {
                load_embeddings(&paths.embeddings).map(Some)
            } else {
                Ok(None)
            }
        },
    );
    let (era5, embeddings) = (era5?, embeddings?);
    let (index, _) = build_index(&paths.patches, &stations, opts.window)?;

    let summary = IngestSummary {
        vegetated_stations: vegetated.len(),
        retained_stations: stations.len(),
        measurements: measurements.len(),
        unknown_station_rows,
        s2_patches: index.count(Sensor::S2),
        s1_patches: index.count(Sensor::S1),
        era5_records: era5.len(),
        embedding_records: embeddings.as_ref().map_or(0, |e| e.len()),
    };
    Ok(Dataset {
        stations,
        measurements,
        era5,
        embeddings,
        index,
        summary,
    })
}
