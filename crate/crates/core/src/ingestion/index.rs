use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::patch::{cloud_fraction, decode_patch, Orbit, Sensor};
use crate::domain::{Date, StationTable};
use crate::error::{Error, Result};
use crate::features::spectral::{band_means, BandMeans};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AcquisitionKey {
    pub station_id: String,
    pub sensor: Sensor,
    pub orbit: Orbit,
    pub date: Date,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AcquisitionEntry {
    /// Patch file this entry was read from, if any.
    pub path: Option<PathBuf>,
    /// SCL cloud fraction; present iff the sensor is S2.
    pub cloud_fraction: Option<f64>,
    /// Central-window band means, computed once at index time.
    pub means: BandMeans,
}

/// All known acquisitions, one entry per `(station, sensor, orbit, date)`.
#[derive(Debug, Clone, Default)]
pub struct AcquisitionIndex {
    entries: BTreeMap<AcquisitionKey, AcquisitionEntry>,
}

impl AcquisitionIndex {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, key: AcquisitionKey, entry: AcquisitionEntry) -> Result<()> {
        let ok = match key.sensor {
            Sensor::S2 => entry
                .cloud_fraction
                .is_some_and(|f| (0.0..=1.0).contains(&f)),
            Sensor::S1 => entry.cloud_fraction.is_none(),
        };
        if !ok {
            return Err(Error::invalid(
                "cloud_fraction",
                format!("must be a ratio for S2 and absent for S1 ({:?})", key),
            ));
        }
        if self.entries.contains_key(&key) {
            return Err(Error::invalid("acquisition", format!("duplicate key {key:?}")));
        }
        self.entries.insert(key, entry);
        Ok(())
    }

    pub fn get(&self, key: &AcquisitionKey) -> Option<&AcquisitionEntry> {
        self.entries.get(key)
    }

    /// Entries for one station and sensor, in key order (orbit, then date).
    pub fn station_sensor(
        &self,
        station_id: &str,
        sensor: Sensor,
    ) -> impl Iterator<Item = (&AcquisitionKey, &AcquisitionEntry)> {
        let lo = AcquisitionKey {
            station_id: station_id.to_string(),
            sensor,
            orbit: Orbit::None,
            date: Date::from_epoch_day(i32::MIN),
        };
        let hi = AcquisitionKey {
            station_id: station_id.to_string(),
            sensor,
            orbit: Orbit::Asc,
            date: Date::from_epoch_day(i32::MAX),
        };
        self.entries.range(lo..=hi)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&AcquisitionKey, &AcquisitionEntry)> {
        self.entries.iter()
    }

    pub fn count(&self, sensor: Sensor) -> usize {
        self.entries.keys().filter(|k| k.sensor == sensor).count()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// `patches/{station_id}/{sensor}/{date}_{orbit}.eopc`
pub fn patch_path(root: &Path, station_id: &str, sensor: Sensor, date: Date, orbit: Orbit) -> PathBuf {
    root.join(station_id)
        .join(sensor.as_str())
        .join(format!("{date}_{orbit}.eopc"))
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct IndexStats {
    pub patches: usize,
    /// Patch directories for stations absent from the station table.
    pub skipped_unknown_station: usize,
}

fn read_dir_sorted(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        out.push(entry.map_err(|e| Error::io(dir, e))?.path());
    }
    out.sort();
    Ok(out)
}

fn parse_file_name(path: &Path) -> Result<(Date, Orbit)> {
    let bad = || Error::invalid("patch file name", format!("{} is not {{date}}_{{orbit}}.eopc", path.display()));
    let stem = path.file_stem().and_then(|s| s.to_str()).ok_or_else(bad)?;
    let (date, orbit) = stem.rsplit_once('_').ok_or_else(bad)?;
    let date = Date::parse(date).map_err(|_| bad())?;
    let orbit = Orbit::parse(orbit).ok_or_else(bad)?;
    Ok((date, orbit))
}

/// Decodes every patch under `root` and indexes it with its cloud fraction and
/// band means. A missing `root` yields an empty index.
pub fn build_index(root: &Path, stations: &StationTable, window: usize) -> Result<(AcquisitionIndex, IndexStats)> {
    let mut stats = IndexStats::default();
    let mut files: Vec<(String, Sensor, Date, Orbit, PathBuf)> = Vec::new();
    if root.is_dir() {
        for station_dir in read_dir_sorted(root)? {
            if !station_dir.is_dir() {
                continue;
            }
            let station_id = station_dir
                .file_name()
                .and_then(|s| s.to_str())
                .unwrap_or_default()
                .to_string();
            if !stations.contains(&station_id) {
                stats.skipped_unknown_station += 1;
                continue;
            }
            for sensor in [Sensor::S2, Sensor::S1] {
                let dir = station_dir.join(sensor.as_str());
                if !dir.is_dir() {
                    continue;
                }
                for file in read_dir_sorted(&dir)? {
                    if file.extension().and_then(|e| e.to_str()) != Some("eopc") {
                        continue;
                    }
                    let (date, orbit) = parse_file_name(&file)?;
                    files.push((station_id.clone(), sensor, date, orbit, file));
                }
            }
        }
    }

    let decoded: Vec<Result<(AcquisitionKey, AcquisitionEntry)>> = files
        .into_par_iter()
        .map(|(station_id, sensor, date, orbit, path)| {
            let bytes = std::fs::read(&path).map_err(|e| Error::io(&path, e))?;
            let patch_err = |source| Error::Patch {
                path: path.clone(),
                source,
            };
            let patch = decode_patch(&bytes).map_err(patch_err)?;
            if patch.sensor() != sensor || patch.orbit() != orbit || patch.date() != date {
                return Err(Error::invalid(
                    "patch header",
                    format!(
                        "{}: header says {} {} {} but the path says {sensor} {orbit} {date}",
                        path.display(),
                        patch.sensor(),
                        patch.orbit(),
                        patch.date()
                    ),
                ));
            }
            let cloud = match sensor {
                Sensor::S2 => Some(cloud_fraction(&patch).map_err(patch_err)?),
                Sensor::S1 => None,
            };
            let means = band_means(&patch, window)?;
            Ok((
                AcquisitionKey {
                    station_id,
                    sensor,
                    orbit,
                    date,
                },
                AcquisitionEntry {
                    path: Some(path),
                    cloud_fraction: cloud,
                    means,
                },
            ))
        })
        .collect();

    let mut index = AcquisitionIndex::new();
    for item in decoded {
        let (key, entry) = item?;
        index.insert(key, entry)?;
        stats.patches += 1;
    }
    Ok((index, stats))
}
