use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use super::{Date, LatLon};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LandCover {
    Cropland,
    TreeCover,
    Grassland,
    SparseVegetation,
    Other,
}

impl LandCover {
    pub fn is_vegetated(self) -> bool {
        !matches!(self, LandCover::Other)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            LandCover::Cropland => "cropland",
            LandCover::TreeCover => "tree_cover",
            LandCover::Grassland => "grassland",
            LandCover::SparseVegetation => "sparse_vegetation",
            LandCover::Other => "other",
        }
    }
}

impl FromStr for LandCover {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "cropland" => Ok(LandCover::Cropland),
            "tree_cover" => Ok(LandCover::TreeCover),
            "grassland" => Ok(LandCover::Grassland),
            "sparse_vegetation" => Ok(LandCover::SparseVegetation),
            "other" => Ok(LandCover::Other),
            other => Err(Error::invalid("land_cover", format!("unknown class {other:?}"))),
        }
    }
}

impl fmt::Display for LandCover {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Station {
    pub station_id: String,
    pub network: String,
    pub location: LatLon,
    pub land_cover: LandCover,
}

impl Station {
    pub fn new(
        station_id: impl Into<String>,
        network: impl Into<String>,
        lat: f64,
        lon: f64,
        land_cover: LandCover,
    ) -> Result<Self> {
        let station_id = station_id.into();
        if station_id.trim().is_empty() {
            return Err(Error::invalid("station_id", "empty"));
        }
        Ok(Self {
            station_id,
            network: network.into(),
            location: LatLon::new(lat, lon)?,
            land_cover,
        })
    }
}

/// Stations in file order with unique ids.
#[derive(Debug, Clone, Default)]
pub struct StationTable {
    stations: Vec<Station>,
    by_id: HashMap<String, usize>,
}

impl StationTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_stations(stations: impl IntoIterator<Item = Station>) -> Result<Self> {
        let mut table = Self::new();
        for s in stations {
            table.push(s)?;
        }
        Ok(table)
    }

    pub fn push(&mut self, station: Station) -> Result<()> {
        if self.by_id.contains_key(&station.station_id) {
            return Err(Error::invalid(
                "station_id",
                format!("duplicate id {:?}", station.station_id),
            ));
        }
        self.by_id.insert(station.station_id.clone(), self.stations.len());
        self.stations.push(station);
        Ok(())
    }

    pub fn get(&self, id: &str) -> Option<&Station> {
        self.by_id.get(id).map(|&i| &self.stations[i])
    }

    pub fn contains(&self, id: &str) -> bool {
        self.by_id.contains_key(id)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Station> {
        self.stations.iter()
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.stations.iter().map(|s| s.station_id.as_str())
    }

    pub fn len(&self) -> usize {
        self.stations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stations.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Measurement {
    pub station_id: String,
    pub date: Date,
    /// Volumetric soil moisture, m³/m³.
    pub sm: f64,
}

impl Measurement {
    pub fn new(station_id: impl Into<String>, date: Date, sm: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&sm) {
            return Err(Error::invalid("sm", format!("{sm} outside [0, 1]")));
        }
        Ok(Self {
            station_id: station_id.into(),
            date,
            sm,
        })
    }
}

/// Measurements keyed by `(station_id, date)`, iterated in key order.
#[derive(Debug, Clone, Default)]
pub struct MeasurementTable {
    rows: BTreeMap<(String, Date), f64>,
}

impl MeasurementTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts a measurement; returns `false` if the key already exists.
    pub fn insert(&mut self, m: Measurement) -> bool {
        use std::collections::btree_map::Entry;
        match self.rows.entry((m.station_id, m.date)) {
            Entry::Occupied(_) => false,
            Entry::Vacant(v) => {
                v.insert(m.sm);
                true
            }
        }
    }

    pub fn get(&self, station_id: &str, date: Date) -> Option<f64> {
        self.rows.get(&(station_id.to_string(), date)).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = Measurement> + '_ {
        self.rows.iter().map(|((id, date), &sm)| Measurement {
            station_id: id.clone(),
            date: *date,
            sm,
        })
    }

    pub fn count_by_station(&self) -> HashMap<&str, usize> {
        let mut counts = HashMap::new();
        for (id, _) in self.rows.keys() {
            *counts.entry(id.as_str()).or_insert(0) += 1;
        }
        counts
    }

    /// Keeps only rows for stations present in `stations`.
    pub fn retain_stations(&mut self, stations: &StationTable) {
        self.rows.retain(|(id, _), _| stations.contains(id));
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}
