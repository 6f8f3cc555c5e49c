use std::collections::HashMap;
use std::path::Path;

use log::warn;

use super::csvio::{self, parse_f64};
use crate::domain::{
    haversine_unchecked, Date, LandCover, Measurement, MeasurementTable, Station,
    StationTable,
};
use crate::error::{Error, Result};

pub const STATIONS_HEADER: [&str; 5] = ["station_id", "network", "lat", "lon", "land_cover"];
pub const MEASUREMENTS_HEADER: [&str; 3] = ["station_id", "date", "sm"];

/// Loads the stations CSV, keeping only vegetated land-cover classes.
pub fn load_stations(path: &Path) -> Result<StationTable> {
    let rows = csvio::open(path, &STATIONS_HEADER)?;
    let mut table = StationTable::new();
    let mut seen: HashMap<String, u64> = HashMap::new();
    rows.for_each(|line, rec| {
        let id = rec[0].to_string();
        if let Some(first) = seen.get(&id) {
            return Err(Error::Load {
                path: path.to_path_buf(),
                line,
                message: format!("duplicate station_id {id:?} (first seen on line {first})"),
            });
        }
        seen.insert(id.clone(), line);
        let lat = parse_f64(&rec[2], "lat")?;
        let lon = parse_f64(&rec[3], "lon")?;
        let land_cover: LandCover = rec[4].parse()?;
        let station = Station::new(id, &rec[1], lat, lon, land_cover)?;
        if land_cover.is_vegetated() {
            table.push(station)?;
        }
        Ok(())
    })?;
    Ok(table)
}

/// Removes stations closer than `min_km` to an already-retained one.
///
/// Stations are visited by descending measurement count, then ascending id, so
/// the result does not depend on input order. The retained table keeps the
/// input order.
pub fn dedup_stations(
    stations: &StationTable,
    measurements: &MeasurementTable,
    min_km: f64,
) -> Result<StationTable> {
    if !(min_km > 0.0) {
        return Err(Error::invalid("min_km", format!("{min_km} must be positive")));
    }
    let counts = measurements.count_by_station();
    let mut order: Vec<&Station> = stations.iter().collect();
    order.sort_by(|a, b| {
        let ca = counts.get(a.station_id.as_str()).copied().unwrap_or(0);
        let cb = counts.get(b.station_id.as_str()).copied().unwrap_or(0);
        cb.cmp(&ca).then_with(|| a.station_id.cmp(&b.station_id))
    });
    let mut kept: Vec<&Station> = Vec::new();
    for s in order {
        let conflict = kept
            .iter()
            .any(|k| haversine_unchecked(k.location, s.location) < min_km);
        if !conflict {
            kept.push(s);
        }
    }
    let kept_ids: std::collections::HashSet<&str> =
        kept.iter().map(|s| s.station_id.as_str()).collect();
    StationTable::from_stations(
        stations
            .iter()
            .filter(|s| kept_ids.contains(s.station_id.as_str()))
            .cloned(),
    )
}

#[derive(Debug, Clone, Default)]
pub struct MeasurementLoad {
    pub table: MeasurementTable,
    /// Rows dropped because their station is not in the station table.
    pub unknown_station_rows: usize,
}

pub fn load_measurements(path: &Path, stations: &StationTable) -> Result<MeasurementLoad> {
    let rows = csvio::open(path, &MEASUREMENTS_HEADER)?;
    let mut out = MeasurementLoad::default();
    let mut lines: HashMap<(String, Date), u64> = HashMap::new();
    rows.for_each(|line, rec| {
        let id = &rec[0];
        let date = Date::parse(&rec[1])?;
        let sm = parse_f64(&rec[2], "sm")?;
        let m = Measurement::new(id, date, sm)?;
        if !stations.contains(id) {
            out.unknown_station_rows += 1;
            return Ok(());
        }
        if let Some(first) = lines.get(&(id.to_string(), date)) {
            return Err(Error::Load {
                path: path.to_path_buf(),
                line,
                message: format!(
                    "duplicate measurement for ({id}, {date}) on lines {first} and {line}"
                ),
            });
        }
        lines.insert((id.to_string(), date), line);
        out.table.insert(m);
        Ok(())
    })?;
    if out.unknown_station_rows > 0 {
        warn!(
            "{}: dropped {} rows for unknown stations",
            path.display(),
            out.unknown_station_rows
        );
    }
    Ok(out)
}
