use std::collections::HashMap;
use std::path::Path;

use super::csvio::{self, parse_f64};
use crate::domain::Date;
use crate::error::{Error, Result};

/// The daily reanalysis variables, in column order.
pub const ERA5_VARIABLES: [&str; 13] = [
    "precip_total",
    "temp_air",
    "temp_skin",
    "temp_soil_l1",
    "evap_potential",
    "swv_l1",
    "pressure_surface",
    "temp_dewpoint",
    "leaf_area_index",
    "rad_solar_down",
    "rad_thermal_down",
    "wind_u10",
    "wind_v10",
];

pub const N_ERA5_VARIABLES: usize = ERA5_VARIABLES.len();

pub fn era5_header() -> Vec<&'static str> {
    let mut h = vec!["station_id", "date"];
    h.extend(ERA5_VARIABLES);
    h
}

#[derive(Debug, Clone, PartialEq)]
pub struct Era5Record {
    pub station_id: String,
    pub date: Date,
    pub values: [f64; N_ERA5_VARIABLES],
}

impl Era5Record {
    pub fn new(station_id: impl Into<String>, date: Date, values: [f64; N_ERA5_VARIABLES]) -> Result<Self> {
        for (name, &v) in ERA5_VARIABLES.iter().zip(&values) {
            if !v.is_finite() {
                return Err(Error::invalid(*name, "non-finite value"));
            }
            let ok = match *name {
                "temp_air" | "temp_skin" | "temp_soil_l1" | "temp_dewpoint" => v > 0.0,
                "swv_l1" => (0.0..=1.0).contains(&v),
                "leaf_area_index" => v >= 0.0,
                _ => true,
            };
            if !ok {
                return Err(Error::invalid(*name, format!("{v} out of physical range")));
            }
        }
        Ok(Self {
            station_id: station_id.into(),
            date,
            values,
        })
    }
}

#[derive(Debug, Clone, Default)]
pub struct Era5Table {
    by_station: HashMap<String, HashMap<Date, [f64; N_ERA5_VARIABLES]>>,
    len: usize,
}

impl Era5Table {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns `false` when `(station_id, date)` is already present.
    pub fn insert(&mut self, r: Era5Record) -> bool {
        let days = self.by_station.entry(r.station_id).or_default();
        if days.contains_key(&r.date) {
            return false;
        }
        days.insert(r.date, r.values);
        self.len += 1;
        true
    }

    pub fn get(&self, station_id: &str, date: Date) -> Option<&[f64; N_ERA5_VARIABLES]> {
        self.by_station.get(station_id)?.get(&date)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }
}

pub fn load_era5(path: &Path) -> Result<Era5Table> {
    let header = era5_header();
    let rows = csvio::open(path, &header)?;
    let mut table = Era5Table::new();
    rows.for_each(|line, rec| {
        let date = Date::parse(&rec[1])?;
        let mut values = [0.0; N_ERA5_VARIABLES];
        for (i, v) in values.iter_mut().enumerate() {
            *v = parse_f64(&rec[i + 2], ERA5_VARIABLES[i])?;
        }
        let record = Era5Record::new(&rec[0], date, values)?;
        if !table.insert(record) {
            return Err(Error::Load {
                path: path.to_path_buf(),
                line,
                message: format!("duplicate ERA5 record for ({}, {date})", &rec[0]),
            });
        }
        Ok(())
    })?;
    Ok(table)
}
