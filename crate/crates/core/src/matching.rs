//! Temporal matching of satellite acquisitions to in-situ measurement dates.

use std::fmt;

use rayon::prelude::*;

use crate::domain::{Date, MeasurementTable};
use crate::ingestion::{AcquisitionIndex, AcquisitionKey, Orbit, Sensor};

pub const DEFAULT_CLOSEST_WINDOW_DAYS: u32 = 10;
pub const DEFAULT_PREV_MAX_GAP_DAYS: u32 = 30;
/// S2 acquisitions with a cloud fraction strictly above this are excluded.
pub const DEFAULT_MAX_CLOUD_FRACTION: f64 = 0.20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MatchKind {
    CurrentDay,
    Closest,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MatchStrategy {
    pub kind: MatchKind,
    /// Half-width of the CLOSEST search window; ignored by CURRENT_DAY.
    pub window_days: u32,
}

impl MatchStrategy {
    pub const fn current_day() -> Self {
        Self {
            kind: MatchKind::CurrentDay,
            window_days: 0,
        }
    }

    pub const fn closest(window_days: u32) -> Self {
        Self {
            kind: MatchKind::Closest,
            window_days,
        }
    }

    pub fn label(&self) -> &'static str {
        match self.kind {
            MatchKind::CurrentDay => "curr_day",
            MatchKind::Closest => "closest",
        }
    }
}

impl fmt::Display for MatchStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OrbitConfig {
    Asc,
    Desc,
    Both,
}

impl OrbitConfig {
    pub fn admits(self, orbit: Orbit) -> bool {
        matches!(
            (self, orbit),
            (OrbitConfig::Asc, Orbit::Asc)
                | (OrbitConfig::Desc, Orbit::Desc)
                | (OrbitConfig::Both, Orbit::Asc | Orbit::Desc)
        )
    }

    pub fn label(self) -> &'static str {
        match self {
            OrbitConfig::Asc => "ASC",
            OrbitConfig::Desc => "DESC",
            OrbitConfig::Both => "BOTH",
        }
    }
}

impl fmt::Display for OrbitConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// One acquisition in a candidate pool.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Acquisition {
    pub date: Date,
    pub orbit: Orbit,
}

/// Acquisitions of one station and sensor that pass the screens, sorted by
/// date (descending orbit first on equal dates).
///
/// S2 acquisitions with `cloud_fraction > max_cloud` are dropped; S1
/// acquisitions are filtered by `orbit_cfg`, which S2 ignores.
pub fn candidate_pool(
    index: &AcquisitionIndex,
    station_id: &str,
    sensor: Sensor,
    orbit_cfg: OrbitConfig,
    max_cloud: f64,
) -> Vec<Acquisition> {
    let mut pool: Vec<Acquisition> = index
        .station_sensor(station_id, sensor)
        .filter(|(key, entry)| match sensor {
            Sensor::S2 => entry.cloud_fraction.is_some_and(|f| f <= max_cloud),
            Sensor::S1 => orbit_cfg.admits(key.orbit),
        })
        .map(|(key, _)| Acquisition {
            date: key.date,
            orbit: key.orbit,
        })
        .collect();
    pool.sort();
    pool
}

/// Picks the acquisition for `target` from a date-sorted pool.
///
/// CLOSEST minimizes `|date - target|` within the window; equal distances go
/// to the earlier acquisition, then to the descending orbit.
pub fn match_one(pool: &[Acquisition], target: Date, strategy: MatchStrategy) -> Option<Acquisition> {
    let window = match strategy.kind {
        MatchKind::CurrentDay => 0,
        MatchKind::Closest => strategy.window_days as i64,
    };
    let lo = target.add_days(-(window as i32));
    let start = pool.partition_point(|a| a.date < lo);
    pool[start..]
        .iter()
        .take_while(|a| (a.date.days_since(target) as i64) <= window)
        .min_by_key(|a| {
            let delta = a.date.days_since(target);
            (delta.unsigned_abs(), delta > 0, a.orbit)
        })
        .copied()
}

/// Latest acquisition strictly before `main` and at most `max_gap_days` earlier.
pub fn previous_match(pool: &[Acquisition], main: Date, max_gap_days: u32) -> Option<Acquisition> {
    let end = pool.partition_point(|a| a.date < main);
    let latest = pool[..end].last()?;
    if main.days_since(latest.date) as i64 > max_gap_days as i64 {
        return None;
    }
    // same-date acquisitions sort descending orbit first
    pool[..end].iter().find(|a| a.date == latest.date).copied()
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchedSample {
    pub station_id: String,
    pub target_date: Date,
    /// In-situ soil moisture on `target_date`.
    pub sm: f64,
    pub s2: Option<Acquisition>,
    pub s2_prev: Option<Acquisition>,
    pub s1: Option<Acquisition>,
    pub s1_prev: Option<Acquisition>,
}

impl MatchedSample {
    pub fn s2_key(&self) -> Option<AcquisitionKey> {
        self.s2.map(|a| key(&self.station_id, Sensor::S2, a))
    }

    pub fn s1_key(&self) -> Option<AcquisitionKey> {
        self.s1.map(|a| key(&self.station_id, Sensor::S1, a))
    }
}

pub fn key(station_id: &str, sensor: Sensor, a: Acquisition) -> AcquisitionKey {
    AcquisitionKey {
        station_id: station_id.to_string(),
        sensor,
        orbit: a.orbit,
        date: a.date,
    }
}

/// Which modalities a dataset needs and how each is matched.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchPlan {
    pub s2: Option<MatchStrategy>,
    pub s1: Option<(MatchStrategy, OrbitConfig)>,
    pub max_cloud: f64,
    pub prev_max_gap_days: u32,
}

impl MatchPlan {
    pub fn new(s2: Option<MatchStrategy>, s1: Option<(MatchStrategy, OrbitConfig)>) -> Self {
        Self {
            s2,
            s1,
            max_cloud: DEFAULT_MAX_CLOUD_FRACTION,
            prev_max_gap_days: DEFAULT_PREV_MAX_GAP_DAYS,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SampleSet {
    /// Ordered by `(station_id, target_date)`.
    pub samples: Vec<MatchedSample>,
    /// Measurements dropped because a required modality had no match.
    pub dropped: usize,
}

/// Matches every measurement under `plan`, keeping those for which every
/// required modality matched.
pub fn build_samples(measurements: &MeasurementTable, index: &AcquisitionIndex, plan: &MatchPlan) -> SampleSet {
    let mut by_station: Vec<(String, Vec<(Date, f64)>)> = Vec::new();
    for m in measurements.iter() {
        match by_station.last_mut() {
            Some((id, rows)) if *id == m.station_id => rows.push((m.date, m.sm)),
            _ => by_station.push((m.station_id, vec![(m.date, m.sm)])),
        }
    }

    let per_station: Vec<SampleSet> = by_station
        .par_iter()
        .map(|(station_id, rows)| {
            let s2_pool = plan.s2.map(|_| {
                candidate_pool(index, station_id, Sensor::S2, OrbitConfig::Both, plan.max_cloud)
            });
            let s1_pool = plan
                .s1
                .map(|(_, orbit)| candidate_pool(index, station_id, Sensor::S1, orbit, plan.max_cloud));
            let mut out = SampleSet::default();
            for &(date, sm) in rows {
                let mut sample = MatchedSample {
                    station_id: station_id.clone(),
                    target_date: date,
                    sm,
                    s2: None,
                    s2_prev: None,
                    s1: None,
                    s1_prev: None,
                };
                let mut complete = true;
                if let (Some(strategy), Some(pool)) = (plan.s2, s2_pool.as_deref()) {
                    sample.s2 = match_one(pool, date, strategy);
                    sample.s2_prev = sample
                        .s2
                        .and_then(|m| previous_match(pool, m.date, plan.prev_max_gap_days));
                    complete &= sample.s2.is_some();
                }
                if let (Some((strategy, _)), Some(pool)) = (plan.s1, s1_pool.as_deref()) {
                    sample.s1 = match_one(pool, date, strategy);
                    sample.s1_prev = sample
                        .s1
                        .and_then(|m| previous_match(pool, m.date, plan.prev_max_gap_days));
                    complete &= sample.s1.is_some();
                }
                if complete {
                    out.samples.push(sample);
                } else {
                    out.dropped += 1;
                }
            }
            out
        })
        .collect();

    let mut merged = SampleSet::default();
    for set in per_station {
        merged.samples.extend(set.samples);
        merged.dropped += set.dropped;
    }
    merged
}
