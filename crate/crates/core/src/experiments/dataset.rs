use std::fmt;

use crate::error::{Error, Result};
use crate::features::{FeatureBlocks, MAX_LOOKBACK};
use crate::matching::{MatchKind, MatchPlan, MatchStrategy, OrbitConfig};

/// One row of an experiment grid: which modalities and how each is matched.
/// ERA5 is always included.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DatasetSpec {
    /// Raw S2 band means plus the four indices.
    pub use_s2: bool,
    pub s2_strategy: MatchStrategy,
    pub use_s1: bool,
    pub s1_strategy: MatchStrategy,
    pub orbit: OrbitConfig,
    pub use_embeddings: bool,
    /// Indices without raw bands; only meaningful when `use_s2` is off.
    pub use_s2_indices: bool,
    pub era5_lookback: usize,
}

impl DatasetSpec {
    fn base(era5_lookback: usize) -> Self {
        Self {
            use_s2: false,
            s2_strategy: MatchStrategy::current_day(),
            use_s1: false,
            s1_strategy: MatchStrategy::current_day(),
            orbit: OrbitConfig::Desc,
            use_embeddings: false,
            use_s2_indices: false,
            era5_lookback,
        }
    }

    pub fn s2(strategy: MatchStrategy, era5_lookback: usize) -> Self {
        Self {
            use_s2: true,
            s2_strategy: strategy,
            ..Self::base(era5_lookback)
        }
    }

    pub fn s1(strategy: MatchStrategy, orbit: OrbitConfig, era5_lookback: usize) -> Self {
        Self::base(era5_lookback).with_s1(strategy, orbit)
    }

    /// Embeddings keyed by the same-day S2 acquisition.
    pub fn prithvi(era5_lookback: usize) -> Self {
        Self {
            use_embeddings: true,
            ..Self::base(era5_lookback)
        }
    }

    pub fn with_s1(self, strategy: MatchStrategy, orbit: OrbitConfig) -> Self {
        Self {
            use_s1: true,
            s1_strategy: strategy,
            orbit,
            ..self
        }
    }

    pub fn with_indices(self) -> Self {
        Self {
            use_s2_indices: true,
            ..self
        }
    }

    pub fn with_lookback(self, era5_lookback: usize) -> Self {
        Self { era5_lookback, ..self }
    }

    pub fn needs_s2(&self) -> bool {
        self.use_s2 || self.use_s2_indices || self.use_embeddings
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.use_s2 || self.use_s1 || self.use_embeddings) {
            return Err(Error::Config(format!("{self}: needs S2, S1 or embeddings")));
        }
        if self.era5_lookback > MAX_LOOKBACK {
            return Err(Error::Config(format!(
                "{self}: ERA5 lookback {} exceeds {MAX_LOOKBACK}",
                self.era5_lookback
            )));
        }
        Ok(())
    }

    /// Matching plan with the CLOSEST windows replaced by `closest_window_days`.
    pub fn match_plan(&self, closest_window_days: u32) -> MatchPlan {
        let widen = |s: MatchStrategy| match s.kind {
            MatchKind::Closest => MatchStrategy::closest(closest_window_days),
            MatchKind::CurrentDay => s,
        };
        MatchPlan::new(
            self.needs_s2().then(|| widen(self.s2_strategy)),
            self.use_s1.then(|| (widen(self.s1_strategy), self.orbit)),
        )
    }

    pub fn blocks(&self) -> FeatureBlocks {
        FeatureBlocks {
            s2_bands: self.use_s2,
            s2_indices: self.use_s2 || self.use_s2_indices,
            s1: self.use_s1,
            embeddings: self.use_embeddings,
            era5_lookback: self.era5_lookback,
        }
    }

    pub fn s2_label(&self) -> &'static str {
        if self.needs_s2() {
            self.s2_strategy.label()
        } else {
            "none"
        }
    }

    pub fn s1_label(&self) -> &'static str {
        if self.use_s1 {
            self.s1_strategy.label()
        } else {
            "none"
        }
    }

    pub fn orbit_label(&self) -> &'static str {
        if self.use_s1 {
            self.orbit.label()
        } else {
            "none"
        }
    }
}

/// Table-style label such as `S2_curr_day + S1_DESC_closest`. A same-day
/// modality is listed before a CLOSEST one; otherwise S2 comes first.
impl fmt::Display for DatasetSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s2 = if self.use_embeddings {
            let mut s = "Prithvi_S2".to_string();
            if self.use_s2_indices && !self.use_s2 {
                s.push_str(" + indices");
            }
            Some(s)
        } else if self.use_s2 || self.use_s2_indices {
            Some(format!("S2_{}", self.s2_strategy.label()))
        } else {
            None
        };
        let s1 = self
            .use_s1
            .then(|| format!("S1_{}_{}", self.orbit.label(), self.s1_strategy.label()));
        let parts = match (s2, s1) {
            (Some(a), Some(b)) => {
                let s1_first = !self.use_embeddings
                    && self.s1_strategy.kind == MatchKind::CurrentDay
                    && self.s2_strategy.kind == MatchKind::Closest;
                if s1_first {
                    vec![b, a]
                } else {
                    vec![a, b]
                }
            }
            (a, b) => a.into_iter().chain(b).collect(),
        };
        f.write_str(&parts.join(" + "))
    }
}

const ORBITS: [OrbitConfig; 3] = [OrbitConfig::Asc, OrbitConfig::Desc, OrbitConfig::Both];

/// The 13 modality and temporal-matching rows.
pub fn e1_grid(era5_lookback: usize) -> Vec<DatasetSpec> {
    let curr = MatchStrategy::current_day();
    let closest = MatchStrategy::closest(crate::matching::DEFAULT_CLOSEST_WINDOW_DAYS);
    let mut rows = vec![DatasetSpec::s2(curr, era5_lookback)];
    rows.extend(ORBITS.map(|o| DatasetSpec::s1(curr, o, era5_lookback)));
    rows.extend(ORBITS.map(|o| DatasetSpec::s2(closest, era5_lookback).with_s1(closest, o)));
    rows.extend(ORBITS.map(|o| DatasetSpec::s2(closest, era5_lookback).with_s1(curr, o)));
    rows.extend(ORBITS.map(|o| DatasetSpec::s2(curr, era5_lookback).with_s1(closest, o)));
    rows
}

/// The fixed configuration swept over ERA5 lookbacks and used by the embedding comparison.
pub fn best_temporal_config(era5_lookback: usize) -> DatasetSpec {
    DatasetSpec::s2(MatchStrategy::current_day(), era5_lookback).with_s1(
        MatchStrategy::closest(crate::matching::DEFAULT_CLOSEST_WINDOW_DAYS),
        OrbitConfig::Desc,
    )
}

pub fn e2_grid(lags: std::ops::RangeInclusive<usize>) -> Vec<DatasetSpec> {
    lags.map(best_temporal_config).collect()
}

/// Embedding rows: embeddings alone, with S1 DESC closest, and with indices and S1.
pub fn e3_grid(era5_lookback: usize) -> Vec<DatasetSpec> {
    let closest = MatchStrategy::closest(crate::matching::DEFAULT_CLOSEST_WINDOW_DAYS);
    let p = DatasetSpec::prithvi(era5_lookback);
    vec![
        p,
        p.with_s1(closest, OrbitConfig::Desc),
        p.with_indices().with_s1(closest, OrbitConfig::Desc),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::column_names;

    #[test]
    fn e1_labels() {
        let labels: Vec<String> = e1_grid(20).iter().map(|s| s.to_string()).collect();
        assert_eq!(
            labels,
            [
                "S2_curr_day",
                "S1_ASC_curr_day",
                "S1_DESC_curr_day",
                "S1_BOTH_curr_day",
                "S2_closest + S1_ASC_closest",
                "S2_closest + S1_DESC_closest",
                "S2_closest + S1_BOTH_closest",
                "S1_ASC_curr_day + S2_closest",
                "S1_DESC_curr_day + S2_closest",
                "S1_BOTH_curr_day + S2_closest",
                "S2_curr_day + S1_ASC_closest",
                "S2_curr_day + S1_DESC_closest",
                "S2_curr_day + S1_BOTH_closest",
            ]
        );
        for s in e1_grid(20) {
            s.validate().unwrap();
            assert!(column_names(&s.blocks()).contains(&"precip_total_lag20".to_string()));
        }
    }

    #[test]
    fn e3_labels_and_blocks() {
        let rows = e3_grid(20);
        let labels: Vec<String> = rows.iter().map(|s| s.to_string()).collect();
        assert_eq!(
            labels,
            ["Prithvi_S2", "Prithvi_S2 + S1_DESC_closest", "Prithvi_S2 + indices + S1_DESC_closest"]
        );
        assert_eq!(column_names(&rows[0].blocks()).len(), 768 + 273);
        let c = rows[2].blocks();
        assert!(c.s2_indices && !c.s2_bands && c.s1 && c.embeddings);
        assert!(rows.iter().all(|r| r.match_plan(10).s2 == Some(MatchStrategy::current_day())));
    }

    #[test]
    fn e2_lag_zero_has_thirteen_era5_columns() {
        let rows = e2_grid(0..=20);
        assert_eq!(rows.len(), 21);
        let cols = column_names(&rows[0].blocks());
        assert_eq!(cols.iter().filter(|c| c.contains("_lag")).count(), 13);
    }

    #[test]
    fn invalid_specs() {
        assert!(DatasetSpec::base(3).validate().is_err());
        assert!(DatasetSpec::s2(MatchStrategy::current_day(), 21).validate().is_err());
    }

    #[test]
    fn closest_window_override() {
        let plan = best_temporal_config(5).match_plan(4);
        assert_eq!(plan.s1.unwrap().0, MatchStrategy::closest(4));
        assert_eq!(plan.s2, Some(MatchStrategy::current_day()));
        assert_eq!(DatasetSpec::s1(MatchStrategy::current_day(), OrbitConfig::Asc, 0).match_plan(10).s2, None);
    }
}
