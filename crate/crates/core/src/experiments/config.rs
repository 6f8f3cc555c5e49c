use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::evaluation::DEFAULT_FOLDS;
use crate::features::{spectral::DEFAULT_WINDOW, MAX_LOOKBACK};
use crate::forest::{ForestParams, MaxFeatures};
use crate::ingestion::{DataPaths, LoadOptions};
use crate::matching::{DEFAULT_CLOSEST_WINDOW_DAYS, DEFAULT_MAX_CLOUD_FRACTION, DEFAULT_PREV_MAX_GAP_DAYS};

pub const FORMAT_VERSION: u32 = 1;

/// Everything an experiment run depends on besides the input files.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub data_dir: PathBuf,
    pub seed: u64,
    pub folds: usize,
    pub forest: ForestParams,
    /// Lookback used by the modality and embedding grids.
    pub era5_lookback: usize,
    pub lag_min: usize,
    pub lag_max: usize,
    pub window: usize,
    pub dedup_km: f64,
    pub closest_window_days: u32,
    pub max_cloud_fraction: f64,
    pub prev_max_gap_days: u32,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            data_dir: PathBuf::from("data"),
            seed: 42,
            folds: DEFAULT_FOLDS,
            forest: ForestParams::default(),
            era5_lookback: MAX_LOOKBACK,
            lag_min: 0,
            lag_max: MAX_LOOKBACK,
            window: DEFAULT_WINDOW,
            dedup_km: 1.0,
            closest_window_days: DEFAULT_CLOSEST_WINDOW_DAYS,
            max_cloud_fraction: DEFAULT_MAX_CLOUD_FRACTION,
            prev_max_gap_days: DEFAULT_PREV_MAX_GAP_DAYS,
        }
    }
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_key_values(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected key = value", i + 1)))?;
        let k = k.trim().to_string();
        if out.insert(k.clone(), v.trim().to_string()).is_some() {
            return Err(Error::Config(format!("line {}: duplicate key {k}", i + 1)));
        }
    }
    Ok(out)
}

fn parse<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::Config(format!("invalid value {v:?} for {key}")))
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::default();
        cfg.apply(&parse_key_values(&text)?)?;
        Ok(cfg)
    }

    pub fn apply(&mut self, kv: &BTreeMap<String, String>) -> Result<()> {
        for (k, v) in kv {
            match k.as_str() {
                "format_version" => {
                    let got: u32 = parse(k, v)?;
                    if got != FORMAT_VERSION {
                        return Err(Error::Config(format!("unsupported format_version {got}")));
                    }
                }
                "data_dir" => self.data_dir = PathBuf::from(v),
                "seed" => self.seed = parse(k, v)?,
                "folds" => self.folds = parse(k, v)?,
                "trees" => self.forest.n_trees = parse(k, v)?,
                "max_features" => self.forest.max_features = MaxFeatures::parse(v)?,
                "min_samples_split" => self.forest.min_samples_split = parse(k, v)?,
                "min_samples_leaf" => self.forest.min_samples_leaf = parse(k, v)?,
                "max_depth" => {
                    self.forest.max_depth = match v.as_str() {
                        "none" => None,
                        _ => Some(parse(k, v)?),
                    }
                }
                "bootstrap" => self.forest.bootstrap = parse(k, v)?,
                "era5_lookback" => self.era5_lookback = parse(k, v)?,
                "lag_min" => self.lag_min = parse(k, v)?,
                "lag_max" => self.lag_max = parse(k, v)?,
                "window" => self.window = parse(k, v)?,
                "dedup_km" => self.dedup_km = parse(k, v)?,
                "closest_window_days" => self.closest_window_days = parse(k, v)?,
                "max_cloud_fraction" => self.max_cloud_fraction = parse(k, v)?,
                "prev_max_gap_days" => self.prev_max_gap_days = parse(k, v)?,
                _ => return Err(Error::Config(format!("unknown config key {k}"))),
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.forest.validate()?;
        let bad = |m: String| Err(Error::Config(m));
        if self.folds < 2 {
            return bad(format!("folds must be at least 2, got {}", self.folds));
        }
        if self.era5_lookback > MAX_LOOKBACK || self.lag_max > MAX_LOOKBACK {
            return bad(format!("lookbacks must not exceed {MAX_LOOKBACK}"));
        }
        if self.lag_min > self.lag_max {
            return bad(format!("lag_min {} exceeds lag_max {}", self.lag_min, self.lag_max));
        }
        if self.window == 0 || self.window % 2 != 0 {
            return bad(format!("window must be a positive even size, got {}", self.window));
        }
        if !(self.dedup_km >= 0.0) {
            return bad("dedup_km must be non-negative".into());
        }
        if !(0.0..=1.0).contains(&self.max_cloud_fraction) {
            return bad("max_cloud_fraction must lie in [0, 1]".into());
        }
        Ok(())
    }

    /// Forest parameters with the run seed.
    pub fn forest_params(&self) -> ForestParams {
        ForestParams {
            seed: self.seed,
            ..self.forest
        }
    }

    pub fn data_paths(&self) -> DataPaths {
        DataPaths::in_dir(&self.data_dir)
    }

    pub fn load_options(&self, embeddings: bool) -> LoadOptions {
        LoadOptions {
            dedup_km: self.dedup_km,
            window: self.window,
            embeddings,
        }
    }

    /// The resolved configuration as `key = value` lines, readable by [`RunConfig::apply`].
    pub fn resolved(&self) -> String {
        let f = &self.forest;
        let lines = [
            ("format_version", FORMAT_VERSION.to_string()),
            ("data_dir", self.data_dir.display().to_string()),
            ("seed", self.seed.to_string()),
            ("folds", self.folds.to_string()),
            ("trees", f.n_trees.to_string()),
            ("max_features", f.max_features.label()),
            ("min_samples_split", f.min_samples_split.to_string()),
            ("min_samples_leaf", f.min_samples_leaf.to_string()),
            ("max_depth", f.max_depth.map_or("none".into(), |d| d.to_string())),
            ("bootstrap", f.bootstrap.to_string()),
            ("era5_lookback", self.era5_lookback.to_string()),
            ("lag_min", self.lag_min.to_string()),
            ("lag_max", self.lag_max.to_string()),
            ("window", self.window.to_string()),
            ("dedup_km", self.dedup_km.to_string()),
            ("closest_window_days", self.closest_window_days.to_string()),
            ("max_cloud_fraction", self.max_cloud_fraction.to_string()),
            ("prev_max_gap_days", self.prev_max_gap_days.to_string()),
        ];
        lines.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}
