//! Synthetic datasets with a known closed-form soil-moisture model.
//!
//! Per station the generator draws a slow NDVI trajectory, a two-state VH/VV
//! regime and daily ERA5 weather with isolated storms, then sets
//! `sm = clip(a0 + a1·ndvi + a2·ratio + a3·mean(precip[t−L*..=t]) + ε, 0, 1)`.
//! Patches are rendered so that central band means reproduce the true NDVI and
//! ratio; ascending SAR carries twice the descending noise.

use std::f64::consts::TAU;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::domain::{Date, RngStream};
use crate::error::{Error, Result};
use crate::features::spectral::{spectral_indices, BandMeans};
use crate::ingestion::{
    embeddings::embedding_column, encode_patch, patch_path, BandId, Orbit, Patch, Sensor, EMBEDDING_DIM, ERA5_VARIABLES,
    N_ERA5_VARIABLES,
};

pub const MANIFEST_FILE: &str = "synth_manifest.txt";

/// Days of ERA5 written before the first measurement, enough for the longest lookback.
const ERA5_LEAD_DAYS: i32 = 30;
const STATION_STREAM: u64 = 0x7379_6e00_0000_0000;
const SCRAMBLE_SEED: u64 = 0x5343_5241_4d42_4c45;
const SCRAMBLE_INPUTS: usize = 16;
/// Shortest VH/VV regime, after which a switch happens with the daily chance below.
const REGIME_MIN_DAYS: usize = 60;
const REGIME_SWITCH_CHANCE: f64 = 1.0 / 60.0;
/// Daily chance that a storm follows once the minimum spacing has elapsed.
const STORM_CHANCE: f64 = 0.1;
const STORM_MM: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmbeddingMode {
    /// Fixed random linear map of the 12 band means and 4 indices.
    Scramble,
    Zero,
    None,
}

impl EmbeddingMode {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "scramble" => Ok(Self::Scramble),
            "zero" => Ok(Self::Zero),
            "none" => Ok(Self::None),
            _ => Err(Error::Config(format!("unknown embedding mode {s:?}"))),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Scramble => "scramble",
            Self::Zero => "zero",
            Self::None => "none",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub stations: usize,
    pub seed: u64,
    /// Standard deviation of the additive sm noise ε (m³/m³).
    pub noise: f64,
    /// Precipitation memory L* in days.
    pub true_lag: usize,
    pub start: Date,
    pub days: usize,
    pub s2_revisit_days: usize,
    /// Revisit of the S1 orbits; both passes fall on the same day.
    pub s1_revisit_days: usize,
    pub patch_size: usize,
    /// Share of S2 acquisitions rendered above the cloud threshold.
    pub cloudy_share: f64,
    pub embeddings: EmbeddingMode,
    /// `a0..a3`.
    pub coefficients: [f64; 4],
    /// Log-normal σ on descending VH/VV per unit of `noise`.
    pub sar_noise_gain: f64,
    /// Ascending-to-descending SAR noise ratio.
    pub asc_noise_ratio: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            stations: 30,
            seed: 0,
            noise: 0.0,
            true_lag: 6,
            start: Date::from_ymd(2019, 1, 1).expect("valid date"),
            days: 240,
            s2_revisit_days: 5,
            s1_revisit_days: 6,
            patch_size: 32,
            cloudy_share: 0.15,
            embeddings: EmbeddingMode::Scramble,
            coefficients: [0.05, 0.05, 0.4, 0.03],
            sar_noise_gain: 5.0,
            asc_noise_ratio: 2.0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.stations == 0 {
            return bad("stations must be positive");
        }
        if !(self.noise >= 0.0 && self.noise.is_finite()) {
            return bad("noise must be a non-negative number");
        }
        if self.true_lag > crate::features::MAX_LOOKBACK {
            return bad("true lag exceeds the 20-day lookback");
        }
        if self.days == 0 || self.s2_revisit_days == 0 || self.s1_revisit_days == 0 {
            return bad("days and revisit periods must be positive");
        }
        if self.patch_size < crate::ingestion::patch::MIN_SIZE {
            return bad("patch size below the minimum");
        }
        if !(0.0..=1.0).contains(&self.cloudy_share) {
            return bad("cloudy share must lie in [0, 1]");
        }
        Ok(())
    }

    /// `key = value` lines describing the generative model.
    pub fn manifest(&self) -> String {
        let [a0, a1, a2, a3] = self.coefficients;
        let desc = self.noise * self.sar_noise_gain;
        format!(
            "format_version = 1\nseed = {}\nstations = {}\nstart = {}\ndays = {}\n\
             s2_revisit_days = {}\ns1_revisit_days = {}\npatch_size = {}\ncloudy_share = {}\n\
             embeddings = {}\na0 = {a0}\na1 = {a1}\na2 = {a2}\na3 = {a3}\ntrue_lag = {}\n\
             noise_sigma = {}\nsar_log_sigma_desc = {desc}\nsar_log_sigma_asc = {}\n\
             storm_mm = {STORM_MM}\nstorm_chance = {STORM_CHANCE}\nstorm_spacing_days = {}\n\
             ratio_regime_min_days = {REGIME_MIN_DAYS}\nratio_regime_switch_chance = {REGIME_SWITCH_CHANCE}\n",
            self.seed,
            self.stations,
            self.start,
            self.days,
            self.s2_revisit_days,
            self.s1_revisit_days,
            self.patch_size,
            self.cloudy_share,
            self.embeddings.as_str(),
            self.true_lag,
            self.noise,
            desc * self.asc_noise_ratio,
            self.true_lag + 1,
        )
    }
}

struct StationTruth {
    id: String,
    lat: f64,
    lon: f64,
    land_cover: &'static str,
    brightness: f64,
    nir: f64,
    ndvi_base: f64,
    ndvi_amp: f64,
    ndvi_phase: f64,
    ratio_base: f64,
    ratio_amp: f64,
    /// VH/VV regime per day from `start`, true for the high state.
    ratio_high: Vec<bool>,
    vv_db: f64,
    s2_offset: usize,
    s1_offset: usize,
}

impl StationTruth {
    fn draw(i: usize, cfg: &SynthConfig, rng: &mut RngStream) -> Self {
        const COVERS: [&str; 4] = ["cropland", "grassland", "tree_cover", "sparse_vegetation"];
        let u = |rng: &mut RngStream, lo: f64, hi: f64| lo + (hi - lo) * rng.uniform();
        Self {
            id: format!("SYN{i:03}"),
            // 0.1° grid, well beyond the 1 km dedup radius
            lat: 44.0 + (i / 20) as f64 * 0.1,
            lon: 2.0 + (i % 20) as f64 * 0.1,
            land_cover: COVERS[i % COVERS.len()],
            brightness: u(rng, 0.95, 1.05),
            nir: u(rng, 0.3, 0.34),
            ndvi_base: u(rng, 0.4, 0.5),
            ndvi_amp: u(rng, 0.15, 0.3),
            ndvi_phase: u(rng, 0.0, TAU),
            ratio_base: u(rng, 0.24, 0.26),
            ratio_amp: u(rng, 0.04, 0.06),
            ratio_high: regimes(rng, cfg.days),
            vv_db: u(rng, -11.5, -10.5),
            s2_offset: rng.below(cfg.s2_revisit_days),
            s1_offset: rng.below(cfg.s1_revisit_days),
        }
    }

    fn ndvi(&self, day: i32) -> f64 {
        self.ndvi_base + self.ndvi_amp * (TAU * day as f64 / 365.0 + self.ndvi_phase).sin()
    }

    fn ratio(&self, day: i32, start: i32) -> f64 {
        let sign = if self.ratio_high[(day - start) as usize] { 1.0 } else { -1.0 };
        self.ratio_base + sign * self.ratio_amp
    }

    /// Optical reflectances for a given NDVI, in `BandId::OPTICAL` order.
    fn reflectances(&self, ndvi: f64) -> [f64; 12] {
        let b = self.brightness;
        let nir = self.nir * b;
        let red = nir * (1.0 - ndvi) / (1.0 + ndvi);
        [
            0.05 * b,
            b * (0.05 + 0.03 * (1.0 - ndvi)),
            b * (0.07 + 0.03 * ndvi),
            red,
            0.5 * (red + nir) * 0.9,
            0.3 * red + 0.7 * nir,
            0.1 * red + 0.9 * nir,
            nir,
            nir * 1.02,
            0.4 * nir,
            b * (0.32 - 0.12 * ndvi),
            b * (0.22 - 0.12 * ndvi),
        ]
    }
}

fn optical_means(values: &[f64; 12]) -> BandMeans {
    let mut m = BandMeans::new();
    for (band, &v) in BandId::OPTICAL.iter().zip(values) {
        m.set(*band, v as f32 as f64);
    }
    m
}

/// The 16 standardized inputs to the embedding scramble.
fn scramble_inputs(means: &BandMeans) -> [f64; SCRAMBLE_INPUTS] {
    let mut x = [0.0; SCRAMBLE_INPUTS];
    for (i, band) in BandId::OPTICAL.iter().enumerate() {
        x[i] = (means.get(*band).unwrap_or(0.0) - 0.2) / 0.1;
    }
    let idx = spectral_indices(means);
    let [ndvi, ndwi, ndmi, msi] = idx.values().map(|v| v.unwrap_or(0.0));
    x[12] = ndvi / 0.5;
    x[13] = ndwi / 0.5;
    x[14] = ndmi / 0.5;
    x[15] = (msi - 1.0) / 0.5;
    x
}

fn scramble_matrix() -> Vec<[f64; SCRAMBLE_INPUTS]> {
    let mut rng = RngStream::new(SCRAMBLE_SEED, 0);
    (0..EMBEDDING_DIM)
        .map(|_| {
            let mut row = [0.0; SCRAMBLE_INPUTS];
            for w in row.iter_mut() {
                *w = rng.normal() / 4.0;
            }
            row
        })
        .collect()
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> Error + '_ {
    move |e| Error::io(path, e)
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    fs::write(path, bytes).map_err(io_err(path))
}

/// One day of weather; storm days are also visible in evaporation, radiation and topsoil water.
fn era5_row(rng: &mut RngStream, precip: f64) -> [f64; N_ERA5_VARIABLES] {
    let mut u = |lo: f64, hi: f64| lo + (hi - lo) * rng.uniform();
    let wet = precip > 0.0;
    let t = u(275.0, 300.0);
    [
        precip,
        t,
        t + u(-3.0, 3.0),
        t + u(-2.0, 2.0),
        if wet { u(0.0, 1.5) } else { u(2.0, 6.0) },
        if wet { u(0.35, 0.45) } else { u(0.1, 0.3) },
        u(95_000.0, 102_000.0),
        t - u(1.0, 10.0),
        u(0.5, 5.0),
        if wet { u(30.0, 120.0) } else { u(150.0, 300.0) },
        if wet { u(340.0, 400.0) } else { u(250.0, 330.0) },
        u(-6.0, 6.0),
        u(-6.0, 6.0),
    ]
}

/// Storm amounts per day. Storms are at least `true_lag + 1` days apart so a
/// precipitation window never holds more than one.
/// Two-state VH/VV regimes, each lasting at least `REGIME_MIN_DAYS`.
fn regimes(rng: &mut RngStream, n_days: usize) -> Vec<bool> {
    let mut high = rng.uniform() < 0.5;
    let mut held = rng.below(REGIME_MIN_DAYS);
    (0..n_days)
        .map(|_| {
            if held >= REGIME_MIN_DAYS && rng.uniform() < REGIME_SWITCH_CHANCE {
                high = !high;
                held = 0;
            }
            held += 1;
            high
        })
        .collect()
}

fn storms(rng: &mut RngStream, n_days: usize, true_lag: usize) -> Vec<f64> {
    let spacing = true_lag + 1;
    let mut precip = vec![0.0; n_days];
    let mut k = rng.below(spacing);
    while k < n_days {
        precip[k] = STORM_MM * (0.9 + 0.2 * rng.uniform());
        k += spacing;
        while rng.uniform() >= STORM_CHANCE {
            k += 1;
        }
    }
    precip
}

struct StationOutput {
    station_line: String,
    measurement_lines: String,
    era5_lines: String,
    embedding_lines: String,
    patches: Vec<(PathBuf, Vec<u8>)>,
}

fn generate_station(
    i: usize,
    cfg: &SynthConfig,
    root: &Path,
    scramble: &[[f64; SCRAMBLE_INPUTS]],
) -> Result<StationOutput> {
    let mut rng = RngStream::new(cfg.seed, STATION_STREAM + i as u64);
    let st = StationTruth::draw(i, cfg, &mut rng);
    let n = cfg.patch_size;
    let px = n * n;
    let [a0, a1, a2, a3] = cfg.coefficients;
    let start = cfg.start.epoch_day();
    let first = start - ERA5_LEAD_DAYS;
    let last = start + cfg.days as i32 - 1;

    let mut era5_lines = String::new();
    let precip = storms(&mut rng, (last - first + 1) as usize, cfg.true_lag);
    for (day, &rain) in (first..=last).zip(&precip) {
        let row = era5_row(&mut rng, rain);
        let vals: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        era5_lines.push_str(&format!("{},{},{}\n", st.id, Date::from_epoch_day(day), vals.join(",")));
    }

    let mut measurement_lines = String::new();
    for day in start..=last {
        let k = (day - first) as usize;
        let window = &precip[k - cfg.true_lag..=k];
        let p_mean = window.iter().sum::<f64>() / window.len() as f64;
        let eps = if cfg.noise > 0.0 { cfg.noise * rng.normal() } else { 0.0 };
        let sm = (a0 + a1 * st.ndvi(day) + a2 * st.ratio(day, start) + a3 * p_mean + eps).clamp(0.0, 1.0);
        measurement_lines.push_str(&format!("{},{},{}\n", st.id, Date::from_epoch_day(day), sm));
    }

    let speckle = |rng: &mut RngStream, value: f64, scale: f64| -> Vec<f32> {
        if scale == 0.0 {
            vec![value as f32; px]
        } else {
            (0..px).map(|_| (value * (1.0 + scale * rng.normal()).max(0.05)) as f32).collect()
        }
    };

    let mut patches = Vec::new();
    let mut embedding_lines = String::new();
    let mut day = start + st.s2_offset as i32;
    while day <= last {
        let date = Date::from_epoch_day(day);
        let cloudy = rng.uniform() < cfg.cloudy_share;
        let cover = if cloudy { 0.3 + 0.6 * rng.uniform() } else { 0.15 * rng.uniform() };
        let refl = st.reflectances(st.ndvi(day));
        let mut bands: Vec<(BandId, Vec<f32>)> = BandId::OPTICAL
            .iter()
            .zip(refl)
            .map(|(b, v)| (*b, speckle(&mut rng, v, cfg.noise)))
            .collect();
        let n_cloud = (cover * px as f64).round() as usize;
        let mut scl = vec![4.0f32; px];
        for j in rng.sample_without_replacement(px, n_cloud) {
            scl[j] = if rng.uniform() < 0.5 { 8.0 } else { 9.0 };
        }
        bands.push((BandId::Scl, scl));
        let patch = Patch::new(Sensor::S2, Orbit::None, date, n, n, bands).map_err(|e| Error::Patch {
            path: root.to_path_buf(),
            source: e,
        })?;
        patches.push((patch_path(root, &st.id, Sensor::S2, date, Orbit::None), encode_patch(&patch)));
        if !cloudy && cfg.embeddings != EmbeddingMode::None {
            let vector: Vec<f32> = match cfg.embeddings {
                EmbeddingMode::Zero => vec![0.0; EMBEDDING_DIM],
                _ => {
                    let x = scramble_inputs(&optical_means(&refl));
                    scramble
                        .iter()
                        .map(|w| w.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>() as f32)
                        .collect()
                }
            };
            let vals: Vec<String> = vector.iter().map(|v| v.to_string()).collect();
            embedding_lines.push_str(&format!("{},{},{}\n", st.id, date, vals.join(",")));
        }
        day += cfg.s2_revisit_days as i32;
    }

    let desc_sigma = cfg.noise * cfg.sar_noise_gain;
    let mut s1_days: Vec<(i32, Orbit)> = Vec::new();
    let mut day = start + st.s1_offset as i32;
    while day <= last {
        s1_days.push((day, Orbit::Desc));
        s1_days.push((day, Orbit::Asc));
        day += cfg.s1_revisit_days as i32;
    }
    for (day, orbit) in s1_days {
        let sigma = if orbit == Orbit::Asc { desc_sigma * cfg.asc_noise_ratio } else { desc_sigma };
        let ratio = st.ratio(day, start) * if sigma > 0.0 { (sigma * rng.normal()).exp() } else { 1.0 };
        let vv = 10f64.powf(st.vv_db / 10.0);
        let date = Date::from_epoch_day(day);
        let bands = vec![
            (BandId::Vv, speckle(&mut rng, vv, cfg.noise)),
            (BandId::Vh, speckle(&mut rng, vv * ratio, cfg.noise)),
        ];
        let patch = Patch::new(Sensor::S1, orbit, date, n, n, bands).map_err(|e| Error::Patch {
            path: root.to_path_buf(),
            source: e,
        })?;
        patches.push((patch_path(root, &st.id, Sensor::S1, date, orbit), encode_patch(&patch)));
    }

    Ok(StationOutput {
        station_line: format!("{},SYNTH,{},{},{}\n", st.id, st.lat, st.lon, st.land_cover),
        measurement_lines,
        era5_lines,
        embedding_lines,
        patches,
    })
}

/// Writes a complete dataset under `out` in the ingestion formats, plus a manifest
/// recording the generative parameters. Output is a pure function of `cfg`.
pub fn generate_synthetic(cfg: &SynthConfig, out: &Path) -> Result<()> {
    cfg.validate()?;
    fs::create_dir_all(out).map_err(io_err(out))?;
    let patch_root = out.join("patches");
    let scramble = scramble_matrix();
    let stations: Vec<StationOutput> = (0..cfg.stations)
        .into_par_iter()
        .map(|i| {
            let s = generate_station(i, cfg, &patch_root, &scramble)?;
            for (path, bytes) in &s.patches {
                write_file(path, bytes)?;
            }
            Ok(s)
        })
        .collect::<Result<_>>()?;

    let mut files: Vec<(&str, String)> = vec![
        ("stations.csv", "station_id,network,lat,lon,land_cover\n".to_string()),
        ("measurements.csv", "station_id,date,sm\n".to_string()),
        ("era5.csv", format!("station_id,date,{}\n", ERA5_VARIABLES.join(","))),
    ];
    if cfg.embeddings != EmbeddingMode::None {
        let cols: Vec<String> = (0..EMBEDDING_DIM).map(embedding_column).collect();
        files.push(("embeddings.csv", format!("station_id,date,{}\n", cols.join(","))));
    }
    for s in &stations {
        files[0].1.push_str(&s.station_line);
        files[1].1.push_str(&s.measurement_lines);
        files[2].1.push_str(&s.era5_lines);
        if let Some(f) = files.get_mut(3) {
            f.1.push_str(&s.embedding_lines);
        }
    }
    for (name, body) in files {
        write_file(&out.join(name), body.as_bytes())?;
    }
    let manifest = out.join(MANIFEST_FILE);
    let mut f = fs::File::create(&manifest).map_err(io_err(&manifest))?;
    f.write_all(cfg.manifest().as_bytes()).map_err(io_err(&manifest))?;
    Ok(())
}
