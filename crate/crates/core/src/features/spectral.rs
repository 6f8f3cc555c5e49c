use crate::error::{Error, Result};
use crate::ingestion::patch::{BandId, Patch};

pub const DEFAULT_WINDOW: usize = 32;

/// Per-band mean over a patch's central block; `None` when unavailable.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BandMeans([Option<f64>; 15]);

impl BandMeans {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, band: BandId) -> Option<f64> {
        self.0[band as usize]
    }

    pub fn set(&mut self, band: BandId, value: f64) {
        self.0[band as usize] = Some(value);
    }

    pub fn with(mut self, band: BandId, value: f64) -> Self {
        self.set(band, value);
        self
    }
}

/// Arithmetic mean of every non-SCL band over the central `window`×`window` block,
/// ignoring non-finite pixels.
pub fn band_means(patch: &Patch, window: usize) -> Result<BandMeans> {
    if window == 0 || window % 2 != 0 {
        return Err(Error::invalid("window", format!("{window} must be a positive even integer")));
    }
    if window > patch.rows() || window > patch.cols() {
        return Err(Error::invalid(
            "window",
            format!("{window} exceeds patch size {}x{}", patch.rows(), patch.cols()),
        ));
    }
    let r0 = patch.rows() / 2 - window / 2;
    let c0 = patch.cols() / 2 - window / 2;
    let cols = patch.cols();
    let mut out = BandMeans::new();
    for &band in patch.bands() {
        if band == BandId::Scl {
            continue;
        }
        let pixels = patch.band(band).expect("declared band");
        let (mut sum, mut n) = (0.0f64, 0usize);
        for r in r0..r0 + window {
            for &v in &pixels[r * cols + c0..r * cols + c0 + window] {
                if v.is_finite() {
                    sum += v as f64;
                    n += 1;
                }
            }
        }
        if n > 0 {
            out.set(band, sum / n as f64);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SpectralIndices {
    pub ndvi: Option<f64>,
    pub ndwi: Option<f64>,
    pub ndmi: Option<f64>,
    pub msi: Option<f64>,
}

impl SpectralIndices {
    pub const NAMES: [&'static str; 4] = ["ndvi", "ndwi", "ndmi", "msi"];

    pub fn values(&self) -> [Option<f64>; 4] {
        [self.ndvi, self.ndwi, self.ndmi, self.msi]
    }
}

fn ratio(num: f64, den: f64) -> Option<f64> {
    (den != 0.0).then(|| num / den)
}

fn normalized_difference(a: Option<f64>, b: Option<f64>) -> Option<f64> {
    let (a, b) = (a?, b?);
    ratio(a - b, a + b)
}

/// NDVI, NDWI, NDMI and MSI from band means. Each index is missing on its own
/// when one of its bands is absent or its denominator is zero.
pub fn spectral_indices(means: &BandMeans) -> SpectralIndices {
    let b3 = means.get(BandId::B03);
    let b4 = means.get(BandId::B04);
    let b8 = means.get(BandId::B08);
    let b8a = means.get(BandId::B8A);
    let b11 = means.get(BandId::B11);
    SpectralIndices {
        ndvi: normalized_difference(b8, b4),
        ndwi: normalized_difference(b3, b8),
        ndmi: normalized_difference(b8, b11),
        msi: b11.zip(b8a).and_then(|(swir, nir)| ratio(swir, nir)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SarFeatures {
    pub vv_db: f64,
    pub vh_db: f64,
    /// Cross-polarization ratio VH/VV in linear power.
    pub ratio: f64,
}

impl SarFeatures {
    pub const NAMES: [&'static str; 3] = ["vv_db", "vh_db", "vh_vv_ratio"];

    pub fn values(&self) -> [f64; 3] {
        [self.vv_db, self.vh_db, self.ratio]
    }
}

/// Backscatter in dB and the VH/VV ratio; `None` unless both mean powers are positive.
pub fn sar_features(means: &BandMeans) -> Option<SarFeatures> {
    let vv = means.get(BandId::Vv)?;
    let vh = means.get(BandId::Vh)?;
    if !(vv > 0.0 && vh > 0.0) {
        return None;
    }
    Some(SarFeatures {
        vv_db: 10.0 * vv.log10(),
        vh_db: 10.0 * vh.log10(),
        ratio: vh / vv,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dynamics {
    pub diff: f64,
    /// Change per day.
    pub rate: f64,
}

/// First difference and daily rate of change; `None` without a previous value.
pub fn temporal_dynamics(curr: Option<f64>, prev: Option<f64>, gap_days: i32) -> Option<Dynamics> {
    let (curr, prev) = (curr?, prev?);
    if gap_days < 1 {
        return None;
    }
    let diff = curr - prev;
    Some(Dynamics {
        diff,
        rate: diff / gap_days as f64,
    })
}
