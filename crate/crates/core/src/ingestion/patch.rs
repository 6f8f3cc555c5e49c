//! Multiband image patches and the `EOPC` binary codec.
//!
//! Layout (little-endian):
//!
//! ```text
//! magic      4   "EOPC"
//! version    u16 1
//! sensor     u8  1 = S2, 2 = S1
//! orbit      u8  0 = none, 1 = ASC, 2 = DESC
//! date       i32 days since 1970-01-01
//! rows       u16
//! cols       u16
//! band_count u8
//! bands      band_count x u8 (B01 = 1 ... VH = 15)
//! pixels     band_count x rows x cols f32, band-major, row-major within band
//! ```

use std::fmt;

use thiserror::Error;

use crate::domain::Date;

pub const MAGIC: &[u8; 4] = b"EOPC";
pub const VERSION: u16 = 1;
pub const MIN_SIZE: usize = 16;
/// Patch edge length used for model inputs at full scale.
pub const MODEL_PATCH_SIZE: usize = 256;

const HEADER_LEN: usize = 4 + 2 + 1 + 1 + 4 + 2 + 2 + 1;

/// SCL classes counted as cloud: shadow, medium/high probability cloud, thin cirrus.
pub const SCL_CLOUD_CLASSES: [u8; 4] = [3, 8, 9, 10];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PatchError {
    #[error("not a patch file")]
    NotAPatch,
    #[error("unsupported patch version {0}")]
    UnsupportedVersion(u16),
    #[error("unknown sensor code {0}")]
    UnknownSensor(u8),
    #[error("unknown orbit code {0}")]
    UnknownOrbit(u8),
    #[error("unknown band code {0}")]
    UnknownBand(u8),
    #[error("band {band} not allowed for sensor {sensor}")]
    BandSensorMismatch { sensor: Sensor, band: BandId },
    #[error("orbit {orbit} not allowed for sensor {sensor}")]
    OrbitSensorMismatch { sensor: Sensor, orbit: Orbit },
    #[error("band {0} declared twice")]
    DuplicateBand(BandId),
    #[error("patch must be square with edge >= {MIN_SIZE}, got {rows}x{cols}")]
    BadShape { rows: usize, cols: usize },
    #[error("patch has no bands")]
    NoBands,
    #[error("band {band}: expected {expected} pixels, got {actual}")]
    PixelCount {
        band: BandId,
        expected: usize,
        actual: usize,
    },
    #[error("truncated or oversized patch: expected {expected} bytes, got {actual}")]
    Truncated { expected: usize, actual: usize },
    #[error("required band {0} missing")]
    MissingBand(BandId),
    #[error("operation requires a {expected} patch, got {actual}")]
    WrongSensor { expected: Sensor, actual: Sensor },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sensor {
    S2,
    S1,
}

impl Sensor {
    pub fn code(self) -> u8 {
        match self {
            Sensor::S2 => 1,
            Sensor::S1 => 2,
        }
    }

    pub fn from_code(code: u8) -> Result<Self, PatchError> {
        match code {
            1 => Ok(Sensor::S2),
            2 => Ok(Sensor::S1),
            c => Err(PatchError::UnknownSensor(c)),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Sensor::S2 => "S2",
            Sensor::S1 => "S1",
        }
    }
}

impl fmt::Display for Sensor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Pass direction. `Desc` orders before `Asc` so that mixed-orbit ties resolve to descending.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Orbit {
    None,
    Desc,
    Asc,
}

impl Orbit {
    pub fn code(self) -> u8 {
        match self {
            Orbit::None => 0,
            Orbit::Asc => 1,
            Orbit::Desc => 2,
        }
    }

    pub fn from_code(code: u8) -> Result<Self, PatchError> {
        match code {
            0 => Ok(Orbit::None),
            1 => Ok(Orbit::Asc),
            2 => Ok(Orbit::Desc),
            c => Err(PatchError::UnknownOrbit(c)),
        }
    }

    /// Token used in patch file names.
    pub fn as_str(self) -> &'static str {
        match self {
            Orbit::None => "none",
            Orbit::Asc => "asc",
            Orbit::Desc => "desc",
        }
    }

    pub fn parse(token: &str) -> Option<Self> {
        match token.to_ascii_lowercase().as_str() {
            "none" => Some(Orbit::None),
            "asc" => Some(Orbit::Asc),
            "desc" => Some(Orbit::Desc),
            _ => None,
        }
    }
}

impl fmt::Display for Orbit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BandId {
    B01,
    B02,
    B03,
    B04,
    B05,
    B06,
    B07,
    B08,
    B8A,
    B09,
    B11,
    B12,
    Scl,
    Vv,
    Vh,
}

impl BandId {
    pub const ALL: [BandId; 15] = [
        BandId::B01,
        BandId::B02,
        BandId::B03,
        BandId::B04,
        BandId::B05,
        BandId::B06,
        BandId::B07,
        BandId::B08,
        BandId::B8A,
        BandId::B09,
        BandId::B11,
        BandId::B12,
        BandId::Scl,
        BandId::Vv,
        BandId::Vh,
    ];

    /// The twelve S2 surface-reflectance bands, in code order.
    pub const OPTICAL: [BandId; 12] = [
        BandId::B01,
        BandId::B02,
        BandId::B03,
        BandId::B04,
        BandId::B05,
        BandId::B06,
        BandId::B07,
        BandId::B08,
        BandId::B8A,
        BandId::B09,
        BandId::B11,
        BandId::B12,
    ];

    pub fn code(self) -> u8 {
        self as u8 + 1
    }

    pub fn from_code(code: u8) -> Result<Self, PatchError> {
        Self::ALL
            .get((code as usize).wrapping_sub(1))
            .copied()
            .ok_or(PatchError::UnknownBand(code))
    }

    pub fn name(self) -> &'static str {
        match self {
            BandId::B01 => "B01",
            BandId::B02 => "B02",
            BandId::B03 => "B03",
            BandId::B04 => "B04",
            BandId::B05 => "B05",
            BandId::B06 => "B06",
            BandId::B07 => "B07",
            BandId::B08 => "B08",
            BandId::B8A => "B8A",
            BandId::B09 => "B09",
            BandId::B11 => "B11",
            BandId::B12 => "B12",
            BandId::Scl => "SCL",
            BandId::Vv => "VV",
            BandId::Vh => "VH",
        }
    }

    pub fn allowed_for(self, sensor: Sensor) -> bool {
        match sensor {
            Sensor::S2 => !matches!(self, BandId::Vv | BandId::Vh),
            Sensor::S1 => matches!(self, BandId::Vv | BandId::Vh),
        }
    }
}

impl fmt::Display for BandId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A decoded square multiband patch. Pixels are stored band-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Patch {
    sensor: Sensor,
    orbit: Orbit,
    date: Date,
    rows: usize,
    cols: usize,
    bands: Vec<BandId>,
    pixels: Vec<f32>,
}

impl Patch {
    /// Builds a patch from per-band pixel grids, checking every invariant.
    pub fn new(
        sensor: Sensor,
        orbit: Orbit,
        date: Date,
        rows: usize,
        cols: usize,
        bands: Vec<(BandId, Vec<f32>)>,
    ) -> Result<Self, PatchError> {
        let (ids, grids): (Vec<BandId>, Vec<Vec<f32>>) = bands.into_iter().unzip();
        let n = rows * cols;
        Self::check_header(sensor, orbit, rows, cols, &ids)?;
        let mut pixels = Vec::with_capacity(n * ids.len());
        for (band, grid) in ids.iter().zip(grids) {
            if grid.len() != n {
                return Err(PatchError::PixelCount {
                    band: *band,
                    expected: n,
                    actual: grid.len(),
                });
            }
            pixels.extend_from_slice(&grid);
        }
        Ok(Self {
            sensor,
            orbit,
            date,
            rows,
            cols,
            bands: ids,
            pixels,
        })
    }

    fn check_header(
        sensor: Sensor,
        orbit: Orbit,
        rows: usize,
        cols: usize,
        bands: &[BandId],
    ) -> Result<(), PatchError> {
        let orbit_ok = match sensor {
            Sensor::S2 => orbit == Orbit::None,
            Sensor::S1 => orbit != Orbit::None,
        };
        if !orbit_ok {
            return Err(PatchError::OrbitSensorMismatch { sensor, orbit });
        }
        if rows != cols || rows < MIN_SIZE || rows > u16::MAX as usize {
            return Err(PatchError::BadShape { rows, cols });
        }
        if bands.is_empty() || bands.len() > u8::MAX as usize {
            return Err(PatchError::NoBands);
        }
        for (i, band) in bands.iter().enumerate() {
            if !band.allowed_for(sensor) {
                return Err(PatchError::BandSensorMismatch {
                    sensor,
                    band: *band,
                });
            }
            if bands[..i].contains(band) {
                return Err(PatchError::DuplicateBand(*band));
            }
        }
        Ok(())
    }

    pub fn sensor(&self) -> Sensor {
        self.sensor
    }

    pub fn orbit(&self) -> Orbit {
        self.orbit
    }

    pub fn date(&self) -> Date {
        self.date
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn bands(&self) -> &[BandId] {
        &self.bands
    }

    /// Row-major pixels of one band.
    pub fn band(&self, id: BandId) -> Option<&[f32]> {
        let n = self.rows * self.cols;
        self.bands
            .iter()
            .position(|&b| b == id)
            .map(|i| &self.pixels[i * n..(i + 1) * n])
    }

    pub fn encoded_len(&self) -> usize {
        HEADER_LEN + self.bands.len() + self.pixels.len() * 4
    }
}

pub fn encode_patch(patch: &Patch) -> Vec<u8> {
    let mut out = Vec::with_capacity(patch.encoded_len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.push(patch.sensor.code());
    out.push(patch.orbit.code());
    out.extend_from_slice(&patch.date.epoch_day().to_le_bytes());
    out.extend_from_slice(&(patch.rows as u16).to_le_bytes());
    out.extend_from_slice(&(patch.cols as u16).to_le_bytes());
    out.push(patch.bands.len() as u8);
    out.extend(patch.bands.iter().map(|b| b.code()));
    for v in &patch.pixels {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_patch(bytes: &[u8]) -> Result<Patch, PatchError> {
    if bytes.len() < 4 || &bytes[..4] != MAGIC {
        return Err(PatchError::NotAPatch);
    }
    if bytes.len() < HEADER_LEN {
        return Err(PatchError::Truncated {
            expected: HEADER_LEN,
            actual: bytes.len(),
        });
    }
    let u16_at = |i: usize| u16::from_le_bytes([bytes[i], bytes[i + 1]]);
    let version = u16_at(4);
    if version != VERSION {
        return Err(PatchError::UnsupportedVersion(version));
    }
    let sensor = Sensor::from_code(bytes[6])?;
    let orbit = Orbit::from_code(bytes[7])?;
    let date = Date::from_epoch_day(i32::from_le_bytes([
        bytes[8], bytes[9], bytes[10], bytes[11],
    ]));
    let rows = u16_at(12) as usize;
    let cols = u16_at(14) as usize;
    let band_count = bytes[16] as usize;

    let expected = HEADER_LEN + band_count + band_count * rows * cols * 4;
    if bytes.len() < HEADER_LEN + band_count {
        return Err(PatchError::Truncated {
            expected,
            actual: bytes.len(),
        });
    }
    let bands = bytes[HEADER_LEN..HEADER_LEN + band_count]
        .iter()
        .map(|&c| BandId::from_code(c))
        .collect::<Result<Vec<_>, _>>()?;
    Patch::check_header(sensor, orbit, rows, cols, &bands)?;
    if bytes.len() != expected {
        return Err(PatchError::Truncated {
            expected,
            actual: bytes.len(),
        });
    }
    let pixels = bytes[HEADER_LEN + band_count..]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect();
    Ok(Patch {
        sensor,
        orbit,
        date,
        rows,
        cols,
        bands,
        pixels,
    })
}

/// Fraction of pixels whose SCL class is one of [`SCL_CLOUD_CLASSES`].
pub fn cloud_fraction(patch: &Patch) -> Result<f64, PatchError> {
    if patch.sensor != Sensor::S2 {
        return Err(PatchError::WrongSensor {
            expected: Sensor::S2,
            actual: patch.sensor,
        });
    }
    let scl = patch
        .band(BandId::Scl)
        .ok_or(PatchError::MissingBand(BandId::Scl))?;
    let cloudy = scl
        .iter()
        .filter(|&&v| v.is_finite() && v >= 0.0 && SCL_CLOUD_CLASSES.contains(&(v.round() as u8)))
        .count();
    Ok(cloudy as f64 / scl.len() as f64)
}
