//! Turning matched samples into a numeric design matrix.

mod assemble;
mod era5_stack;
pub mod spectral;

use std::io::Write;
use std::path::Path;

use crate::domain::Date;
use crate::error::{Error, Result};

pub use assemble::{assemble, column_names, Assembled, FeatureBlocks};
pub use era5_stack::{era5_columns, era5_lag_stack, MAX_LOOKBACK};
pub use spectral::{
    band_means, sar_features, spectral_indices, temporal_dynamics, BandMeans, Dynamics, SarFeatures,
    SpectralIndices,
};

/// Row-major design matrix with named columns, a missing mask and per-row provenance.
///
/// Missing entries hold `NaN` and are flagged in the mask; they must be imputed
/// before any arithmetic.
#[derive(Debug, Clone)]
pub struct FeatureMatrix {
    columns: Vec<String>,
    values: Vec<f64>,
    missing: Vec<bool>,
    provenance: Vec<(String, Date)>,
}

impl PartialEq for FeatureMatrix {
    /// Missing cells compare equal regardless of their placeholder value.
    fn eq(&self, other: &Self) -> bool {
        self.columns == other.columns
            && self.missing == other.missing
            && self.provenance == other.provenance
            && self
                .values
                .iter()
                .zip(&other.values)
                .zip(&self.missing)
                .all(|((a, b), &m)| m || a == b)
    }
}

impl FeatureMatrix {
    pub fn new(columns: Vec<String>) -> Self {
        Self {
            columns,
            values: Vec::new(),
            missing: Vec::new(),
            provenance: Vec::new(),
        }
    }

    pub fn push_row(&mut self, row: &[Option<f64>], station_id: String, date: Date) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(Error::invalid(
                "row",
                format!("{} values for {} columns", row.len(), self.columns.len()),
            ));
        }
        for v in row {
            match v.filter(|x| x.is_finite()) {
                Some(x) => {
                    self.values.push(x);
                    self.missing.push(false);
                }
                None => {
                    self.values.push(f64::NAN);
                    self.missing.push(true);
                }
            }
        }
        self.provenance.push((station_id, date));
        Ok(())
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn n_rows(&self) -> usize {
        self.provenance.len()
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn get(&self, row: usize, col: usize) -> Option<f64> {
        let i = row * self.columns.len() + col;
        (!self.missing[i]).then(|| self.values[i])
    }

    pub fn is_missing(&self, row: usize, col: usize) -> bool {
        self.missing[row * self.columns.len() + col]
    }

    /// Raw row values; missing entries are `NaN`.
    pub fn row(&self, row: usize) -> &[f64] {
        let p = self.columns.len();
        &self.values[row * p..(row + 1) * p]
    }

    pub fn provenance(&self) -> &[(String, Date)] {
        &self.provenance
    }

    pub fn missing_count(&self) -> usize {
        self.missing.iter().filter(|&&m| m).count()
    }

    /// Per-column median of the non-missing values in `rows`; 0.0 for a column with none.
    pub fn column_medians(&self, rows: &[usize]) -> Vec<f64> {
        let mut buf = Vec::with_capacity(rows.len());
        (0..self.n_cols())
            .map(|c| {
                buf.clear();
                buf.extend(rows.iter().filter_map(|&r| self.get(r, c)));
                median(&mut buf).unwrap_or(0.0)
            })
            .collect()
    }

    /// Column-major copy of `rows` with missing entries replaced by `fill[col]`.
    pub fn imputed_columns(&self, rows: &[usize], fill: &[f64]) -> Vec<f64> {
        let (n, p) = (rows.len(), self.n_cols());
        let mut out = vec![0.0; n * p];
        for (i, &r) in rows.iter().enumerate() {
            for c in 0..p {
                let idx = r * p + c;
                out[c * n + i] = if self.missing[idx] { fill[c] } else { self.values[idx] };
            }
        }
        out
    }

    /// Keeps only the listed rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> FeatureMatrix {
        let p = self.n_cols();
        let mut out = FeatureMatrix::new(self.columns.clone());
        for &r in rows {
            out.values.extend_from_slice(&self.values[r * p..(r + 1) * p]);
            out.missing.extend_from_slice(&self.missing[r * p..(r + 1) * p]);
            out.provenance.push(self.provenance[r].clone());
        }
        out
    }

    /// Writes `station_id,date,<columns…>,sm`; missing values are empty fields.
    pub fn write_csv(&self, path: &Path, targets: &[f64]) -> Result<()> {
        let io = |e| Error::io(path, e);
        let file = std::fs::File::create(path).map_err(io)?;
        let mut w = std::io::BufWriter::new(file);
        write!(w, "station_id,date").map_err(io)?;
        for c in &self.columns {
            write!(w, ",{c}").map_err(io)?;
        }
        writeln!(w, ",sm").map_err(io)?;
        for r in 0..self.n_rows() {
            let (id, date) = &self.provenance[r];
            write!(w, "{id},{date}").map_err(io)?;
            for c in 0..self.n_cols() {
                match self.get(r, c) {
                    Some(v) => write!(w, ",{v}"),
                    None => write!(w, ","),
                }
                .map_err(io)?;
            }
            writeln!(w, ",{}", targets[r]).map_err(io)?;
        }
        w.flush().map_err(io)
    }

    /// Reads a file written by [`FeatureMatrix::write_csv`].
    pub fn read_csv(path: &Path) -> Result<(FeatureMatrix, Vec<f64>)> {
        let load = |line: u64, message: String| Error::Load {
            path: path.to_path_buf(),
            line,
            message,
        };
        let mut reader = csv::ReaderBuilder::new()
            .from_path(path)
            .map_err(|e| load(0, e.to_string()))?;
        let header: Vec<String> = reader
            .headers()
            .map_err(|e| load(1, e.to_string()))?
            .iter()
            .map(str::to_string)
            .collect();
        if header.len() < 3 || header[0] != "station_id" || header[1] != "date" || header.last().unwrap() != "sm" {
            return Err(load(1, "expected station_id,date,<columns…>,sm".into()));
        }
        let columns = header[2..header.len() - 1].to_vec();
        let mut matrix = FeatureMatrix::new(columns);
        let mut targets = Vec::new();
        for (i, rec) in reader.records().enumerate() {
            let line = i as u64 + 2;
            let rec = rec.map_err(|e| load(line, e.to_string()))?;
            let date = Date::parse(&rec[1]).map_err(|e| load(line, e.to_string()))?;
            let mut row = Vec::with_capacity(matrix.n_cols());
            for f in rec.iter().skip(2).take(matrix.n_cols()) {
                if f.is_empty() {
                    row.push(None);
                } else {
                    row.push(Some(f.parse::<f64>().map_err(|_| load(line, format!("bad number {f:?}")))?));
                }
            }
            let sm: f64 = rec[rec.len() - 1]
                .parse()
                .map_err(|_| load(line, "bad sm value".into()))?;
            matrix
                .push_row(&row, rec[0].to_string(), date)
                .map_err(|e| load(line, e.to_string()))?;
            targets.push(sm);
        }
        Ok((matrix, targets))
    }
}

pub(crate) fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_unstable_by(f64::total_cmp);
    let n = values.len();
    Some(if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> FeatureMatrix {
        let mut m = FeatureMatrix::new(vec!["a".into(), "b".into()]);
        let d = Date::from_epoch_day(0);
        m.push_row(&[Some(1.0), None], "S".into(), d).unwrap();
        m.push_row(&[Some(3.0), Some(10.0)], "S".into(), d).unwrap();
        m.push_row(&[Some(2.0), Some(f64::NAN)], "T".into(), d).unwrap();
        m
    }

    #[test]
    fn missing_mask_and_medians() {
        let m = sample();
        assert!(m.is_missing(0, 1));
        assert!(m.is_missing(2, 1));
        assert_eq!(m.missing_count(), 2);
        assert_eq!(m.column_medians(&[0, 1, 2]), vec![2.0, 10.0]);
        assert_eq!(m.column_medians(&[0]), vec![1.0, 0.0]);
        let dense = m.imputed_columns(&[0, 2], &[0.0, 7.0]);
        assert_eq!(dense, vec![1.0, 2.0, 7.0, 7.0]);
    }

    #[test]
    fn wrong_width_rejected() {
        let mut m = sample();
        assert!(m.push_row(&[Some(1.0)], "S".into(), Date::from_epoch_day(0)).is_err());
    }

    #[test]
    fn csv_round_trip_preserves_values_and_mask() {
        let m = sample();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("f.csv");
        m.write_csv(&p, &[0.1, 0.2, 0.3]).unwrap();
        let (back, y) = FeatureMatrix::read_csv(&p).unwrap();
        assert_eq!(back, m.select_rows(&[0, 1, 2]));
        assert_eq!(y, vec![0.1, 0.2, 0.3]);
    }

    #[test]
    fn even_median_averages() {
        assert_eq!(median(&mut [4.0, 1.0, 3.0, 2.0]), Some(2.5));
        assert_eq!(median(&mut []), None);
    }
}
