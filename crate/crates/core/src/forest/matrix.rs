use crate::error::{Error, Result};

/// Dense column-major matrix of fully imputed features.
#[derive(Debug, Clone, PartialEq)]
pub struct ColMatrix {
    n_rows: usize,
    n_cols: usize,
    data: Vec<f64>,
}

impl ColMatrix {
    pub fn from_columns(n_rows: usize, n_cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n_rows * n_cols {
            return Err(Error::invalid(
                "matrix",
                format!("{} values for {n_rows}x{n_cols}", data.len()),
            ));
        }
        Ok(Self { n_rows, n_cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        let mut data = vec![0.0; n_rows * n_cols];
        for (r, row) in rows.iter().enumerate() {
            if row.len() != n_cols {
                return Err(Error::invalid("matrix", format!("row {r} has {} values, expected {n_cols}", row.len())));
            }
            for (c, &v) in row.iter().enumerate() {
                data[c * n_rows + r] = v;
            }
        }
        Ok(Self { n_rows, n_cols, data })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn column(&self, c: usize) -> &[f64] {
        &self.data[c * self.n_rows..(c + 1) * self.n_rows]
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[c * self.n_rows + r]
    }

    pub fn row(&self, r: usize) -> Vec<f64> {
        (0..self.n_cols).map(|c| self.get(r, c)).collect()
    }

    /// First column holding a non-finite value.
    pub fn first_non_finite_column(&self) -> Option<usize> {
        (0..self.n_cols).find(|&c| self.column(c).iter().any(|v| !v.is_finite()))
    }
}
