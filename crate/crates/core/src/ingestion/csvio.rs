use std::fs::File;
use std::path::Path;

use crate::error::{Error, Result};

pub(crate) struct CsvRows {
    path: std::path::PathBuf,
    reader: csv::Reader<File>,
    width: usize,
}

/// Opens a CSV file and checks its header against `expected` exactly.
pub(crate) fn open(path: &Path, expected: &[&str]) -> Result<CsvRows> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let header = reader.headers().map_err(|e| csv_error(path, 1, e))?.clone();
    let got: Vec<&str> = header.iter().collect();
    if got != expected {
        let missing: Vec<&str> = expected.iter().copied().filter(|c| !got.contains(c)).collect();
        let message = if missing.is_empty() {
            format!("header does not match expected columns {}", expected.join(","))
        } else {
            format!("missing column(s) {}", missing.join(","))
        };
        return Err(Error::Load {
            path: path.to_path_buf(),
            line: 1,
            message,
        });
    }
    Ok(CsvRows {
        path: path.to_path_buf(),
        reader,
        width: expected.len(),
    })
}

fn csv_error(path: &Path, line: u64, e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line()).unwrap_or(line);
    Error::Load {
        path: path.to_path_buf(),
        line,
        message: e.to_string(),
    }
}

impl CsvRows {
    /// Calls `f(line, record)` for every data row; rows with the wrong field count are errors.
    pub(crate) fn for_each(
        mut self,
        mut f: impl FnMut(u64, &csv::StringRecord) -> Result<()>,
    ) -> Result<()> {
        let mut record = csv::StringRecord::new();
        loop {
            match self.reader.read_record(&mut record) {
                Ok(false) => return Ok(()),
                Ok(true) => {}
                Err(e) => return Err(csv_error(&self.path, 0, e)),
            }
            let line = record.position().map(|p| p.line()).unwrap_or(0);
            if record.len() != self.width {
                return Err(self.error(
                    line,
                    format!("expected {} columns, found {}", self.width, record.len()),
                ));
            }
            f(line, &record).map_err(|e| match e {
                Error::Load { .. } => e,
                other => self.error(line, other.to_string()),
            })?;
        }
    }

    pub(crate) fn error(&self, line: u64, message: impl Into<String>) -> Error {
        Error::Load {
            path: self.path.clone(),
            line,
            message: message.into(),
        }
    }
}

pub(crate) fn parse_f64(field: &str, name: &str) -> Result<f64> {
    let v: f64 = field
        .parse()
        .map_err(|_| Error::invalid(name, format!("not a number: {field:?}")))?;
    if !v.is_finite() {
        return Err(Error::invalid(name, format!("non-finite value {field:?}")));
    }
    Ok(v)
}
