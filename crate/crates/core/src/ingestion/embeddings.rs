use std::collections::HashMap;
use std::path::Path;

use super::csvio;
use crate::domain::Date;
use crate::error::{Error, Result};

pub const EMBEDDING_DIM: usize = 768;

pub fn embedding_column(i: usize) -> String {
    format!("e{i:03}")
}

pub fn embeddings_header() -> Vec<String> {
    let mut h = vec!["station_id".to_string(), "date".to_string()];
    h.extend((0..EMBEDDING_DIM).map(embedding_column));
    h
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingRecord {
    pub station_id: String,
    pub date: Date,
    pub vector: Vec<f32>,
}

impl EmbeddingRecord {
    pub fn new(station_id: impl Into<String>, date: Date, vector: Vec<f32>) -> Result<Self> {
        if vector.len() != EMBEDDING_DIM {
            return Err(Error::invalid(
                "embedding",
                format!("expected {EMBEDDING_DIM} values, got {}", vector.len()),
            ));
        }
        if let Some(i) = vector.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(embedding_column(i), "non-finite value"));
        }
        Ok(Self {
            station_id: station_id.into(),
            date,
            vector,
        })
    }
}

/// Precomputed foundation-model embeddings keyed by `(station_id, date)`.
#[derive(Debug, Clone, Default)]
pub struct EmbeddingTable {
    by_station: HashMap<String, HashMap<Date, Box<[f32]>>>,
    len: usize,
}

impl EmbeddingTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, r: EmbeddingRecord) -> bool {
        let days = self.by_station.entry(r.station_id).or_default();
        if days.contains_key(&r.date) {
            return false;
        }
        days.insert(r.date, r.vector.into_boxed_slice());
        self.len += 1;
        true
    }

    pub fn get(&self, station_id: &str, date: Date) -> Option<&[f32]> {
        self.by_station.get(station_id)?.get(&date).map(|v| &v[..])
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }
}

pub fn load_embeddings(path: &Path) -> Result<EmbeddingTable> {
    let header = embeddings_header();
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows = csvio::open(path, &header_refs)?;
    let mut table = EmbeddingTable::new();
    rows.for_each(|line, rec| {
        let date = Date::parse(&rec[1])?;
        let vector = rec
            .iter()
            .skip(2)
            .enumerate()
            .map(|(i, f)| {
                f.parse::<f32>()
                    .map_err(|_| Error::invalid(embedding_column(i), format!("not a number: {f:?}")))
            })
            .collect::<Result<Vec<f32>>>()?;
        let record = EmbeddingRecord::new(&rec[0], date, vector)?;
        if !table.insert(record) {
            return Err(Error::Load {
                path: path.to_path_buf(),
                line,
                message: format!("duplicate embedding for ({}, {date})", &rec[0]),
            });
        }
        Ok(())
    })?;
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(values: &[String]) -> String {
        format!("A,2019-01-01,{}", values.join(","))
    }

    #[test]
    fn accepts_768_finite_values() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("e.csv");
        let vals: Vec<String> = (0..768).map(|i| format!("{}", i as f32 * 0.001)).collect();
        std::fs::write(&p, format!("{}\n{}\n", embeddings_header().join(","), row(&vals))).unwrap();
        let t = load_embeddings(&p).unwrap();
        let v = t.get("A", Date::parse("2019-01-01").unwrap()).unwrap();
        assert_eq!(v.len(), 768);
        assert_eq!(v[767], 0.767);
    }

    #[test]
    fn rejects_short_rows_and_non_finite() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("e.csv");
        let vals: Vec<String> = (0..767).map(|_| "0".to_string()).collect();
        std::fs::write(&p, format!("{}\n{}\n", embeddings_header().join(","), row(&vals))).unwrap();
        assert!(matches!(load_embeddings(&p).unwrap_err(), Error::Load { line: 2, .. }));

        let mut vals: Vec<String> = (0..768).map(|_| "0".to_string()).collect();
        vals[5] = "inf".into();
        std::fs::write(&p, format!("{}\n{}\n", embeddings_header().join(","), row(&vals))).unwrap();
        let err = load_embeddings(&p).unwrap_err().to_string();
        assert!(err.contains("e005"), "{err}");
    }
}
