//! Binary model files (`SMRF`, little-endian).

use std::fs;
use std::path::Path;

use super::{Forest, ForestParams, MaxFeatures, Node, Tree};
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"SMRF";
const VERSION: u16 = 1;

struct Writer(Vec<u8>);

impl Writer {
    fn u8(&mut self, v: u8) {
        self.0.push(v);
    }
    fn u16(&mut self, v: u16) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn u32(&mut self, v: u32) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len());
        let end = end.ok_or_else(|| corrupt(format!("truncated at byte {}", self.pos)))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }
    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn len(&mut self) -> Result<usize> {
        let v = self.u64()?;
        // every counted item occupies at least one byte
        if v > (self.buf.len() - self.pos) as u64 {
            return Err(corrupt(format!("count {v} exceeds remaining bytes")));
        }
        Ok(v as usize)
    }
}

fn corrupt(message: String) -> Error {
    Error::invalid("model", message)
}

impl Forest {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer(Vec::new());
        w.0.extend_from_slice(MAGIC);
        w.u16(VERSION);
        let p = &self.params;
        w.u64(p.n_trees as u64);
        let (tag, k) = match p.max_features {
            MaxFeatures::Third => (0, 0),
            MaxFeatures::Sqrt => (1, 0),
            MaxFeatures::All => (2, 0),
            MaxFeatures::Fixed(k) => (3, k as u64),
        };
        w.u8(tag);
        w.u64(k);
        w.u64(p.min_samples_split as u64);
        w.u64(p.min_samples_leaf as u64);
        w.u64(p.max_depth.map_or(0, |d| d as u64));
        w.u8(p.bootstrap as u8);
        w.u64(p.seed);
        w.u64(self.column_schema.len() as u64);
        for (name, &m) in self.column_schema.iter().zip(&self.imputation_medians) {
            w.u32(name.len() as u32);
            w.0.extend_from_slice(name.as_bytes());
            w.f64(m);
        }
        w.u64(self.trees.len() as u64);
        for tree in &self.trees {
            w.u64(tree.nodes.len() as u64);
            for node in &tree.nodes {
                match *node {
                    Node::Internal {
                        feature,
                        threshold,
                        left,
                        right,
                    } => {
                        w.u8(0);
                        w.u32(feature as u32);
                        w.f64(threshold);
                        w.u32(left as u32);
                        w.u32(right as u32);
                    }
                    Node::Leaf { prediction, n } => {
                        w.u8(1);
                        w.f64(prediction);
                        w.u64(n as u64);
                    }
                }
            }
        }
        w.0
    }

    pub fn from_bytes(buf: &[u8]) -> Result<Forest> {
        let mut r = Reader { buf, pos: 0 };
        if r.take(4)? != MAGIC {
            return Err(corrupt("not a model file".into()));
        }
        let version = r.u16()?;
        if version != VERSION {
            return Err(corrupt(format!("unsupported model version {version}")));
        }
        let n_trees = r.u64()? as usize;
        let tag = r.u8()?;
        let k = r.u64()? as usize;
        let max_features = match tag {
            0 => MaxFeatures::Third,
            1 => MaxFeatures::Sqrt,
            2 => MaxFeatures::All,
            3 => MaxFeatures::Fixed(k),
            t => return Err(corrupt(format!("unknown max_features tag {t}"))),
        };
        let min_samples_split = r.u64()? as usize;
        let min_samples_leaf = r.u64()? as usize;
        let max_depth = match r.u64()? {
            0 => None,
            d => Some(d as usize),
        };
        let bootstrap = r.u8()? != 0;
        let seed = r.u64()?;
        let params = ForestParams {
            n_trees,
            max_features,
            min_samples_split,
            min_samples_leaf,
            max_depth,
            bootstrap,
            seed,
        };

        let n_cols = r.len()?;
        let mut column_schema = Vec::with_capacity(n_cols);
        let mut imputation_medians = Vec::with_capacity(n_cols);
        for _ in 0..n_cols {
            let len = r.u32()? as usize;
            let name = std::str::from_utf8(r.take(len)?).map_err(|_| corrupt("column name is not UTF-8".into()))?;
            column_schema.push(name.to_string());
            imputation_medians.push(r.f64()?);
        }

        let stored = r.len()?;
        if stored != n_trees {
            return Err(corrupt(format!("header says {n_trees} trees, file holds {stored}")));
        }
        let mut trees = Vec::with_capacity(stored);
        for t in 0..stored {
            let n_nodes = r.len()?;
            if n_nodes == 0 {
                return Err(corrupt(format!("tree {t} is empty")));
            }
            let mut nodes = Vec::with_capacity(n_nodes);
            for i in 0..n_nodes {
                let node = match r.u8()? {
                    0 => {
                        let feature = r.u32()? as usize;
                        let threshold = r.f64()?;
                        let left = r.u32()? as usize;
                        let right = r.u32()? as usize;
                        // children after parent rules out cycles
                        if feature >= n_cols || left <= i || right <= i || left >= n_nodes || right >= n_nodes {
                            return Err(corrupt(format!("tree {t} node {i} has invalid links")));
                        }
                        Node::Internal {
                            feature,
                            threshold,
                            left,
                            right,
                        }
                    }
                    1 => Node::Leaf {
                        prediction: r.f64()?,
                        n: r.u64()? as usize,
                    },
                    tag => return Err(corrupt(format!("tree {t} node {i} has tag {tag}"))),
                };
                nodes.push(node);
            }
            trees.push(Tree::from_nodes(nodes));
        }
        if r.pos != buf.len() {
            return Err(corrupt(format!("{} trailing bytes", buf.len() - r.pos)));
        }
        Ok(Forest {
            trees,
            params,
            column_schema,
            imputation_medians,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Forest> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Forest::from_bytes(&bytes)
    }
}
