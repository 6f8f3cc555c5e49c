//! Random-forest regression: bagged CART trees with per-split feature subsampling.

mod io;
mod matrix;
mod tree;

use rayon::prelude::*;

pub use matrix::ColMatrix;
pub use tree::{best_split, Node, Split, Tree};

use crate::domain::RngStream;
use crate::error::{Error, Result};
use crate::features::FeatureMatrix;
use tree::{grow_tree, Presorted};

/// Number of features tried at each split.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaxFeatures {
    /// `ceil(p / 3)`, the usual regression default.
    Third,
    Sqrt,
    All,
    Fixed(usize),
}

impl MaxFeatures {
    pub fn count(self, p: usize) -> usize {
        let k = match self {
            MaxFeatures::Third => p.div_ceil(3),
            MaxFeatures::Sqrt => (p as f64).sqrt().ceil() as usize,
            MaxFeatures::All => p,
            MaxFeatures::Fixed(k) => k,
        };
        k.clamp(1, p.max(1))
    }

    pub fn label(self) -> String {
        match self {
            MaxFeatures::Third => "third".into(),
            MaxFeatures::Sqrt => "sqrt".into(),
            MaxFeatures::All => "all".into(),
            MaxFeatures::Fixed(k) => k.to_string(),
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "third" => Ok(MaxFeatures::Third),
            "sqrt" => Ok(MaxFeatures::Sqrt),
            "all" => Ok(MaxFeatures::All),
            other => match other.parse::<usize>() {
                Ok(k) if k > 0 => Ok(MaxFeatures::Fixed(k)),
                _ => Err(Error::Config(format!("invalid max_features {s:?}"))),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForestParams {
    pub n_trees: usize,
    pub max_features: MaxFeatures,
    pub min_samples_split: usize,
    pub min_samples_leaf: usize,
    pub max_depth: Option<usize>,
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for ForestParams {
    fn default() -> Self {
        Self {
            n_trees: 100,
            max_features: MaxFeatures::Third,
            min_samples_split: 2,
            min_samples_leaf: 1,
            max_depth: None,
            bootstrap: true,
            seed: 42,
        }
    }
}

impl ForestParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_trees == 0 {
            return Err(Error::Config("n_trees must be positive".into()));
        }
        if self.min_samples_split < 2 {
            return Err(Error::Config("min_samples_split must be at least 2".into()));
        }
        if self.min_samples_leaf < 1 {
            return Err(Error::Config("min_samples_leaf must be at least 1".into()));
        }
        if self.max_depth == Some(0) {
            return Err(Error::Config("max_depth must be positive".into()));
        }
        Ok(())
    }
}

/// A fitted forest together with the column schema and imputation values it was trained with.
#[derive(Debug, Clone, PartialEq)]
pub struct Forest {
    trees: Vec<Tree>,
    params: ForestParams,
    column_schema: Vec<String>,
    imputation_medians: Vec<f64>,
}

/// Fits a forest on a fully imputed matrix. Tree `t` draws its bootstrap and
/// feature subsets from stream `t` of `params.seed`, so the result does not
/// depend on thread count.
pub fn fit_forest(
    x: &ColMatrix,
    y: &[f64],
    params: &ForestParams,
    column_schema: Vec<String>,
    imputation_medians: Vec<f64>,
) -> Result<Forest> {
    params.validate()?;
    if x.n_rows() != y.len() {
        return Err(Error::Fit(format!("{} rows but {} targets", x.n_rows(), y.len())));
    }
    if x.n_rows() == 0 {
        return Err(Error::Fit("no training rows".into()));
    }
    if column_schema.len() != x.n_cols() || imputation_medians.len() != x.n_cols() {
        return Err(Error::Fit(format!(
            "{} columns, {} names, {} medians",
            x.n_cols(),
            column_schema.len(),
            imputation_medians.len()
        )));
    }
    if let Some(c) = x.first_non_finite_column() {
        return Err(Error::Fit(format!("non-finite value in column {}", column_schema[c])));
    }
    if let Some(i) = y.iter().position(|v| !v.is_finite()) {
        return Err(Error::Fit(format!("non-finite target at row {i}")));
    }

    let presorted = Presorted::new(x);
    let n = x.n_rows();
    let trees = (0..params.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = RngStream::new(params.seed, t as u64);
            let sample: Vec<usize> = if params.bootstrap {
                (0..n).map(|_| rng.below(n)).collect()
            } else {
                (0..n).collect()
            };
            grow_tree(x, y, &sample, &presorted, params, &mut rng)
        })
        .collect();
    Ok(Forest {
        trees,
        params: *params,
        column_schema,
        imputation_medians,
    })
}

impl Forest {
    /// Imputes missing cells with the column medians of `matrix` and fits.
    pub fn fit(matrix: &FeatureMatrix, y: &[f64], params: &ForestParams) -> Result<Forest> {
        let rows: Vec<usize> = (0..matrix.n_rows()).collect();
        let medians = matrix.column_medians(&rows);
        let x = ColMatrix::from_columns(rows.len(), matrix.n_cols(), matrix.imputed_columns(&rows, &medians))?;
        fit_forest(&x, y, params, matrix.columns().to_vec(), medians)
    }

    pub fn trees(&self) -> &[Tree] {
        &self.trees
    }

    pub fn params(&self) -> &ForestParams {
        &self.params
    }

    pub fn column_schema(&self) -> &[String] {
        &self.column_schema
    }

    pub fn imputation_medians(&self) -> &[f64] {
        &self.imputation_medians
    }

    /// Mean of the tree predictions for each row of an imputed matrix.
    pub fn predict_dense(&self, x: &ColMatrix) -> Result<Vec<f64>> {
        if x.n_cols() != self.column_schema.len() {
            return Err(Error::Fit(format!(
                "matrix has {} columns, model expects {}",
                x.n_cols(),
                self.column_schema.len()
            )));
        }
        let k = self.trees.len() as f64;
        Ok((0..x.n_rows())
            .into_par_iter()
            .map(|r| self.trees.iter().map(|t| t.predict_with(|f| x.get(r, f))).sum::<f64>() / k)
            .collect())
    }

    /// Predicts for a feature matrix whose columns match the training schema,
    /// filling missing cells with the stored training medians.
    pub fn predict(&self, matrix: &FeatureMatrix) -> Result<Vec<f64>> {
        let cols = matrix.columns();
        let missing: Vec<String> = self
            .column_schema
            .iter()
            .filter(|c| !cols.contains(c))
            .cloned()
            .collect();
        let extra: Vec<String> = cols
            .iter()
            .filter(|c| !self.column_schema.contains(c))
            .cloned()
            .collect();
        if !missing.is_empty() || !extra.is_empty() || cols.len() != self.column_schema.len() {
            return Err(Error::Schema { missing, extra });
        }
        let lookup: std::collections::HashMap<&str, usize> =
            cols.iter().enumerate().map(|(i, c)| (c.as_str(), i)).collect();
        let n = matrix.n_rows();
        let mut data = Vec::with_capacity(n * cols.len());
        for (name, &fill) in self.column_schema.iter().zip(&self.imputation_medians) {
            let c = lookup[name.as_str()];
            data.extend((0..n).map(|r| matrix.get(r, c).unwrap_or(fill)));
        }
        self.predict_dense(&ColMatrix::from_columns(n, cols.len(), data)?)
    }
}
