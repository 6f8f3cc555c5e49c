//! Station-grouped K-fold cross-validation and regression metrics.

mod metrics;

use std::collections::{BTreeMap, BTreeSet};

use log::warn;
use rayon::prelude::*;

pub use metrics::{mae, r2, rmse};

use crate::domain::RngStream;
use crate::error::{Error, Result};
use crate::features::FeatureMatrix;
use crate::forest::{fit_forest, ColMatrix, ForestParams};

pub const DEFAULT_FOLDS: usize = 5;

/// RNG stream reserved for fold assignment, disjoint from the per-tree streams.
const FOLD_STREAM: u64 = 0x666f_6c64_0000_0000;

/// Assignment of each station to one of `k` folds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldPlan {
    k: usize,
    assignment: BTreeMap<String, usize>,
}

impl FoldPlan {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn fold_of(&self, station_id: &str) -> Option<usize> {
        self.assignment.get(station_id).copied()
    }

    pub fn stations_in(&self, fold: usize) -> Vec<&str> {
        self.assignment
            .iter()
            .filter(|(_, &f)| f == fold)
            .map(|(s, _)| s.as_str())
            .collect()
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in self.assignment.values() {
            sizes[f] += 1;
        }
        sizes
    }

    pub fn assignment(&self) -> &BTreeMap<String, usize> {
        &self.assignment
    }
}

/// Sorts stations by id, shuffles them with the seeded stream and deals them
/// round-robin into `k` folds.
pub fn make_group_folds<S: AsRef<str>>(stations: &[S], k: usize, seed: u64) -> Result<FoldPlan> {
    if k < 2 {
        return Err(Error::Config(format!("need at least 2 folds, got {k}")));
    }
    let mut ids: Vec<&str> = stations.iter().map(AsRef::as_ref).collect();
    ids.sort_unstable();
    ids.dedup();
    if ids.len() < k {
        return Err(Error::Config(format!("{} stations is fewer than {k} folds", ids.len())));
    }
    RngStream::new(seed, FOLD_STREAM).shuffle(&mut ids);
    let assignment = ids
        .into_iter()
        .enumerate()
        .map(|(i, id)| (id.to_string(), i % k))
        .collect();
    Ok(FoldPlan { k, assignment })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FoldMetrics {
    pub fold: usize,
    pub n_test: usize,
    /// `None` when the fold's targets are constant.
    pub r2: Option<f64>,
    pub rmse: f64,
    pub mae: f64,
}

/// Pooled out-of-fold metrics plus per-fold diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalResult {
    pub r2: f64,
    pub rmse: f64,
    pub mae: f64,
    pub n_samples: usize,
    pub per_fold: Vec<FoldMetrics>,
    /// Out-of-fold prediction for each input row.
    pub predictions: Vec<f64>,
}

struct FoldOutput {
    fold: usize,
    test_rows: Vec<usize>,
    predictions: Vec<f64>,
}

fn run_fold(
    matrix: &FeatureMatrix,
    targets: &[f64],
    row_folds: &[usize],
    fold: usize,
    params: &ForestParams,
) -> Result<Option<FoldOutput>> {
    let (test_rows, train_rows): (Vec<usize>, Vec<usize>) = (0..matrix.n_rows()).partition(|&r| row_folds[r] == fold);
    if test_rows.is_empty() {
        warn!("fold {fold} has no test rows; skipped");
        return Ok(None);
    }
    if train_rows.is_empty() {
        return Err(Error::Fit(format!("fold {fold} leaves no training rows")));
    }
    let prov = matrix.provenance();
    let train_stations: BTreeSet<&str> = train_rows.iter().map(|&r| prov[r].0.as_str()).collect();
    let test_stations: BTreeSet<&str> = test_rows.iter().map(|&r| prov[r].0.as_str()).collect();
    assert!(
        train_stations.is_disjoint(&test_stations),
        "fold {fold}: station present in both train and test"
    );

    let medians = matrix.column_medians(&train_rows);
    let p = matrix.n_cols();
    let x_train = ColMatrix::from_columns(train_rows.len(), p, matrix.imputed_columns(&train_rows, &medians))?;
    let y_train: Vec<f64> = train_rows.iter().map(|&r| targets[r]).collect();
    let x_test = ColMatrix::from_columns(test_rows.len(), p, matrix.imputed_columns(&test_rows, &medians))?;
    let forest = fit_forest(&x_train, &y_train, params, matrix.columns().to_vec(), medians)?;
    let predictions = forest.predict_dense(&x_test)?;
    Ok(Some(FoldOutput {
        fold,
        test_rows,
        predictions,
    }))
}

/// Group K-fold CV: each fold's forest is fit on rows of the other folds'
/// stations, with missing cells imputed from training-fold medians.
pub fn cross_validate(
    matrix: &FeatureMatrix,
    targets: &[f64],
    plan: &FoldPlan,
    params: &ForestParams,
) -> Result<EvalResult> {
    if targets.len() != matrix.n_rows() {
        return Err(Error::Fit(format!("{} rows but {} targets", matrix.n_rows(), targets.len())));
    }
    let row_folds = matrix
        .provenance()
        .iter()
        .map(|(s, _)| {
            plan.fold_of(s)
                .ok_or_else(|| Error::Config(format!("station {s} is not in the fold plan")))
        })
        .collect::<Result<Vec<usize>>>()?;

    let outputs = (0..plan.k())
        .into_par_iter()
        .map(|f| run_fold(matrix, targets, &row_folds, f, params))
        .collect::<Result<Vec<_>>>()?;
    let outputs: Vec<FoldOutput> = outputs.into_iter().flatten().collect();
    if outputs.is_empty() {
        return Err(Error::Fit("every fold is empty".into()));
    }

    let mut predictions = vec![f64::NAN; matrix.n_rows()];
    let mut per_fold = Vec::with_capacity(outputs.len());
    for out in &outputs {
        let y: Vec<f64> = out.test_rows.iter().map(|&r| targets[r]).collect();
        for (&r, &p) in out.test_rows.iter().zip(&out.predictions) {
            predictions[r] = p;
        }
        per_fold.push(FoldMetrics {
            fold: out.fold,
            n_test: y.len(),
            r2: r2(&y, &out.predictions).ok(),
            rmse: rmse(&y, &out.predictions)?,
            mae: mae(&y, &out.predictions)?,
        });
    }
    debug_assert!(predictions.iter().all(|p| p.is_finite()));
    Ok(EvalResult {
        r2: r2(targets, &predictions)?,
        rmse: rmse(targets, &predictions)?,
        mae: mae(targets, &predictions)?,
        n_samples: targets.len(),
        per_fold,
        predictions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Date;

    fn ids(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("S{i:03}")).collect()
    }

    #[test]
    fn fold_sizes() {
        assert_eq!(make_group_folds(&ids(10), 5, 1).unwrap().sizes(), vec![2; 5]);
        let mut sizes = make_group_folds(&ids(113), 5, 1).unwrap().sizes();
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        assert_eq!(sizes, vec![23, 23, 23, 22, 22]);
    }

    #[test]
    fn folds_are_deterministic_and_order_free() {
        let a = make_group_folds(&ids(30), 5, 9).unwrap();
        let mut rev = ids(30);
        rev.reverse();
        assert_eq!(a, make_group_folds(&rev, 5, 9).unwrap());
        assert_ne!(a, make_group_folds(&ids(30), 5, 10).unwrap());
    }

    #[test]
    fn too_few_stations() {
        assert!(matches!(make_group_folds(&ids(4), 5, 0), Err(Error::Config(_))));
    }

    fn toy(n_per_station: usize, stations: &[&str], f: impl Fn(f64) -> f64) -> (FeatureMatrix, Vec<f64>) {
        let mut m = FeatureMatrix::new(vec!["x".into()]);
        let mut y = Vec::new();
        let mut i = 0.0;
        for s in stations {
            for d in 0..n_per_station {
                m.push_row(&[Some(i)], s.to_string(), Date::from_epoch_day(d as i32)).unwrap();
                y.push(f(i));
                i += 1.0;
            }
        }
        (m, y)
    }

    #[test]
    fn two_station_linear_signal() {
        // interleave the two stations so each covers the whole x range
        let mut m = FeatureMatrix::new(vec!["x".into()]);
        let mut y = Vec::new();
        for i in 0..40 {
            let s = if i % 2 == 0 { "A" } else { "B" };
            m.push_row(&[Some(i as f64)], s.into(), Date::from_epoch_day(i)).unwrap();
            y.push(0.01 * i as f64);
        }
        let plan = make_group_folds(&["A", "B"], 2, 3).unwrap();
        let params = ForestParams { n_trees: 20, ..Default::default() };
        let res = cross_validate(&m, &y, &plan, &params).unwrap();
        assert!(res.r2 > 0.9, "{}", res.r2);
        assert_eq!(res.n_samples, 40);
        assert_eq!(res.per_fold.len(), 2);
    }

    #[test]
    fn constant_target_reaches_r2_error() {
        let (m, y) = toy(5, &["A", "B", "C"], |_| 0.25);
        let plan = make_group_folds(&["A", "B", "C"], 3, 0).unwrap();
        let err = cross_validate(&m, &y, &plan, &ForestParams { n_trees: 3, ..Default::default() }).unwrap_err();
        assert!(matches!(err, Error::Metric(_)));
    }

    #[test]
    fn empty_fold_is_skipped() {
        let (m, y) = toy(6, &["A", "B", "C"], |x| x * 0.01);
        let plan = make_group_folds(&["A", "B", "C", "D"], 4, 0).unwrap();
        let res = cross_validate(&m, &y, &plan, &ForestParams { n_trees: 3, ..Default::default() }).unwrap();
        assert_eq!(res.per_fold.len(), 3);
        assert!(res.predictions.iter().all(|p| p.is_finite()));
    }

    #[test]
    fn unknown_station_is_config_error() {
        let (m, y) = toy(2, &["A", "Z"], |x| x);
        let plan = make_group_folds(&["A", "B"], 2, 0).unwrap();
        assert!(matches!(cross_validate(&m, &y, &plan, &ForestParams::default()), Err(Error::Config(_))));
    }

    #[test]
    fn row_order_does_not_change_pooled_metrics() {
        let stations = ["A", "B", "C", "D"];
        let (m, y) = toy(8, &stations, |x| (x * 0.37).sin() * 0.2 + 0.3);
        let plan = make_group_folds(&stations, 2, 5).unwrap();
        let params = ForestParams { n_trees: 10, ..Default::default() };
        let a = cross_validate(&m, &y, &plan, &params).unwrap();

        let perm: Vec<usize> = (0..m.n_rows()).rev().collect();
        let mr = m.select_rows(&perm);
        let yr: Vec<f64> = perm.iter().map(|&r| y[r]).collect();
        let b = cross_validate(&mr, &yr, &plan, &params).unwrap();
        // bootstrap draws index rows, so only deterministic trees are exactly order-free
        let params = ForestParams { n_trees: 1, bootstrap: false, max_features: crate::forest::MaxFeatures::All, ..params };
        let c = cross_validate(&m, &y, &plan, &params).unwrap();
        let d = cross_validate(&mr, &yr, &plan, &params).unwrap();
        assert!((c.r2 - d.r2).abs() < 1e-12);
        assert!((c.rmse - d.rmse).abs() < 1e-12);
        assert!((a.r2 - b.r2).abs() < 0.1);
    }
}
