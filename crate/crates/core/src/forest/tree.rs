//! CART regression trees with exhaustive variance-reduction splits.

use super::{ColMatrix, ForestParams};
use crate::domain::RngStream;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Node {
    /// Rows with `x[feature] <= threshold` go to `left`.
    Internal {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf { prediction: f64, n: usize },
}

/// A fitted tree stored as a flat node array; node 0 is the root.
#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    pub(crate) nodes: Vec<Node>,
}

impl Tree {
    pub fn from_nodes(nodes: Vec<Node>) -> Self {
        Self { nodes }
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Internal { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }

    /// Leaf value for one row, reading feature `f` through `value(f)`.
    pub fn predict_with(&self, value: impl Fn(usize) -> f64) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { prediction, .. } => return prediction,
                Node::Internal {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if value(feature) <= threshold { left } else { right },
            }
        }
    }

    pub fn predict_row(&self, row: &[f64]) -> f64 {
        self.predict_with(|f| row[f])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Split {
    pub feature: usize,
    pub threshold: f64,
    /// `n·Var(y) − n_L·Var(y_L) − n_R·Var(y_R)`.
    pub score: f64,
}

/// Scores smaller than this fraction of the node's sum of squares count as zero or as ties.
const TIE_TOLERANCE: f64 = 1e-12;

fn midpoint(a: f64, b: f64) -> f64 {
    let mid = a + (b - a) / 2.0;
    if mid < b {
        mid
    } else {
        a
    }
}

/// Running best split across features, applying the tie rule
/// (earlier feature in scan order, then lower threshold wins).
struct BestSplit {
    best: Option<Split>,
    tolerance: f64,
}

impl BestSplit {
    fn new(sum_sq: f64) -> Self {
        let tolerance = TIE_TOLERANCE * sum_sq;
        Self { best: None, tolerance }
    }

    /// Scans one feature given `(value, centered y)` pairs sorted by value.
    fn scan(&mut self, feature: usize, sorted: impl Iterator<Item = (f64, f64)>, n: usize, total: f64, min_leaf: usize) {
        let base = total * total / n as f64;
        let mut left_sum = 0.0;
        let mut left_n = 0usize;
        let mut prev: Option<(f64, f64)> = None;
        for (v, yc) in sorted {
            if let Some((pv, py)) = prev {
                left_sum += py;
                left_n += 1;
                let right_n = n - left_n;
                if pv < v && left_n >= min_leaf && right_n >= min_leaf {
                    let right_sum = total - left_sum;
                    let score = left_sum * left_sum / left_n as f64 + right_sum * right_sum / right_n as f64 - base;
                    let floor = self.best.map_or(self.tolerance, |b| b.score + self.tolerance);
                    if score > floor {
                        self.best = Some(Split {
                            feature,
                            threshold: midpoint(pv, v),
                            score,
                        });
                    }
                }
            }
            prev = Some((v, yc));
        }
    }
}

/// Best variance-reduction split over `features` using every row of `x`.
///
/// Candidate thresholds are midpoints between consecutive distinct values.
/// Returns `None` when no candidate leaves both children with at least
/// `min_samples_leaf` rows or no candidate reduces the variance.
pub fn best_split(x: &ColMatrix, y: &[f64], features: &[usize], min_samples_leaf: usize) -> Option<Split> {
    let n = y.len();
    if n < 2 {
        return None;
    }
    let mean = y.iter().sum::<f64>() / n as f64;
    let yc: Vec<f64> = y.iter().map(|v| v - mean).collect();
    let total: f64 = yc.iter().sum();
    let sum_sq: f64 = yc.iter().map(|v| v * v).sum();
    let mut features = features.to_vec();
    features.sort_unstable();
    features.dedup();
    let mut best = BestSplit::new(sum_sq);
    let mut order: Vec<usize> = (0..n).collect();
    for &f in &features {
        let col = x.column(f);
        order.sort_by(|&a, &b| col[a].total_cmp(&col[b]).then(a.cmp(&b)));
        best.scan(f, order.iter().map(|&i| (col[i], yc[i])), n, total, min_samples_leaf.max(1));
    }
    best.best
}

/// Per-feature row orderings of the training matrix, shared by every tree of a forest.
pub(crate) struct Presorted {
    n_rows: usize,
    order: Vec<u32>,
}

impl Presorted {
    pub(crate) fn new(x: &ColMatrix) -> Self {
        let n = x.n_rows();
        let mut order = Vec::with_capacity(n * x.n_cols());
        let mut idx: Vec<u32> = (0..n as u32).collect();
        for c in 0..x.n_cols() {
            let col = x.column(c);
            idx.sort_by(|&a, &b| col[a as usize].total_cmp(&col[b as usize]).then(a.cmp(&b)));
            order.extend_from_slice(&idx);
        }
        Self { n_rows: n, order }
    }

    fn feature(&self, f: usize) -> &[u32] {
        &self.order[f * self.n_rows..(f + 1) * self.n_rows]
    }
}

/// Fits one tree on `sample` (row indices, repeats allowed), drawing feature
/// subsets from `rng`.
pub(crate) fn grow_tree(
    x: &ColMatrix,
    y: &[f64],
    sample: &[usize],
    presorted: &Presorted,
    params: &ForestParams,
    rng: &mut RngStream,
) -> Tree {
    let m = sample.len();
    let p = x.n_cols();
    let ys: Vec<f64> = sample.iter().map(|&r| y[r]).collect();

    // positions of each row in `sample`, CSR layout
    let mut start = vec![0usize; x.n_rows() + 1];
    for &r in sample {
        start[r + 1] += 1;
    }
    for r in 0..x.n_rows() {
        start[r + 1] += start[r];
    }
    let mut fill = start.clone();
    let mut positions = vec![0u32; m];
    for (pos, &r) in sample.iter().enumerate() {
        positions[fill[r]] = pos as u32;
        fill[r] += 1;
    }
    let mut order = Vec::with_capacity(m * p);
    for f in 0..p {
        for &r in presorted.feature(f) {
            let r = r as usize;
            order.extend_from_slice(&positions[start[r]..start[r + 1]]);
        }
    }

    let mtry = params.max_features.count(p);
    let min_leaf = params.min_samples_leaf.max(1);
    let min_split = params.min_samples_split.max(2);
    let mut nodes: Vec<Node> = vec![Node::Leaf { prediction: 0.0, n: 0 }];
    let mut goes_left = vec![false; m];
    let mut scratch: Vec<u32> = Vec::with_capacity(m);
    let mut stack = vec![(0usize, 0usize, m, 0usize)];

    while let Some((slot, lo, hi, depth)) = stack.pop() {
        let n = hi - lo;
        let node_positions = &order[lo..hi];
        let sum: f64 = node_positions.iter().map(|&q| ys[q as usize]).sum();
        let mean = sum / n as f64;
        let leaf = Node::Leaf { prediction: mean, n };
        let (mut lo_y, mut hi_y) = (f64::INFINITY, f64::NEG_INFINITY);
        let mut sum_sq = 0.0;
        let mut total = 0.0;
        for &q in node_positions {
            let v = ys[q as usize];
            lo_y = lo_y.min(v);
            hi_y = hi_y.max(v);
            let c = v - mean;
            total += c;
            sum_sq += c * c;
        }
        if lo_y == hi_y {
            nodes[slot] = Node::Leaf { prediction: lo_y, n };
            continue;
        }
        let depth_reached = params.max_depth.is_some_and(|d| depth >= d);
        if n < min_split || n < 2 * min_leaf || depth_reached {
            nodes[slot] = leaf;
            continue;
        }

        let mut features = rng.sample_without_replacement(p, mtry);
        features.sort_unstable();
        let mut best = BestSplit::new(sum_sq);
        for &f in &features {
            let col = x.column(f);
            let range = &order[f * m + lo..f * m + hi];
            best.scan(
                f,
                range.iter().map(|&q| {
                    let q = q as usize;
                    (col[sample[q]], ys[q] - mean)
                }),
                n,
                total,
                min_leaf,
            );
        }
        let Some(split) = best.best else {
            nodes[slot] = leaf;
            continue;
        };

        let col = x.column(split.feature);
        let mut n_left = 0;
        for &q in &order[split.feature * m + lo..split.feature * m + hi] {
            let left = col[sample[q as usize]] <= split.threshold;
            goes_left[q as usize] = left;
            n_left += left as usize;
        }
        scratch.resize(n, 0);
        for f in 0..p {
            let range = &mut order[f * m + lo..f * m + hi];
            // stable partition without data-dependent branches
            let (mut w, mut s) = (0, 0);
            for i in 0..n {
                let q = range[i];
                let left = goes_left[q as usize] as usize;
                range[w] = q;
                scratch[s] = q;
                w += left;
                s += 1 - left;
            }
            range[w..].copy_from_slice(&scratch[..s]);
        }

        let left = nodes.len();
        let right = left + 1;
        nodes.push(Node::Leaf { prediction: 0.0, n: 0 });
        nodes.push(Node::Leaf { prediction: 0.0, n: 0 });
        nodes[slot] = Node::Internal {
            feature: split.feature,
            threshold: split.threshold,
            left,
            right,
        };
        // right pushed first so the left subtree is grown (and draws features) first
        stack.push((right, lo + n_left, hi, depth + 1));
        stack.push((left, lo, lo + n_left, depth + 1));
    }
    Tree { nodes }
}
