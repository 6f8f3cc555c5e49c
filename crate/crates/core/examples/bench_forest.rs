//! Times forest fitting on a 1000×200 random regression problem.
//!
//! `cargo run --release --example bench_forest [third|sqrt|all|N]`

use std::time::Instant;

use smest::domain::RngStream;
use smest::forest::{fit_forest, ColMatrix, ForestParams, MaxFeatures};

fn main() -> smest::Result<()> {
    let (n, p) = (1000, 200);
    let max_features = match std::env::args().nth(1) {
        Some(s) => MaxFeatures::parse(&s)?,
        None => MaxFeatures::Third,
    };
    let mut rng = RngStream::new(1, 1);
    let data: Vec<f64> = (0..n * p).map(|_| rng.uniform()).collect();
    let x = ColMatrix::from_columns(n, p, data)?;
    let y: Vec<f64> = (0..n).map(|r| x.get(r, 0) + 0.5 * x.get(r, 1) + 0.1 * rng.uniform()).collect();
    let params = ForestParams {
        max_features,
        ..ForestParams::default()
    };
    let names = (0..p).map(|i| format!("x{i}")).collect();
    let start = Instant::now();
    let forest = fit_forest(&x, &y, &params, names, vec![0.0; p])?;
    println!(
        "{} trees in {:.3}s, {} nodes in the first",
        params.n_trees,
        start.elapsed().as_secs_f64(),
        forest.trees()[0].nodes().len()
    );
    Ok(())
}
