//! Propagate once, then try many weightings of the stored parts without
//! touching the graph again, and pick the best one on held-out edges.
//!
//! cargo run --release --example reweight

use netproj::embed::{default_grid, embed_static, grid_search_scored, recombine, RngSpec, ValidationMetric, Weights};
use netproj::eval::validation_split;
use netproj::graph::{generate_sbm, Normalization};

fn main() -> netproj::Result<()> {
    let g = generate_sbm(1000, 4, 0.05, 0.005, 3)?;
    let (fit, val) = validation_split(&g, 0.1, 5, 4)?;
    let (state, _) = embed_static(&fit.train, 64, &Weights::one_hot(3, 1)?, RngSpec::new(2), Normalization::Adjacency)?;

    for alpha in [vec![0.0, 1.0, 0.0, 0.0], vec![0.0, 0.0, 1.0, 0.0], vec![0.0, 1.0, 0.1, 0.01]] {
        let w = Weights::new(alpha)?;
        let emb = recombine(&state, &w)?;
        let norm: f64 = emb.matrix.iter().map(|x| x * x).sum::<f64>().sqrt();
        println!("alpha [{w}]: Frobenius norm {norm:.3}");
    }

    let grid = default_grid(3);
    let (best, score) = grid_search_scored(&state, &grid, &val, ValidationMetric::Auc)?;
    println!("best of {} grid points: [{best}] with validation AUC {score:.4}", grid.len());
    Ok(())
}
