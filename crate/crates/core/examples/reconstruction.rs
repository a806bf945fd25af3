//! How well do inner products of the embedding recover the graph itself?
//! Sampled pairs keep this cheap on larger graphs.
//!
//! cargo run --release --example reconstruction

use netproj::embed::{embed_static, extended_grid, recombine, RngSpec, Weights};
use netproj::eval::protocol::{evaluate_reconstruction, select_reconstruction_weights, write_csv, Scorer};
use netproj::eval::PairMode;
use netproj::graph::{generate_sbm, Normalization};

fn main() -> netproj::Result<()> {
    let g = generate_sbm(3000, 6, 0.03, 0.002, 2)?;
    let (state, _) = embed_static(&g, 128, &Weights::one_hot(3, 1)?, RngSpec::new(1), Normalization::Adjacency)?;
    let (weights, score) = select_reconstruction_weights(&state, &g, &extended_grid(3), 0.02, 9)?;
    println!("# weights [{weights}], AUC on the selection sample {score:.4}");
    let emb = recombine(&state, &weights)?;
    let scorers = [
        Scorer::Embedding { name: "projection", matrix: &emb },
        Scorer::CommonNeighbors(&g),
        Scorer::AdamicAdar(&g),
        Scorer::Random(0),
    ];
    let rows = evaluate_reconstruction(&g, "sbm", &scorers, PairMode::Sampled { rate: 0.1, seed: 4 }, &[100, 1000], 4)?;
    write_csv(std::io::stdout().lock(), &rows).expect("stdout");
    Ok(())
}
