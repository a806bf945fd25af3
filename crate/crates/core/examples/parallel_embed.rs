//! Split the projection columns over worker threads. The result is the
//! same bit for bit whatever the worker count.
//!
//! cargo run --release --example parallel_embed

use std::time::Instant;

use netproj::embed::RngSpec;
use netproj::cli::default_weights;
use netproj::graph::{generate_er, Normalization};
use netproj::parallel::{default_workers, embed_parallel, partition_columns};

fn main() -> netproj::Result<()> {
    let g = generate_er(200_000, 2_000_000, 9)?;
    let weights = default_weights(3);
    let max = default_workers();
    println!("{} cores available", max);

    let mut counts = vec![1, 2, 4, max];
    counts.sort_unstable();
    counts.dedup();
    let mut reference = None;
    for workers in counts {
        let start = Instant::now();
        let (_, emb) = embed_parallel(&g, 64, &weights, RngSpec::new(3), Normalization::Adjacency, workers)?;
        let secs = start.elapsed().as_secs_f64();
        let blocks = partition_columns(64, workers);
        let same = reference.get_or_insert_with(|| emb.matrix.clone()) == &emb.matrix;
        println!("{workers} workers ({} column blocks): {secs:.2} s, identical to 1 worker: {same}", blocks.ranges().len());
    }
    Ok(())
}
