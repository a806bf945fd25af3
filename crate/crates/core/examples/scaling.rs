//! Embedding time as the edge count and then the node count double.
//! Expect roughly linear growth in both.
//!
//! cargo run --release --example scaling [max_edges]

use netproj::cli::{cmd_bench, BenchSweep, RunConfig};

fn main() -> netproj::Result<()> {
    let edges = std::env::args().nth(1).unwrap_or_else(|| "2000000".into());
    let mut cfg = RunConfig::default();
    cfg.apply_str(&format!("nodes = 200000\nedges = {edges}\ndim = 16\npoints = 3\nworkers = 1"))?;
    cfg.sweep = BenchSweep::Edges;
    let by_edges = cmd_bench(&cfg)?;
    cfg.sweep = BenchSweep::Nodes;
    let by_nodes = cmd_bench(&cfg)?;
    for rows in [&by_edges, &by_nodes] {
        for pair in rows.windows(2) {
            println!(
                "{}: {} -> {} nodes, {} -> {} edges, time x{:.2}",
                pair[1].sweep, pair[0].n_nodes, pair[1].n_nodes, pair[0].n_edges, pair[1].n_edges,
                pair[1].seconds / pair[0].seconds
            );
        }
    }
    Ok(())
}
