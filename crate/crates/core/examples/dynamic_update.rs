//! Keep an embedding current while edges and nodes arrive, and compare the
//! incremental result with recomputing from scratch.
//!
//! cargo run --release --example dynamic_update

use std::time::Instant;

use netproj::dynamic::update_in_place;
use netproj::embed::{embed_with_projection, recombine, RngSpec, Weights};
use netproj::graph::{apply_delta, generate_er, EdgeChange, GraphDelta, Normalization};

fn main() -> netproj::Result<()> {
    let mut g = generate_er(50_000, 250_000, 1)?;
    let weights = Weights::new(vec![0.0, 1.0, 0.1, 0.01])?;
    let rng = RngSpec::new(5);
    let (mut state, _) = netproj::embed::embed_static(&g, 32, &weights, rng, Normalization::Adjacency)?;

    for batch in 0..3 {
        let n = g.n_nodes();
        // Two new nodes wired into the graph, a few existing edges removed.
        let mut changes = vec![
            EdgeChange { u: batch, v: n, delta_weight: 1.0 },
            EdgeChange { u: n, v: n + 1, delta_weight: 1.0 },
        ];
        changes.extend(g.edges().skip(1000 * batch).take(50).map(|(u, v, w)| EdgeChange { u, v, delta_weight: -w }));
        let delta = GraphDelta::new(2, changes)?;

        let start = Instant::now();
        let report = update_in_place(&mut state, &g, &delta, 1)?;
        let took = start.elapsed();
        g = apply_delta(&g, &delta)?;
        println!(
            "batch {batch}: {} changes, {} new nodes, frontiers {:?}, {:.1} ms",
            report.changed_edges,
            report.n_new_nodes,
            report.frontier_sizes,
            took.as_secs_f64() * 1e3
        );
    }

    let start = Instant::now();
    let (_, fresh) = embed_with_projection(&g, state.part(0).clone(), &weights, rng, Normalization::Adjacency)?;
    println!("full recompute: {:.1} ms", start.elapsed().as_secs_f64() * 1e3);
    let updated = recombine(&state, &weights)?;
    let diff = (&updated.matrix - &fresh.matrix).iter().fold(0.0f64, |m, x| m.max(x.abs()));
    println!("max |incremental - recompute| = {diff:.2e}");
    Ok(())
}
