//! Embed a planted-partition graph and check that nodes in the same block
//! end up closer than nodes in different blocks.
//!
//! cargo run --release --example embed_graph

use netproj::embed::{embed_static, normalize_rows, RngSpec, Weights};
use netproj::graph::{generate_sbm, sbm_block_of, Normalization};

fn main() -> netproj::Result<()> {
    let (n, blocks) = (1200, 3);
    let g = generate_sbm(n, blocks, 0.04, 0.002, 7)?;
    println!("graph: {} nodes, {} edges", g.n_nodes(), g.n_edges());

    let weights = Weights::new(vec![0.0, 1.0, 0.1, 0.01])?;
    let (state, emb) = embed_static(&g, 64, &weights, RngSpec::new(1), Normalization::Adjacency)?;
    println!("embedding: {} x {}, {} stored parts", emb.n_nodes(), emb.dim(), state.parts().len());

    let unit = normalize_rows(&emb);
    let cosine = |u: usize, v: usize| -> f64 { unit.row(u).iter().zip(unit.row(v)).map(|(a, b)| a * b).sum() };
    let (mut same, mut cross) = ((0.0, 0), (0.0, 0));
    for u in (0..n).step_by(7) {
        for v in (u + 1..n).step_by(11) {
            let slot = if sbm_block_of(n, blocks, u) == sbm_block_of(n, blocks, v) { &mut same } else { &mut cross };
            slot.0 += cosine(u, v);
            slot.1 += 1;
        }
    }
    println!("mean cosine within blocks: {:.3}", same.0 / same.1 as f64);
    println!("mean cosine across blocks: {:.3}", cross.0 / cross.1 as f64);
    Ok(())
}
