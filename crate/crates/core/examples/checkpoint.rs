//! Save the propagation state, reload it in a later run, apply a change
//! and write the embedding in both file formats.
//!
//! cargo run --release --example checkpoint

use netproj::cli::{read_embedding_text, write_embedding_binary, write_embedding_text, Checkpoint};
use netproj::dynamic::update_and_recombine;
use netproj::embed::{embed_static, RngSpec, Weights};
use netproj::graph::{apply_delta, generate_er, GraphDelta, Normalization};

fn main() -> netproj::Result<()> {
    let dir = std::env::temp_dir().join("netproj-checkpoint-example");
    std::fs::create_dir_all(&dir).map_err(|e| netproj::Error::Data(e.to_string()))?;
    let path = dir.join("state.ckpt");

    let g = generate_er(5000, 20_000, 4)?;
    let weights = Weights::new(vec![0.0, 1.0, 0.5])?;
    let (state, _) = embed_static(&g, 32, &weights, RngSpec::new(8), Normalization::Adjacency)?;
    Checkpoint { state, weights: Some(weights), labels: g.labels().clone(), graph: Some(g) }.save(&path)?;
    println!("saved {} ({} bytes)", path.display(), std::fs::metadata(&path).map(|m| m.len()).unwrap_or(0));

    let ckpt = Checkpoint::load(&path)?;
    let g = ckpt.graph.expect("stored graph");
    let delta = GraphDelta::insertions([(0, 1), (2, 3), (4, 5)])?;
    let (state, emb) = update_and_recombine(&ckpt.state, &g, &delta, ckpt.weights.as_ref().unwrap())?;
    let g = apply_delta(&g, &delta)?;

    write_embedding_text(&emb, g.labels(), dir.join("emb.txt"))?;
    write_embedding_binary(&emb, dir.join("emb.bin"))?;
    let (labels, back) = read_embedding_text(dir.join("emb.txt"))?;
    println!("{} rows, text round trip exact: {}", labels.len(), back.matrix == emb.matrix);
    println!("state now covers {} nodes at order {}", state.n_nodes(), state.order());
    Ok(())
}
