//! Hide 30% of the edges, embed what is left, and rank the hidden edges
//! against every other unconnected pair. Heuristic baselines for scale.
//!
//! cargo run --release --example link_prediction

use netproj::eval::protocol::{run_link_prediction, write_csv, ExperimentConfig};
use netproj::graph::{generate_sbm, Normalization};

fn main() -> netproj::Result<()> {
    let g = generate_sbm(2000, 4, 0.05, 0.005, 1)?;
    for normalization in [Normalization::Adjacency, Normalization::Transition] {
        let cfg = ExperimentConfig {
            dataset: "sbm".into(),
            dim: 128,
            normalization,
            ks: vec![100, 1000],
            ..Default::default()
        };
        let (rows, weights) = run_link_prediction(&g, &cfg)?;
        println!("# {normalization}, tuned weights [{weights}]");
        write_csv(std::io::stdout().lock(), &rows).expect("stdout");
    }
    Ok(())
}
