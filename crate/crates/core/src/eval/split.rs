use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Train/test partition of a graph's edges.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeSplit {
    /// Same node set as the original graph, hidden edges removed.
    pub train: Graph,
    /// Hidden edges as `(u, v)` with `u < v`, sorted.
    pub test_edges: Vec<(usize, usize)>,
    /// Weights of `test_edges`, aligned.
    pub test_weights: Vec<f64>,
    pub seed: u64,
    pub hidden_fraction: f64,
}

impl EdgeSplit {
    /// The original graph: train edges plus the hidden ones.
    pub fn reassemble(&self) -> Result<Graph> {
        let edges = self.train.edges().chain(
            self.test_edges
                .iter()
                .zip(&self.test_weights)
                .map(|(&(u, v), &w)| (u, v, w)),
        );
        let (g, _) = Graph::from_edges(self.train.n_nodes(), edges)?;
        g.with_labels(self.train.labels().clone())
    }
}

/// Edges of `g` in a seeded uniformly random order.
pub fn shuffled_edges(g: &Graph, seed: u64) -> Vec<(usize, usize, f64)> {
    let mut edges: Vec<_> = g.edges().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    edges.shuffle(&mut rng);
    edges
}

/// Hide `round(hidden_fraction * M)` uniformly chosen edges.
pub fn split_edges(g: &Graph, hidden_fraction: f64, seed: u64) -> Result<EdgeSplit> {
    if !(hidden_fraction > 0.0 && hidden_fraction < 1.0) {
        return Err(Error::Usage(format!(
            "hidden fraction must lie in (0, 1), got {hidden_fraction}"
        )));
    }
    let edges = shuffled_edges(g, seed);
    let n_hidden = (hidden_fraction * edges.len() as f64).round() as usize;
    let (hidden, kept) = edges.split_at(n_hidden);
    let (train, _) = Graph::from_edges(g.n_nodes(), kept.iter().copied())?;
    let train = train.with_labels(g.labels().clone())?;
    let mut hidden = hidden.to_vec();
    hidden.sort_by_key(|&(u, v, _)| (u, v));
    Ok(EdgeSplit {
        train,
        test_edges: hidden.iter().map(|&(u, v, _)| (u, v)).collect(),
        test_weights: hidden.iter().map(|&(_, _, w)| w).collect(),
        seed,
        hidden_fraction,
    })
}

/// Held-out pairs for tuning: hidden edges and sampled non-edges.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationSet {
    pub positives: Vec<(usize, usize)>,
    pub negatives: Vec<(usize, usize)>,
}

/// Hide `fraction` of the edges of `g` as validation positives and sample
/// `negatives_per_positive` times as many non-edges of `g` as negatives.
/// Returns the split (whose `train` is the graph to embed for tuning) and
/// the validation pairs.
pub fn validation_split(
    g: &Graph,
    fraction: f64,
    negatives_per_positive: usize,
    seed: u64,
) -> Result<(EdgeSplit, ValidationSet)> {
    let split = split_edges(g, fraction, seed)?;
    let n = g.n_nodes();
    let total_pairs = n as u128 * n.saturating_sub(1) as u128 / 2;
    let available = (total_pairs - g.n_edges() as u128) as usize;
    let wanted = (split.test_edges.len() * negatives_per_positive).min(available);

    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6E65_6761_7469_7665);
    let negatives: Vec<(usize, usize)> = if wanted * 2 > available {
        let mut all: Vec<(usize, usize)> = (0..n)
            .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
            .filter(|&(u, v)| !g.has_edge(u, v))
            .collect();
        all.shuffle(&mut rng);
        all.truncate(wanted);
        all
    } else {
        let mut seen = HashSet::with_capacity(wanted);
        let mut out = Vec::with_capacity(wanted);
        while out.len() < wanted {
            let u = rng.random_range(0..n);
            let v = rng.random_range(0..n);
            let key = (u.min(v), u.max(v));
            if u == v || g.has_edge(u, v) || !seen.insert(key) {
                continue;
            }
            out.push(key);
        }
        out
    };
    if split.test_edges.is_empty() || negatives.is_empty() {
        return Err(Error::Data(
            "graph too small or too dense for a validation split".into(),
        ));
    }
    let validation = ValidationSet {
        positives: split.test_edges.clone(),
        negatives,
    };
    Ok((split, validation))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::generate_er;

    #[test]
    fn hidden_count_and_reassembly() {
        let g = generate_er(100, 333, 2).unwrap();
        let s = split_edges(&g, 0.3, 7).unwrap();
        assert_eq!(s.test_edges.len(), (0.3f64 * 333.0).round() as usize);
        assert_eq!(s.train.n_edges() + s.test_edges.len(), 333);
        for &(u, v) in &s.test_edges {
            assert!(!s.train.has_edge(u, v));
            assert!(g.has_edge(u, v));
        }
        assert_eq!(s.reassemble().unwrap(), g);
    }

    #[test]
    fn reproducible_per_seed() {
        let g = generate_er(80, 200, 1).unwrap();
        assert_eq!(
            split_edges(&g, 0.3, 5).unwrap(),
            split_edges(&g, 0.3, 5).unwrap()
        );
        assert_ne!(
            split_edges(&g, 0.3, 5).unwrap().test_edges,
            split_edges(&g, 0.3, 6).unwrap().test_edges
        );
    }

    #[test]
    fn validation_pairs_are_disjoint_from_edges() {
        let g = generate_er(200, 800, 4).unwrap();
        let (split, val) = validation_split(&g, 0.1, 5, 2).unwrap();
        assert_eq!(val.positives.len(), 80);
        assert_eq!(val.negatives.len(), 400);
        for &(u, v) in &val.negatives {
            assert!(u < v && !g.has_edge(u, v));
        }
        for &(u, v) in &val.positives {
            assert!(g.has_edge(u, v) && !split.train.has_edge(u, v));
        }
        let dense = generate_er(12, 60, 1).unwrap();
        let (_, val) = validation_split(&dense, 0.2, 10, 3).unwrap();
        assert_eq!(val.negatives.len(), 6);
    }

    #[test]
    fn fraction_out_of_range() {
        let g = generate_er(10, 10, 1).unwrap();
        for f in [0.0, 1.0, -0.1, 1.5, f64::NAN] {
            assert!(split_edges(&g, f, 0).is_err());
        }
    }
}
