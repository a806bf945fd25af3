use std::collections::HashSet;

use crate::embed::EmbeddingMatrix;
use crate::error::{Error, Result};
use crate::graph::Graph;

/// Largest pair count enumerated exhaustively.
pub const MAX_ALL_PAIRS: u128 = 100_000_000;

/// Set of undirected node pairs, stored as `(min, max)`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EdgeSet(HashSet<(usize, usize)>);

impl EdgeSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_graph(g: &Graph) -> Self {
        EdgeSet(g.edges().map(|(u, v, _)| (u, v)).collect())
    }

    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = &'a (usize, usize)>) -> Self {
        EdgeSet(pairs.into_iter().map(|&(u, v)| canonical(u, v)).collect())
    }

    pub fn insert(&mut self, u: usize, v: usize) -> bool {
        self.0.insert(canonical(u, v))
    }

    pub fn contains(&self, u: usize, v: usize) -> bool {
        self.0.contains(&canonical(u, v))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

fn canonical(u: usize, v: usize) -> (usize, usize) {
    if u < v {
        (u, v)
    } else {
        (v, u)
    }
}

/// Scored node pairs. No self-pairs and no repeated unordered pair.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredPairs {
    pub pairs: Vec<(usize, usize, f64)>,
}

impl ScoredPairs {
    /// Checks the no-self-pair and no-duplicate invariants.
    pub fn new(pairs: Vec<(usize, usize, f64)>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(pairs.len());
        for &(u, v, _) in &pairs {
            if u == v {
                return Err(Error::Data(format!("self-pair ({u}, {u})")));
            }
            if !seen.insert(canonical(u, v)) {
                return Err(Error::Data(format!("pair ({u}, {v}) listed twice")));
            }
        }
        Ok(ScoredPairs { pairs })
    }

    /// For pairs known to be distinct, e.g. from [`enumerate_candidate_pairs`].
    pub(crate) fn trusted(pairs: Vec<(usize, usize, f64)>) -> Self {
        ScoredPairs { pairs }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn scores(&self) -> impl Iterator<Item = f64> + '_ {
        self.pairs.iter().map(|p| p.2)
    }

    /// Scores split by membership in `truth`: `(positives, negatives)`.
    pub fn partition(&self, truth: &EdgeSet) -> (Vec<f64>, Vec<f64>) {
        let mut pos = Vec::new();
        let mut neg = Vec::new();
        for &(u, v, s) in &self.pairs {
            if truth.contains(u, v) {
                pos.push(s);
            } else {
                neg.push(s);
            }
        }
        (pos, neg)
    }
}

pub(crate) fn check_ids(n: usize, pairs: &[(usize, usize)]) -> Result<()> {
    if let Some(&(u, v)) = pairs.iter().find(|&&(u, v)| u >= n || v >= n) {
        return Err(Error::Data(format!(
            "pair ({u}, {v}) references a node outside [0, {n})"
        )));
    }
    Ok(())
}

/// Inner-product scores without building [`ScoredPairs`].
pub(crate) fn dot_scores(u: &EmbeddingMatrix, pairs: &[(usize, usize)]) -> Vec<f64> {
    pairs
        .iter()
        .map(|&(a, b)| u.row(a).iter().zip(u.row(b)).map(|(x, y)| x * y).sum())
        .collect()
}

/// Score each pair by the inner product of its embedding rows.
pub fn score_pairs(u: &EmbeddingMatrix, pairs: &[(usize, usize)]) -> Result<ScoredPairs> {
    check_ids(u.n_nodes(), pairs)?;
    let scores = dot_scores(u, pairs);
    ScoredPairs::new(
        pairs
            .iter()
            .zip(scores)
            .map(|(&(a, b), s)| (a, b, s))
            .collect(),
    )
}

/// How candidate pairs are drawn from the `N (N - 1) / 2` possible ones.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PairMode {
    All,
    /// Each pair kept independently with probability `rate`, decided by a
    /// seeded hash of the pair so the sample is reproducible.
    Sampled {
        rate: f64,
        seed: u64,
    },
}

/// Lazily enumerated `(u, v)` pairs with `u < v`, in row-major order.
pub struct CandidatePairs<'a> {
    n: usize,
    u: usize,
    v: usize,
    mode: PairMode,
    exclude: Option<&'a EdgeSet>,
}

impl Iterator for CandidatePairs<'_> {
    type Item = (usize, usize);

    fn next(&mut self) -> Option<(usize, usize)> {
        loop {
            self.v += 1;
            if self.v >= self.n {
                self.u += 1;
                self.v = self.u + 1;
                if self.v >= self.n {
                    return None;
                }
            }
            let (u, v) = (self.u, self.v);
            if let PairMode::Sampled { rate, seed } = self.mode {
                if pair_uniform(seed, u, v) >= rate {
                    continue;
                }
            }
            if self.exclude.is_some_and(|ex| ex.contains(u, v)) {
                continue;
            }
            return Some((u, v));
        }
    }
}

/// Candidate pairs over the nodes of `g`, skipping pairs in `exclude`.
pub fn enumerate_candidate_pairs<'a>(
    g: &Graph,
    mode: PairMode,
    exclude: Option<&'a EdgeSet>,
) -> Result<CandidatePairs<'a>> {
    candidate_pairs(g.n_nodes(), mode, exclude)
}

pub fn candidate_pairs(
    n: usize,
    mode: PairMode,
    exclude: Option<&EdgeSet>,
) -> Result<CandidatePairs<'_>> {
    match mode {
        PairMode::All => {
            let total = n as u128 * n.saturating_sub(1) as u128 / 2;
            if total > MAX_ALL_PAIRS {
                return Err(Error::Usage(format!(
                    "{total} pairs is too many to enumerate; use sampled mode"
                )));
            }
        }
        PairMode::Sampled { rate, .. } => {
            if !(rate > 0.0 && rate <= 1.0) {
                return Err(Error::Usage(format!(
                    "sampling rate must lie in (0, 1], got {rate}"
                )));
            }
        }
    }
    Ok(CandidatePairs {
        n,
        u: 0,
        // First call to next() advances to (0, 1).
        v: 0,
        mode,
        exclude,
    })
}

pub(crate) fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Uniform value in `[0, 1)` determined by `(seed, u, v)`.
pub(crate) fn pair_uniform(seed: u64, u: usize, v: usize) -> f64 {
    let h = splitmix64(splitmix64(seed ^ splitmix64(u as u64)) ^ v as u64);
    (h >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn all_pairs_of_four() {
        let g = Graph::empty(4);
        let pairs: Vec<_> = enumerate_candidate_pairs(&g, PairMode::All, None)
            .unwrap()
            .collect();
        assert_eq!(pairs, vec![(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]);
    }

    #[test]
    fn tiny_graphs() {
        assert_eq!(candidate_pairs(0, PairMode::All, None).unwrap().count(), 0);
        assert_eq!(candidate_pairs(1, PairMode::All, None).unwrap().count(), 0);
        assert_eq!(candidate_pairs(2, PairMode::All, None).unwrap().count(), 1);
    }

    #[test]
    fn excluding_complete_graph_leaves_nothing() {
        let (k4, _) =
            Graph::from_edges(4, (0..4).flat_map(|u| (u + 1..4).map(move |v| (u, v, 1.0))))
                .unwrap();
        let ex = EdgeSet::from_graph(&k4);
        assert_eq!(
            enumerate_candidate_pairs(&k4, PairMode::All, Some(&ex))
                .unwrap()
                .count(),
            0
        );
    }

    #[test]
    fn sampled_count_within_binomial_bound() {
        let n = 10_000usize;
        let total = (n * (n - 1) / 2) as f64;
        let rate = 0.01;
        let count = candidate_pairs(n, PairMode::Sampled { rate, seed: 3 }, None)
            .unwrap()
            .count() as f64;
        let sigma = (total * rate * (1.0 - rate)).sqrt();
        assert!((count - rate * total).abs() <= 3.0 * sigma, "{count}");
    }

    #[test]
    fn sampled_is_reproducible() {
        let a: Vec<_> = candidate_pairs(
            300,
            PairMode::Sampled {
                rate: 0.05,
                seed: 1,
            },
            None,
        )
        .unwrap()
        .collect();
        let b: Vec<_> = candidate_pairs(
            300,
            PairMode::Sampled {
                rate: 0.05,
                seed: 1,
            },
            None,
        )
        .unwrap()
        .collect();
        assert_eq!(a, b);
        assert!(!a.is_empty());
    }

    #[test]
    fn oversized_all_mode_rejected() {
        assert!(candidate_pairs(20_000, PairMode::All, None).is_err());
        assert!(candidate_pairs(10, PairMode::Sampled { rate: 0.0, seed: 0 }, None).is_err());
    }

    #[test]
    fn scoring_examples() {
        let u =
            EmbeddingMatrix::from_matrix(array![[1.0, 0.0], [0.0, 1.0], [2.0, 4.0], [1.0, 2.0]]);
        let s = score_pairs(&u, &[(0, 1), (2, 3)]).unwrap();
        assert_eq!(s.pairs[0].2, 0.0);
        assert_eq!(s.pairs[1].2, 2.0 * 5.0);
        assert!(score_pairs(&u, &[(0, 4)]).is_err());
        assert!(score_pairs(&u, &[(1, 1)]).is_err());
        assert!(score_pairs(&u, &[(0, 1), (1, 0)]).is_err());
    }
}
