//! Local neighborhood link-prediction scores.

use super::pairs::{check_ids, pair_uniform, ScoredPairs};
use crate::error::Result;
use crate::graph::Graph;

/// Walk the intersection of two sorted neighbor lists.
fn for_each_common(a: &[usize], b: &[usize], mut f: impl FnMut(usize)) {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                f(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
}

pub(crate) fn cn_scores(g: &Graph, pairs: &[(usize, usize)]) -> Vec<f64> {
    pairs
        .iter()
        .map(|&(u, v)| {
            let mut count = 0usize;
            for_each_common(g.neighbors(u), g.neighbors(v), |_| count += 1);
            count as f64
        })
        .collect()
}

pub(crate) fn aa_scores(g: &Graph, pairs: &[(usize, usize)]) -> Vec<f64> {
    pairs
        .iter()
        .map(|&(u, v)| {
            let mut score = 0.0;
            // A common neighbor is adjacent to both endpoints, so its degree
            // is at least 2 and the logarithm is positive.
            for_each_common(g.neighbors(u), g.neighbors(v), |w| {
                score += 1.0 / (g.degree(w) as f64).ln()
            });
            score
        })
        .collect()
}

pub(crate) fn random_scores(seed: u64, pairs: &[(usize, usize)]) -> Vec<f64> {
    pairs
        .iter()
        .map(|&(u, v)| pair_uniform(seed, u.min(v), u.max(v)))
        .collect()
}

fn zip_scores(pairs: &[(usize, usize)], scores: Vec<f64>) -> Vec<(usize, usize, f64)> {
    pairs
        .iter()
        .zip(scores)
        .map(|(&(u, v), s)| (u, v, s))
        .collect()
}

/// `|N(u) ∩ N(v)|` for each pair.
pub fn common_neighbors(g: &Graph, pairs: &[(usize, usize)]) -> Result<ScoredPairs> {
    check_ids(g.n_nodes(), pairs)?;
    ScoredPairs::new(zip_scores(pairs, cn_scores(g, pairs)))
}

/// `sum over w in N(u) ∩ N(v) of 1 / ln(deg w)` for each pair.
pub fn adamic_adar(g: &Graph, pairs: &[(usize, usize)]) -> Result<ScoredPairs> {
    check_ids(g.n_nodes(), pairs)?;
    ScoredPairs::new(zip_scores(pairs, aa_scores(g, pairs)))
}

/// Uniform scores from a seeded hash of each pair, a chance-level reference.
pub fn random_baseline(seed: u64, pairs: &[(usize, usize)]) -> Result<ScoredPairs> {
    ScoredPairs::new(zip_scores(pairs, random_scores(seed, pairs)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(n: usize, edges: &[(usize, usize)]) -> Graph {
        Graph::from_edges(n, edges.iter().map(|&(u, v)| (u, v, 1.0)))
            .unwrap()
            .0
    }

    #[test]
    fn triangle_pairs_share_one() {
        let t = g(3, &[(0, 1), (1, 2), (0, 2)]);
        let s = common_neighbors(&t, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        assert!(s.scores().all(|x| x == 1.0));
    }

    #[test]
    fn disjoint_edges_share_none() {
        let d = g(4, &[(0, 1), (2, 3)]);
        assert_eq!(common_neighbors(&d, &[(0, 2)]).unwrap().pairs[0].2, 0.0);
        assert_eq!(adamic_adar(&d, &[(0, 2)]).unwrap().pairs[0].2, 0.0);
    }

    #[test]
    fn star_leaves() {
        let s = g(4, &[(0, 1), (0, 2), (0, 3)]);
        let cn = common_neighbors(&s, &[(1, 2), (1, 3), (2, 3)]).unwrap();
        assert!(cn.scores().all(|x| x == 1.0));
    }

    #[test]
    fn adamic_adar_hand_values() {
        let p = g(3, &[(0, 1), (1, 2)]);
        let s = adamic_adar(&p, &[(0, 2)]).unwrap().pairs[0].2;
        assert!((s - 1.0 / 2f64.ln()).abs() < 1e-15);
        assert!((s - 1.4427).abs() < 1e-4);

        // Node 2 has degree 2 and node 3 degree 4; both neighbor 0 and 1.
        let h = g(6, &[(0, 2), (1, 2), (0, 3), (1, 3), (3, 4), (3, 5)]);
        let s = adamic_adar(&h, &[(0, 1)]).unwrap().pairs[0].2;
        assert!((s - (1.0 / 2f64.ln() + 1.0 / 4f64.ln())).abs() < 1e-15);
        assert!((s - 2.1640).abs() < 1e-4);
    }

    #[test]
    fn out_of_range() {
        let p = g(3, &[(0, 1)]);
        assert!(common_neighbors(&p, &[(0, 3)]).is_err());
        assert!(adamic_adar(&p, &[(5, 1)]).is_err());
    }
}
