use super::{recombine, ProjectionState, Weights};
use crate::error::{Error, Result};
use crate::eval::{auc, dot_scores, precision_at_k, EdgeSet, ScoredPairs, ValidationSet};

/// Candidate values for each of `a1..aq` in [`default_grid`].
pub const GRID_VALUES: [f64; 5] = [0.0, 0.01, 0.1, 1.0, 10.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ValidationMetric {
    #[default]
    Auc,
    PrecisionAtK(usize),
}

/// `a0 = 0` and every combination of [`GRID_VALUES`] for `a1..aq`, except
/// the all-zero point. Ordered lexicographically with `a1` slowest.
pub fn default_grid(order: usize) -> Vec<Weights> {
    let mut out = Vec::new();
    let mut idx = vec![0usize; order];
    loop {
        if idx.iter().any(|&i| i != 0) {
            let mut alpha = vec![0.0];
            alpha.extend(idx.iter().map(|&i| GRID_VALUES[i]));
            out.push(Weights::new(alpha).expect("order >= 1"));
        }
        // Odometer increment, last coefficient fastest.
        let mut pos = order;
        loop {
            if pos == 0 {
                return out;
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < GRID_VALUES.len() {
                break;
            }
            idx[pos] = 0;
        }
    }
}

/// Like [`default_grid`] but `a0` also ranges over [`GRID_VALUES`]. Useful
/// for reconstruction, where the `U0` cross terms expose direct edges.
pub fn extended_grid(order: usize) -> Vec<Weights> {
    let mut out = Vec::new();
    for &a0 in &GRID_VALUES {
        for w in default_grid(order) {
            let mut alpha = w.alpha().to_vec();
            alpha[0] = a0;
            out.push(Weights::new(alpha).expect("same length"));
        }
    }
    out
}

/// Validation score of one weight vector.
pub fn validation_score(
    state: &ProjectionState,
    weights: &Weights,
    validation: &ValidationSet,
    metric: ValidationMetric,
) -> Result<f64> {
    let emb = recombine(state, weights)?;
    let pos = dot_scores(&emb, &validation.positives);
    let neg = dot_scores(&emb, &validation.negatives);
    match metric {
        ValidationMetric::Auc => auc(&pos, &neg),
        ValidationMetric::PrecisionAtK(k) => {
            let ranked = ScoredPairs::trusted(
                validation
                    .positives
                    .iter()
                    .zip(&pos)
                    .chain(validation.negatives.iter().zip(&neg))
                    .map(|(&(u, v), &s)| (u, v, s))
                    .collect(),
            );
            precision_at_k(&ranked, &EdgeSet::from_pairs(&validation.positives), k)
        }
    }
}

/// The grid point with the best validation score; the first one wins ties.
/// Only the final combination step is repeated per candidate.
pub fn grid_search_weights(
    state: &ProjectionState,
    grid: &[Weights],
    validation: &ValidationSet,
    metric: ValidationMetric,
) -> Result<Weights> {
    grid_search_scored(state, grid, validation, metric).map(|(w, _)| w)
}

/// [`grid_search_weights`] that also returns the winning score.
pub fn grid_search_scored(
    state: &ProjectionState,
    grid: &[Weights],
    validation: &ValidationSet,
    metric: ValidationMetric,
) -> Result<(Weights, f64)> {
    if grid.is_empty() {
        return Err(Error::Usage("weight grid is empty".into()));
    }
    let n = state.n_nodes();
    crate::eval::check_pair_ids(n, &validation.positives)?;
    crate::eval::check_pair_ids(n, &validation.negatives)?;
    let mut best: Option<(f64, &Weights)> = None;
    for w in grid {
        let score = validation_score(state, w, validation, metric)?;
        log::debug!("grid point [{w}]: {score}");
        if best.is_none_or(|(b, _)| score > b) {
            best = Some((score, w));
        }
    }
    let (score, w) = best.expect("non-empty grid");
    Ok((w.clone(), score))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embed::{embed_static, RngSpec};
    use crate::graph::{generate_sbm, Normalization};

    #[test]
    fn default_grid_shape() {
        let g = default_grid(3);
        assert_eq!(g.len(), 124);
        assert!(g.iter().all(|w| w.alpha()[0] == 0.0 && w.order() == 3));
        assert!(g.iter().all(|w| w.alpha()[1..].iter().any(|&a| a != 0.0)));
        assert_eq!(g[0].alpha(), &[0.0, 0.0, 0.0, 0.01]);
        assert_eq!(default_grid(1).len(), 4);
        assert_eq!(extended_grid(3).len(), 5 * 124);
        assert_eq!(extended_grid(3)[..124], default_grid(3)[..]);
    }

    fn sbm_setup() -> (ProjectionState, ValidationSet) {
        let g = generate_sbm(300, 3, 0.15, 0.01, 4).unwrap();
        let (split, val) = crate::eval::validation_split(&g, 0.1, 5, 9).unwrap();
        let w = Weights::one_hot(3, 1).unwrap();
        let (state, _) = embed_static(
            &split.train,
            32,
            &w,
            RngSpec::new(1),
            Normalization::Adjacency,
        )
        .unwrap();
        (state, val)
    }

    #[test]
    fn singleton_grid_and_empty_grid() {
        let (state, val) = sbm_setup();
        let only = Weights::new(vec![0.5, 1.0, 0.0, 2.0]).unwrap();
        assert_eq!(
            grid_search_weights(&state, &[only.clone()], &val, ValidationMetric::Auc).unwrap(),
            only
        );
        assert!(grid_search_weights(&state, &[], &val, ValidationMetric::Auc).is_err());
    }

    #[test]
    fn best_dominates_trivial_point() {
        let (state, val) = sbm_setup();
        let trivial = Weights::new(vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        let mut grid = default_grid(3);
        grid.push(trivial.clone());
        let best = grid_search_weights(&state, &grid, &val, ValidationMetric::Auc).unwrap();
        let best_auc = validation_score(&state, &best, &val, ValidationMetric::Auc).unwrap();
        let trivial_auc = validation_score(&state, &trivial, &val, ValidationMetric::Auc).unwrap();
        assert!(best_auc >= trivial_auc);
        assert!(best_auc > 0.7, "{best_auc}");
    }

    #[test]
    fn score_matches_eval_auc() {
        let (state, val) = sbm_setup();
        let w = Weights::new(vec![0.0, 1.0, 0.1, 0.01]).unwrap();
        let emb = recombine(&state, &w).unwrap();
        let pos: Vec<f64> = crate::eval::score_pairs(&emb, &val.positives)
            .unwrap()
            .scores()
            .collect();
        let neg: Vec<f64> = crate::eval::score_pairs(&emb, &val.negatives)
            .unwrap()
            .scores()
            .collect();
        let direct = auc(&pos, &neg).unwrap();
        assert_eq!(
            validation_score(&state, &w, &val, ValidationMetric::Auc).unwrap(),
            direct
        );
    }

    #[test]
    fn ties_pick_first() {
        let (state, val) = sbm_setup();
        let a = Weights::new(vec![0.0, 1.0, 0.0, 0.0]).unwrap();
        let b = Weights::new(vec![0.0, 2.0, 0.0, 0.0]).unwrap();
        // Positive rescaling leaves every ranking, hence the AUC, unchanged.
        let best =
            grid_search_weights(&state, &[a.clone(), b], &val, ValidationMetric::Auc).unwrap();
        assert_eq!(best, a);
    }
}
