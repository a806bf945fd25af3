use std::cmp::Ordering;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::pairs::{EdgeSet, ScoredPairs};
use crate::error::{Error, Result};

/// Above this many positive-negative comparisons AUC is estimated by sampling.
pub const EXACT_AUC_LIMIT: u128 = 100_000_000;
/// Comparisons drawn by the sampled AUC estimator.
pub const AUC_SAMPLES: usize = 10_000_000;
/// Seed used by [`auc`] when it falls back to sampling.
pub const DEFAULT_AUC_SEED: u64 = 0x5EED_A0C0;

fn check_scores(pos: &[f64], neg: &[f64]) -> Result<()> {
    if pos.is_empty() || neg.is_empty() {
        return Err(Error::Data(format!(
            "AUC needs positive and negative scores, got {} and {}",
            pos.len(),
            neg.len()
        )));
    }
    if pos.iter().chain(neg).any(|s| s.is_nan()) {
        return Err(Error::Data("AUC scores contain NaN".into()));
    }
    Ok(())
}

/// Probability that a random positive outscores a random negative, ties
/// counting one half. Exact up to [`EXACT_AUC_LIMIT`] comparisons,
/// otherwise [`auc_sampled`] with [`AUC_SAMPLES`] draws.
pub fn auc(pos: &[f64], neg: &[f64]) -> Result<f64> {
    check_scores(pos, neg)?;
    if pos.len() as u128 * neg.len() as u128 <= EXACT_AUC_LIMIT {
        auc_exact(pos, neg)
    } else {
        auc_sampled(pos, neg, AUC_SAMPLES, DEFAULT_AUC_SEED)
    }
}

/// Exact AUC by binary search over the sorted negatives.
pub fn auc_exact(pos: &[f64], neg: &[f64]) -> Result<f64> {
    check_scores(pos, neg)?;
    let mut sorted = neg.to_vec();
    sorted.sort_by(f64::total_cmp);
    let (mut wins, mut ties) = (0u128, 0u128);
    for &p in pos {
        let below = sorted.partition_point(|&x| x < p);
        let not_above = sorted.partition_point(|&x| x <= p);
        wins += below as u128;
        ties += (not_above - below) as u128;
    }
    let total = pos.len() as u128 * neg.len() as u128;
    Ok((wins as f64 + 0.5 * ties as f64) / total as f64)
}

/// Monte Carlo AUC over `samples` uniformly drawn (positive, negative) pairs.
pub fn auc_sampled(pos: &[f64], neg: &[f64], samples: usize, seed: u64) -> Result<f64> {
    check_scores(pos, neg)?;
    if samples == 0 {
        return Err(Error::Usage("sampled AUC needs at least one sample".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut score = 0.0f64;
    for _ in 0..samples {
        let p = pos[rng.random_range(0..pos.len())];
        let n = neg[rng.random_range(0..neg.len())];
        score += match p.partial_cmp(&n) {
            Some(Ordering::Greater) => 1.0,
            Some(Ordering::Equal) => 0.5,
            _ => 0.0,
        };
    }
    Ok(score / samples as f64)
}

/// Ranking order: descending score, then ascending `(u, v)`.
fn rank_cmp(a: &(usize, usize, f64), b: &(usize, usize, f64)) -> Ordering {
    b.2.total_cmp(&a.2).then((a.0, a.1).cmp(&(b.0, b.1)))
}

/// Fraction of true edges among the `k` highest-scored pairs.
pub fn precision_at_k(ranked: &ScoredPairs, truth: &EdgeSet, k: usize) -> Result<f64> {
    Ok(precision_at_ks(ranked, truth, &[k])?[0])
}

/// [`precision_at_k`] for several cutoffs with a single partial sort.
pub fn precision_at_ks(ranked: &ScoredPairs, truth: &EdgeSet, ks: &[usize]) -> Result<Vec<f64>> {
    let n = ranked.len();
    if let Some(&bad) = ks.iter().find(|&&k| k == 0 || k > n) {
        return Err(Error::Usage(format!("K = {bad} is outside [1, {n}]")));
    }
    let Some(&kmax) = ks.iter().max() else {
        return Ok(Vec::new());
    };
    let mut items = ranked.pairs.clone();
    if kmax < items.len() {
        items.select_nth_unstable_by(kmax - 1, rank_cmp);
        items.truncate(kmax);
    }
    items.sort_by(rank_cmp);
    let mut hits = Vec::with_capacity(kmax + 1);
    hits.push(0usize);
    for &(u, v, _) in &items {
        let last = *hits.last().unwrap();
        hits.push(last + truth.contains(u, v) as usize);
    }
    Ok(ks.iter().map(|&k| hits[k] as f64 / k as f64).collect())
}
