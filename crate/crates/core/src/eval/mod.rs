//! Link prediction and reconstruction scoring.

mod baselines;
mod metrics;
mod pairs;
pub mod protocol;
mod split;

pub use baselines::{adamic_adar, common_neighbors, random_baseline};
pub use metrics::{
    auc, auc_exact, auc_sampled, precision_at_k, precision_at_ks, AUC_SAMPLES, DEFAULT_AUC_SEED,
    EXACT_AUC_LIMIT,
};
pub use pairs::{
    candidate_pairs, enumerate_candidate_pairs, score_pairs, CandidatePairs, EdgeSet, PairMode,
    ScoredPairs, MAX_ALL_PAIRS,
};
pub use split::{shuffled_edges, split_edges, validation_split, EdgeSplit, ValidationSet};

pub(crate) use pairs::{check_ids as check_pair_ids, dot_scores};
