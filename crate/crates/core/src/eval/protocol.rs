//! End-to-end evaluation runs producing CSV metric rows.

use std::cmp::Ordering;
use std::fmt;
use std::io::Write;

use super::baselines::{aa_scores, cn_scores, random_scores};
use super::metrics::{auc, precision_at_ks};
use super::pairs::{candidate_pairs, dot_scores, EdgeSet, PairMode, ScoredPairs};
use super::split::{shuffled_edges, split_edges, validation_split, EdgeSplit};
use crate::dynamic::update_in_place;
use crate::embed::{
    default_grid, grid_search_scored, recombine, EmbeddingMatrix, ProjectionState, RngSpec,
    ValidationMetric, Weights,
};
use crate::error::{Error, Result};
use crate::graph::{apply_delta, Graph, GraphDelta, Normalization};
use crate::parallel::embed_parallel;

pub const CSV_HEADER: &str = "task,dataset,method,param,value,seed";

/// One line of evaluation output. `param` holds K for precision rows and
/// the hidden or observed edge fraction for AUC rows.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricRow {
    pub task: String,
    pub dataset: String,
    pub method: String,
    pub param: String,
    pub value: f64,
    pub seed: u64,
}

impl fmt::Display for MetricRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{},{},{},{},{},{}",
            self.task, self.dataset, self.method, self.param, self.value, self.seed
        )
    }
}

pub fn write_csv<W: Write>(mut out: W, rows: &[MetricRow]) -> std::io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for row in rows {
        writeln!(out, "{row}")?;
    }
    Ok(())
}

/// A way of scoring candidate pairs.
#[derive(Debug, Clone, Copy)]
pub enum Scorer<'a> {
    /// Inner products of embedding rows, reported under `name`.
    Embedding {
        name: &'a str,
        matrix: &'a EmbeddingMatrix,
    },
    CommonNeighbors(&'a Graph),
    AdamicAdar(&'a Graph),
    Random(u64),
}

impl Scorer<'_> {
    pub fn name(&self) -> &str {
        match self {
            Scorer::Embedding { name, .. } => name,
            Scorer::CommonNeighbors(_) => "common_neighbors",
            Scorer::AdamicAdar(_) => "adamic_adar",
            Scorer::Random(_) => "random",
        }
    }

    fn n_nodes(&self) -> Option<usize> {
        match self {
            Scorer::Embedding { matrix, .. } => Some(matrix.n_nodes()),
            Scorer::CommonNeighbors(g) | Scorer::AdamicAdar(g) => Some(g.n_nodes()),
            Scorer::Random(_) => None,
        }
    }

    fn scores(&self, pairs: &[(usize, usize)]) -> Vec<f64> {
        match self {
            Scorer::Embedding { matrix, .. } => dot_scores(matrix, pairs),
            Scorer::CommonNeighbors(g) => cn_scores(g, pairs),
            Scorer::AdamicAdar(g) => aa_scores(g, pairs),
            Scorer::Random(seed) => random_scores(*seed, pairs),
        }
    }
}

/// Which pairs are candidates and which of them count as true.
pub struct PairTask<'a> {
    pub task: &'a str,
    pub dataset: &'a str,
    /// Value of `param` on the AUC row.
    pub auc_param: String,
    pub n_nodes: usize,
    pub mode: PairMode,
    pub exclude: Option<&'a EdgeSet>,
    pub truth: &'a EdgeSet,
    pub ks: &'a [usize],
    pub seed: u64,
}

const CHUNK: usize = 1 << 20;

fn rank_cmp(a: &(usize, usize, f64), b: &(usize, usize, f64)) -> Ordering {
    b.2.total_cmp(&a.2).then((a.0, a.1).cmp(&(b.0, b.1)))
}

/// Best `k` pairs seen so far under the ranking order, in bounded memory.
struct TopK {
    k: usize,
    items: Vec<(usize, usize, f64)>,
}

impl TopK {
    fn push(&mut self, item: (usize, usize, f64)) {
        if self.k == 0 {
            return;
        }
        self.items.push(item);
        if self.items.len() >= 2 * self.k.max(CHUNK / 4) {
            self.prune();
        }
    }

    fn prune(&mut self) {
        if self.items.len() > self.k {
            self.items.select_nth_unstable_by(self.k - 1, rank_cmp);
            self.items.truncate(self.k);
        }
    }
}

/// AUC and Precision@K of each scorer over the candidate pairs of `task`.
/// Pairs are streamed in chunks; only scores and the top `max(K)` pairs
/// are kept.
pub fn evaluate_pairs(task: &PairTask<'_>, scorers: &[Scorer<'_>]) -> Result<Vec<MetricRow>> {
    for s in scorers {
        if let Some(n) = s.n_nodes() {
            if n != task.n_nodes {
                return Err(Error::Shape(format!(
                    "{} covers {n} nodes, the evaluated graph has {}",
                    s.name(),
                    task.n_nodes
                )));
            }
        }
    }
    let kmax = task.ks.iter().copied().max().unwrap_or(0);
    let mut pos: Vec<Vec<f64>> = vec![Vec::new(); scorers.len()];
    let mut neg: Vec<Vec<f64>> = vec![Vec::new(); scorers.len()];
    let mut top: Vec<TopK> = scorers
        .iter()
        .map(|_| TopK {
            k: kmax,
            items: Vec::new(),
        })
        .collect();
    let mut total = 0usize;

    let mut stream = candidate_pairs(task.n_nodes, task.mode, task.exclude)?;
    let mut chunk = Vec::with_capacity(CHUNK);
    loop {
        chunk.clear();
        chunk.extend(stream.by_ref().take(CHUNK));
        if chunk.is_empty() {
            break;
        }
        total += chunk.len();
        let is_true: Vec<bool> = chunk
            .iter()
            .map(|&(u, v)| task.truth.contains(u, v))
            .collect();
        for (k, scorer) in scorers.iter().enumerate() {
            let scores = scorer.scores(&chunk);
            for ((&(u, v), &t), &s) in chunk.iter().zip(&is_true).zip(&scores) {
                if t {
                    pos[k].push(s);
                } else {
                    neg[k].push(s);
                }
                top[k].push((u, v, s));
            }
        }
    }
    log::info!("{}: scored {total} candidate pairs", task.task);

    let mut rows = Vec::new();
    for (k, scorer) in scorers.iter().enumerate() {
        let row = |task_name: String, param: String, value: f64| MetricRow {
            task: task_name,
            dataset: task.dataset.to_string(),
            method: scorer.name().to_string(),
            param,
            value,
            seed: task.seed,
        };
        rows.push(row(
            format!("{}_auc", task.task),
            task.auc_param.clone(),
            auc(&pos[k], &neg[k])?,
        ));
        if !task.ks.is_empty() {
            if kmax > total {
                return Err(Error::Usage(format!(
                    "K = {kmax} exceeds the {total} candidate pairs"
                )));
            }
            top[k].prune();
            let ranked = ScoredPairs::trusted(std::mem::take(&mut top[k].items));
            let precisions = precision_at_ks(&ranked, task.truth, task.ks)?;
            for (&kk, p) in task.ks.iter().zip(precisions) {
                rows.push(row(format!("{}_precision", task.task), kk.to_string(), p));
            }
        }
    }
    Ok(rows)
}

/// Reconstruction: rank pairs of `g` itself; edges of `g` are the truth.
/// The AUC row's `param` is `all` or the pair sampling rate.
pub fn evaluate_reconstruction(
    g: &Graph,
    dataset: &str,
    scorers: &[Scorer<'_>],
    mode: PairMode,
    ks: &[usize],
    seed: u64,
) -> Result<Vec<MetricRow>> {
    let truth = EdgeSet::from_graph(g);
    evaluate_pairs(
        &PairTask {
            task: "reconstruction",
            dataset,
            auc_param: match mode {
                PairMode::All => "all".into(),
                PairMode::Sampled { rate, .. } => rate.to_string(),
            },
            n_nodes: g.n_nodes(),
            mode,
            exclude: None,
            truth: &truth,
            ks,
            seed,
        },
        scorers,
    )
}

/// Link prediction: candidates exclude training edges; hidden edges are
/// the truth.
pub fn evaluate_link_prediction(
    split: &EdgeSplit,
    dataset: &str,
    scorers: &[Scorer<'_>],
    mode: PairMode,
    ks: &[usize],
) -> Result<Vec<MetricRow>> {
    let train = EdgeSet::from_graph(&split.train);
    let truth = EdgeSet::from_pairs(&split.test_edges);
    evaluate_pairs(
        &PairTask {
            task: "linkpred",
            dataset,
            auc_param: split.hidden_fraction.to_string(),
            n_nodes: split.train.n_nodes(),
            mode,
            exclude: Some(&train),
            truth: &truth,
            ks,
            seed: split.seed,
        },
        scorers,
    )
}

/// Settings shared by the experiment drivers.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub dataset: String,
    pub dim: usize,
    pub order: usize,
    /// Fixed weights; `None` selects them by grid search on a validation
    /// split of the training graph.
    pub weights: Option<Weights>,
    pub normalization: Normalization,
    pub seed: u64,
    pub workers: usize,
    pub hidden_fraction: f64,
    pub validation_fraction: f64,
    pub negatives_per_positive: usize,
    pub mode: PairMode,
    pub ks: Vec<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            dataset: "graph".into(),
            dim: crate::embed::DEFAULT_DIM,
            order: crate::embed::DEFAULT_ORDER,
            weights: None,
            normalization: Normalization::Adjacency,
            seed: 0,
            workers: 1,
            hidden_fraction: 0.3,
            validation_fraction: 0.1,
            negatives_per_positive: 5,
            mode: PairMode::All,
            ks: Vec::new(),
        }
    }
}

impl ExperimentConfig {
    fn rng(&self) -> RngSpec {
        RngSpec::new(self.seed)
    }

    /// Weights for embedding `train`: the fixed ones, or the best grid
    /// point on a held-out part of `train`.
    pub fn select_weights(&self, train: &Graph) -> Result<Weights> {
        if let Some(w) = &self.weights {
            if w.order() != self.order {
                return Err(Error::Usage(format!(
                    "{} weights given for order {}",
                    w.alpha().len(),
                    self.order
                )));
            }
            return Ok(w.clone());
        }
        Ok(self.tune_weights(train)?.0)
    }

    /// Grid search over [`default_grid`] on a validation split of `train`.
    /// Returns the best weights and their validation AUC.
    pub fn tune_weights(&self, train: &Graph) -> Result<(Weights, f64)> {
        let (tune, validation) = validation_split(
            train,
            self.validation_fraction,
            self.negatives_per_positive,
            self.seed.wrapping_add(1),
        )?;
        let probe = Weights::one_hot(self.order, 1)?;
        let (state, _) = embed_parallel(
            &tune.train,
            self.dim,
            &probe,
            self.rng(),
            self.normalization,
            self.workers,
        )?;
        let (best, score) = grid_search_scored(
            &state,
            &default_grid(self.order),
            &validation,
            ValidationMetric::Auc,
        )?;
        log::info!("selected weights [{best}], validation AUC {score}");
        Ok((best, score))
    }
}

/// Weights from `grid` maximizing reconstruction AUC of `state` over a
/// seeded sample of pairs (rate `rate`).
pub fn select_reconstruction_weights(
    state: &ProjectionState,
    g: &Graph,
    grid: &[Weights],
    rate: f64,
    seed: u64,
) -> Result<(Weights, f64)> {
    if grid.is_empty() {
        return Err(Error::Usage("weight grid is empty".into()));
    }
    let truth = EdgeSet::from_graph(g);
    let pairs: Vec<_> =
        candidate_pairs(g.n_nodes(), PairMode::Sampled { rate, seed }, None)?.collect();
    let labels: Vec<bool> = pairs.iter().map(|&(u, v)| truth.contains(u, v)).collect();
    let mut best: Option<(f64, &Weights)> = None;
    for w in grid {
        let emb = recombine(state, w)?;
        let (mut pos, mut neg) = (Vec::new(), Vec::new());
        for (s, &t) in dot_scores(&emb, &pairs).into_iter().zip(&labels) {
            if t {
                pos.push(s);
            } else {
                neg.push(s);
            }
        }
        let score = auc(&pos, &neg)?;
        if best.is_none_or(|(b, _)| score > b) {
            best = Some((score, w));
        }
    }
    let (score, w) = best.expect("non-empty grid");
    Ok((w.clone(), score))
}

/// Hide edges, tune weights on the training graph, embed it and compare
/// against the baselines. Returns the rows and the weights used.
pub fn run_link_prediction(g: &Graph, cfg: &ExperimentConfig) -> Result<(Vec<MetricRow>, Weights)> {
    let split = split_edges(g, cfg.hidden_fraction, cfg.seed)?;
    let weights = cfg.select_weights(&split.train)?;
    let (_, emb) = embed_parallel(
        &split.train,
        cfg.dim,
        &weights,
        cfg.rng(),
        cfg.normalization,
        cfg.workers,
    )?;
    let scorers = [
        Scorer::Embedding {
            name: "projection",
            matrix: &emb,
        },
        Scorer::CommonNeighbors(&split.train),
        Scorer::AdamicAdar(&split.train),
        Scorer::Random(cfg.seed),
    ];
    let rows = evaluate_link_prediction(&split, &cfg.dataset, &scorers, cfg.mode, &cfg.ks)?;
    Ok((rows, weights))
}

/// Reveal edges in increments: at each fraction `f` of `fractions` the
/// first `round(f M)` edges of a seeded shuffle are observed and the rest
/// are to be predicted. The embedding is carried forward by incremental
/// updates (`projection_dynamic`) and, for comparison, recomputed from
/// scratch (`projection_rerun`). One AUC row per method and step.
pub fn run_dynamic_link_prediction(
    g: &Graph,
    cfg: &ExperimentConfig,
    fractions: &[f64],
) -> Result<Vec<MetricRow>> {
    if cfg.normalization != Normalization::Adjacency {
        return Err(Error::Usage(
            "the dynamic protocol needs the adjacency normalization".into(),
        ));
    }
    if fractions.is_empty() || fractions.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Usage(
            "observed fractions must be non-empty and increasing".into(),
        ));
    }
    if fractions.iter().any(|&f| !(f > 0.0 && f < 1.0)) {
        return Err(Error::Usage("observed fractions must lie in (0, 1)".into()));
    }
    let edges = shuffled_edges(g, cfg.seed);
    let cut = |f: f64| (f * edges.len() as f64).round() as usize;
    let observed_graph = |m: usize| -> Result<Graph> {
        let (h, _) = Graph::from_edges(g.n_nodes(), edges[..m].iter().copied())?;
        h.with_labels(g.labels().clone())
    };

    let mut observed = observed_graph(cut(fractions[0]))?;
    let weights = cfg.select_weights(&observed)?;
    let (mut state, _) = embed_parallel(
        &observed,
        cfg.dim,
        &weights,
        cfg.rng(),
        cfg.normalization,
        cfg.workers,
    )?;
    let mut rows = Vec::new();
    let mut prev = cut(fractions[0]);
    for (step, &f) in fractions.iter().enumerate() {
        let m = cut(f);
        if step > 0 {
            let delta = GraphDelta::insertions(edges[prev..m].iter().map(|&(u, v, _)| (u, v)))?;
            let report = update_in_place(&mut state, &observed, &delta, cfg.workers)?;
            log::info!(
                "step {f}: {} new edges, frontier sizes {:?}",
                m - prev,
                report.frontier_sizes
            );
            observed = apply_delta(&observed, &delta)?;
            prev = m;
        }
        let dynamic_emb = recombine(&state, &weights)?;
        let (_, rerun_emb) = embed_parallel(
            &observed,
            cfg.dim,
            &weights,
            cfg.rng(),
            cfg.normalization,
            cfg.workers,
        )?;
        let train = EdgeSet::from_graph(&observed);
        let truth = EdgeSet::from_pairs(
            edges[m..]
                .iter()
                .map(|(u, v, _)| (*u, *v))
                .collect::<Vec<_>>()
                .iter(),
        );
        let scorers = [
            Scorer::Embedding {
                name: "projection_dynamic",
                matrix: &dynamic_emb,
            },
            Scorer::Embedding {
                name: "projection_rerun",
                matrix: &rerun_emb,
            },
            Scorer::CommonNeighbors(&observed),
            Scorer::AdamicAdar(&observed),
            Scorer::Random(cfg.seed),
        ];
        rows.extend(evaluate_pairs(
            &PairTask {
                task: "dynamic",
                dataset: &cfg.dataset,
                auc_param: f.to_string(),
                n_nodes: g.n_nodes(),
                mode: cfg.mode,
                exclude: Some(&train),
                truth: &truth,
                ks: &[],
                seed: cfg.seed,
            },
            &scorers,
        )?);
    }
    Ok(rows)
}
