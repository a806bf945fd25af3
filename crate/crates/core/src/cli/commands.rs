use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use super::checkpoint::Checkpoint;
use super::config::{EvalTask, GraphModel, RunConfig};
use super::output::{read_embedding_text, write_embedding_binary, write_embedding_text};
use crate::dynamic::{update_in_place, UpdateReport};
use crate::embed::{extended_grid, recombine, EmbeddingMatrix, RngSpec, Weights};
use crate::error::{Error, Result};
use crate::eval::protocol::{
    evaluate_reconstruction, run_dynamic_link_prediction, run_link_prediction,
    select_reconstruction_weights, write_csv, ExperimentConfig, MetricRow, Scorer,
};
use crate::graph::{
    apply_delta, generate_er, generate_sbm, load_delta, load_edge_list, write_edge_list, Graph,
    NodeLabels,
};
use crate::parallel::embed_parallel;

fn required<'a>(p: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path> {
    p.as_deref()
        .ok_or_else(|| Error::Usage(format!("--{flag} is required")))
}

fn load_graph(cfg: &RunConfig) -> Result<Graph> {
    let path = required(&cfg.input, "input")?;
    let (g, stats) = load_edge_list(path, cfg.weighted)?;
    log::info!(
        "loaded {}: {} nodes, {} edges ({} self-loops, {} duplicates dropped)",
        path.display(),
        g.n_nodes(),
        g.n_edges(),
        stats.self_loops,
        stats.duplicates
    );
    Ok(g)
}

fn write_outputs(cfg: &RunConfig, emb: &EmbeddingMatrix, labels: &NodeLabels) -> Result<()> {
    if let Some(path) = &cfg.output {
        write_embedding_text(emb, labels, path)?;
    }
    if let Some(path) = &cfg.binary_output {
        write_embedding_binary(emb, path)?;
    }
    Ok(())
}

/// Write to a sibling temp file, then rename over the target.
fn save_checkpoint_atomically(ckpt: &Checkpoint, path: &Path) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    ckpt.save(&tmp)?;
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

/// Embed the input graph; write the checkpoint and embedding files.
pub fn cmd_embed(cfg: &RunConfig) -> Result<()> {
    if cfg.checkpoint.is_none() && cfg.output.is_none() && cfg.binary_output.is_none() {
        return Err(Error::Usage(
            "nothing to write: give --checkpoint, --output or --binary-output".into(),
        ));
    }
    let g = load_graph(cfg)?;
    let weights = cfg.weights_or_default();
    let start = Instant::now();
    let (state, emb) = embed_parallel(
        &g,
        cfg.dim,
        &weights,
        RngSpec::new(cfg.seed),
        cfg.normalization,
        cfg.workers,
    )?;
    log::info!("embedded in {:.3} s", start.elapsed().as_secs_f64());
    write_outputs(cfg, &emb, g.labels())?;
    if let Some(path) = &cfg.checkpoint {
        let labels = g.labels().clone();
        Checkpoint {
            state,
            weights: Some(weights),
            labels,
            graph: Some(g),
        }
        .save(path)?;
    }
    Ok(())
}

/// Apply a delta file to a checkpoint.
pub fn cmd_update(cfg: &RunConfig) -> Result<UpdateReport> {
    let ckpt_path = required(&cfg.checkpoint, "checkpoint")?;
    let delta_path = required(&cfg.delta, "delta")?;
    let mut ckpt = Checkpoint::load(ckpt_path)?;
    let g_old = match (ckpt.graph.take(), &cfg.input) {
        (_, Some(_)) => load_graph(cfg)?,
        (Some(g), None) => g,
        (None, None) => {
            return Err(Error::Usage(
                "checkpoint has no stored graph; pass the pre-update graph with --input".into(),
            ))
        }
    };
    let delta = load_delta(delta_path, &g_old)?;
    let start = Instant::now();
    let report = update_in_place(&mut ckpt.state, &g_old, &delta, cfg.workers)?;
    let g_new = apply_delta(&g_old, &delta)?;
    eprintln!(
        "update: {} changed edges, {} new nodes, frontier sizes {:?}, {:.3} s",
        report.changed_edges,
        report.n_new_nodes,
        report.frontier_sizes,
        start.elapsed().as_secs_f64()
    );

    let weights = match (&cfg.alpha, &ckpt.weights) {
        (Some(w), _) | (None, Some(w)) => w.clone(),
        (None, None) => cfg.weights_or_default(),
    };
    let emb = recombine(&ckpt.state, &weights)?;
    write_outputs(cfg, &emb, g_new.labels())?;

    let out = cfg.checkpoint_out.as_deref().unwrap_or(ckpt_path);
    let labels = g_new.labels().clone();
    let next = Checkpoint {
        state: ckpt.state,
        weights: Some(weights),
        labels,
        graph: Some(g_new),
    };
    save_checkpoint_atomically(&next, out)?;
    Ok(report)
}

/// New embedding from stored parts and `--alpha`.
pub fn cmd_recombine(cfg: &RunConfig) -> Result<()> {
    let ckpt = Checkpoint::load(required(&cfg.checkpoint, "checkpoint")?)?;
    let weights = cfg
        .alpha
        .clone()
        .ok_or_else(|| Error::Usage("--alpha is required".into()))?;
    if cfg.output.is_none() && cfg.binary_output.is_none() {
        return Err(Error::Usage("give --output or --binary-output".into()));
    }
    let emb = recombine(&ckpt.state, &weights)?;
    write_outputs(cfg, &emb, &ckpt.labels)
}

fn experiment(cfg: &RunConfig) -> ExperimentConfig {
    ExperimentConfig {
        dataset: cfg.dataset_name(),
        dim: cfg.dim,
        order: cfg.order,
        weights: cfg.alpha.clone(),
        normalization: cfg.normalization,
        seed: cfg.seed,
        workers: cfg.workers,
        hidden_fraction: cfg.hidden_fraction,
        mode: cfg.pair_mode(),
        ks: cfg.k.clone(),
        ..Default::default()
    }
}

/// Embedding for reconstruction: from a text file, a checkpoint, or
/// computed here (weights searched over the extended grid when not given).
fn reconstruction_embedding(cfg: &RunConfig, g: &Graph) -> Result<EmbeddingMatrix> {
    if let Some(path) = &cfg.embedding {
        let (names, emb) = read_embedding_text(path)?;
        if names.len() != g.n_nodes()
            || names
                .iter()
                .enumerate()
                .any(|(i, s)| *s != g.labels().label(i))
        {
            return Err(Error::Data(format!(
                "{} does not list the nodes of the input graph in order",
                path.display()
            )));
        }
        return Ok(emb);
    }
    if let Some(path) = &cfg.checkpoint {
        let ckpt = Checkpoint::load(path)?;
        if ckpt.state.n_nodes() != g.n_nodes() {
            return Err(Error::Shape(format!(
                "checkpoint has {} nodes, graph has {}",
                ckpt.state.n_nodes(),
                g.n_nodes()
            )));
        }
        let weights = cfg
            .alpha
            .clone()
            .or(ckpt.weights)
            .unwrap_or_else(|| cfg.weights_or_default());
        return recombine(&ckpt.state, &weights);
    }
    let probe = Weights::one_hot(cfg.order, 1)?;
    let (state, _) = embed_parallel(
        g,
        cfg.dim,
        &probe,
        RngSpec::new(cfg.seed),
        cfg.normalization,
        cfg.workers,
    )?;
    let weights = match &cfg.alpha {
        Some(w) => w.clone(),
        None => {
            let rate = (200_000.0 / (g.n_nodes() as f64).powi(2)).clamp(1e-6, 1.0);
            let (w, score) = select_reconstruction_weights(
                &state,
                g,
                &extended_grid(cfg.order),
                rate,
                cfg.seed.wrapping_add(1),
            )?;
            log::info!("selected weights [{w}], sampled AUC {score}");
            w
        }
    };
    recombine(&state, &weights)
}

/// Run the configured evaluation and return its rows; also written as CSV
/// to `--output` or stdout.
pub fn cmd_eval(cfg: &RunConfig) -> Result<Vec<MetricRow>> {
    let g = load_graph(cfg)?;
    let rows = match cfg.eval {
        EvalTask::Reconstruction => {
            let emb = reconstruction_embedding(cfg, &g)?;
            let scorers = [
                Scorer::Embedding {
                    name: "projection",
                    matrix: &emb,
                },
                Scorer::CommonNeighbors(&g),
                Scorer::AdamicAdar(&g),
                Scorer::Random(cfg.seed),
            ];
            evaluate_reconstruction(
                &g,
                &cfg.dataset_name(),
                &scorers,
                cfg.pair_mode(),
                &cfg.k,
                cfg.seed,
            )?
        }
        EvalTask::LinkPred => run_link_prediction(&g, &experiment(cfg))?.0,
        EvalTask::Dynamic => run_dynamic_link_prediction(&g, &experiment(cfg), &cfg.steps)?,
    };
    emit_csv(cfg.output.as_deref(), |w| write_csv(w, &rows))?;
    Ok(rows)
}

pub(crate) fn emit_csv(
    path: Option<&Path>,
    write: impl FnOnce(&mut dyn Write) -> std::io::Result<()>,
) -> Result<()> {
    match path {
        Some(p) => {
            let file = File::create(p).map_err(|e| Error::io(p, e))?;
            let mut w = BufWriter::new(file);
            write(&mut w)
                .and_then(|_| w.flush())
                .map_err(|e| Error::io(p, e))
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            write(&mut lock).map_err(|e| Error::io("<stdout>", e))
        }
    }
}

/// Synthesize a graph and write it as an edge list.
pub fn cmd_gen(cfg: &RunConfig) -> Result<Graph> {
    let out = required(&cfg.output, "output")?;
    let g = match cfg.model {
        GraphModel::Er => generate_er(cfg.nodes, cfg.edges, cfg.seed)?,
        GraphModel::Sbm => generate_sbm(cfg.nodes, cfg.blocks, cfg.p_in, cfg.p_out, cfg.seed)?,
    };
    write_edge_list(&g, out)?;
    log::info!(
        "wrote {} nodes, {} edges to {}",
        g.n_nodes(),
        g.n_edges(),
        out.display()
    );
    Ok(g)
}
