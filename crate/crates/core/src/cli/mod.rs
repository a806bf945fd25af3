//! Command-line front end, checkpoint container and file formats.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.

mod bench;
mod checkpoint;
mod commands;
mod config;
mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use bench::{cmd_bench, doubling_sweep, estimated_bytes, worker_sweep, BenchRow, BENCH_HEADER};
pub use checkpoint::{read_matrix, write_matrix, Checkpoint, MAGIC, VERSION};
pub use commands::{cmd_embed, cmd_eval, cmd_gen, cmd_recombine, cmd_update};
pub use config::{default_weights, BenchSweep, EvalTask, GraphModel, PairModeKind, RunConfig};
pub use output::{
    read_embedding_binary, read_embedding_text, write_embedding_binary, write_embedding_text,
};

use crate::error::{Error, Result};

#[derive(Debug, Parser)]
#[command(
    name = "netproj",
    version,
    about = "Node embeddings by iterated random projection"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Embed an edge list; write a checkpoint and embedding files.
    Embed(Flags),
    /// Apply a delta file to a checkpoint.
    Update(Flags),
    /// Re-weight the parts stored in a checkpoint.
    Recombine(Flags),
    /// Reconstruction, link prediction or dynamic link prediction metrics as CSV.
    Eval(Flags),
    /// Time embedding on random graphs.
    Bench(Flags),
    /// Write a random graph as an edge list.
    Gen(Flags),
}

/// Values are validated by [`RunConfig::apply`], so every bad value
/// surfaces as a usage error with the same message as in a config file.
#[derive(Debug, Args)]
struct Flags {
    /// `key = value` file applied before the other flags.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    input: Option<String>,
    #[arg(long)]
    delta: Option<String>,
    #[arg(long)]
    checkpoint: Option<String>,
    #[arg(long)]
    checkpoint_out: Option<String>,
    #[arg(long)]
    output: Option<String>,
    #[arg(long)]
    binary_output: Option<String>,
    /// Text embedding to evaluate.
    #[arg(long)]
    embedding: Option<String>,
    #[arg(long)]
    dataset: Option<String>,
    /// Read a third column of edge weights.
    #[arg(long)]
    weighted: bool,
    #[arg(long)]
    dim: Option<String>,
    #[arg(long)]
    order: Option<String>,
    /// Comma-separated weights a0,...,aq.
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// adjacency or transition.
    #[arg(long)]
    normalization: Option<String>,
    #[arg(long)]
    workers: Option<String>,
    #[arg(long)]
    hidden_fraction: Option<String>,
    /// reconstruction, linkpred or dynamic.
    #[arg(long)]
    eval: Option<String>,
    /// all or sampled.
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    rate: Option<String>,
    /// Comma-separated cutoffs for Precision@K.
    #[arg(long)]
    k: Option<String>,
    /// Observed edge fractions for the dynamic protocol.
    #[arg(long)]
    steps: Option<String>,
    /// er or sbm.
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    nodes: Option<String>,
    #[arg(long)]
    edges: Option<String>,
    #[arg(long)]
    blocks: Option<String>,
    #[arg(long)]
    p_in: Option<String>,
    #[arg(long)]
    p_out: Option<String>,
    /// edges, nodes, workers or all.
    #[arg(long)]
    sweep: Option<String>,
    #[arg(long)]
    points: Option<String>,
    #[arg(long)]
    repeats: Option<String>,
}

impl Flags {
    fn to_config(&self) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &self.config {
            cfg.apply_file(path)?;
        }
        let pairs = [
            ("input", &self.input),
            ("delta", &self.delta),
            ("checkpoint", &self.checkpoint),
            ("checkpoint_out", &self.checkpoint_out),
            ("output", &self.output),
            ("binary_output", &self.binary_output),
            ("embedding", &self.embedding),
            ("dataset", &self.dataset),
            ("dim", &self.dim),
            ("order", &self.order),
            ("alpha", &self.alpha),
            ("seed", &self.seed),
            ("normalization", &self.normalization),
            ("workers", &self.workers),
            ("hidden_fraction", &self.hidden_fraction),
            ("eval", &self.eval),
            ("mode", &self.mode),
            ("rate", &self.rate),
            ("k", &self.k),
            ("steps", &self.steps),
            ("model", &self.model),
            ("nodes", &self.nodes),
            ("edges", &self.edges),
            ("blocks", &self.blocks),
            ("p_in", &self.p_in),
            ("p_out", &self.p_out),
            ("sweep", &self.sweep),
            ("points", &self.points),
            ("repeats", &self.repeats),
        ];
        for (key, value) in pairs {
            if let Some(v) = value {
                cfg.apply(key, v)?;
            }
        }
        if self.weighted {
            cfg.weighted = true;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn dispatch(command: Command) -> Result<()> {
    let (name, flags) = match &command {
        Command::Embed(f) => ("embed", f),
        Command::Update(f) => ("update", f),
        Command::Recombine(f) => ("recombine", f),
        Command::Eval(f) => ("eval", f),
        Command::Bench(f) => ("bench", f),
        Command::Gen(f) => ("gen", f),
    };
    let cfg = flags.to_config()?;
    eprint!("# netproj {name}, effective configuration\n{}", cfg.echo());
    match command {
        Command::Embed(_) => cmd_embed(&cfg),
        Command::Update(_) => cmd_update(&cfg).map(drop),
        Command::Recombine(_) => cmd_recombine(&cfg),
        Command::Eval(_) => cmd_eval(&cfg).map(drop),
        Command::Bench(_) => cmd_bench(&cfg).map(drop),
        Command::Gen(_) => cmd_gen(&cfg).map(drop),
    }
}

/// Parse `args` (including the program name), run the command and return
/// the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Convenience for callers that want the error instead of an exit code.
pub fn run_config(command: &str, cfg: &RunConfig) -> Result<()> {
    cfg.validate()?;
    match command {
        "embed" => cmd_embed(cfg),
        "update" => cmd_update(cfg).map(drop),
        "recombine" => cmd_recombine(cfg),
        "eval" => cmd_eval(cfg).map(drop),
        "bench" => cmd_bench(cfg).map(drop),
        "gen" => cmd_gen(cfg).map(drop),
        _ => Err(Error::Usage(format!("unknown command {command:?}"))),
    }
}
