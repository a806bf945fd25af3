//! Run configuration: defaults, then a `key = value` file, then flags.

use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::embed::{Weights, DEFAULT_DIM, DEFAULT_ORDER};
use crate::error::{Error, Result};
use crate::eval::PairMode;
use crate::graph::Normalization;
use crate::parallel::default_workers;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EvalTask {
    #[default]
    Reconstruction,
    LinkPred,
    /// Edges revealed in steps, embedding carried forward by updates.
    Dynamic,
}

impl FromStr for EvalTask {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "reconstruction" => Ok(EvalTask::Reconstruction),
            "linkpred" => Ok(EvalTask::LinkPred),
            "dynamic" => Ok(EvalTask::Dynamic),
            _ => Err(Error::Usage(format!(
                "unknown evaluation {s:?} (expected reconstruction, linkpred or dynamic)"
            ))),
        }
    }
}

impl fmt::Display for EvalTask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EvalTask::Reconstruction => "reconstruction",
            EvalTask::LinkPred => "linkpred",
            EvalTask::Dynamic => "dynamic",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GraphModel {
    #[default]
    Er,
    Sbm,
}

impl FromStr for GraphModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "er" => Ok(GraphModel::Er),
            "sbm" => Ok(GraphModel::Sbm),
            _ => Err(Error::Usage(format!(
                "unknown graph model {s:?} (expected er or sbm)"
            ))),
        }
    }
}

impl fmt::Display for GraphModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GraphModel::Er => "er",
            GraphModel::Sbm => "sbm",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BenchSweep {
    Edges,
    Nodes,
    Workers,
    #[default]
    All,
}

impl FromStr for BenchSweep {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "edges" => Ok(BenchSweep::Edges),
            "nodes" => Ok(BenchSweep::Nodes),
            "workers" => Ok(BenchSweep::Workers),
            "all" => Ok(BenchSweep::All),
            _ => Err(Error::Usage(format!(
                "unknown sweep {s:?} (expected edges, nodes, workers or all)"
            ))),
        }
    }
}

impl fmt::Display for BenchSweep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BenchSweep::Edges => "edges",
            BenchSweep::Nodes => "nodes",
            BenchSweep::Workers => "workers",
            BenchSweep::All => "all",
        })
    }
}

/// Every knob of every command. Unused fields are ignored by commands
/// that do not need them.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub input: Option<PathBuf>,
    pub delta: Option<PathBuf>,
    pub checkpoint: Option<PathBuf>,
    /// Where `update` writes the new checkpoint; defaults to `checkpoint`.
    pub checkpoint_out: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub binary_output: Option<PathBuf>,
    /// Text embedding file to evaluate instead of computing one.
    pub embedding: Option<PathBuf>,
    pub dataset: Option<String>,
    pub weighted: bool,

    pub dim: usize,
    pub order: usize,
    pub alpha: Option<Weights>,
    pub seed: u64,
    pub normalization: Normalization,
    pub workers: usize,

    pub eval: EvalTask,
    pub hidden_fraction: f64,
    pub mode: PairModeKind,
    pub rate: f64,
    pub k: Vec<usize>,
    pub steps: Vec<f64>,

    pub model: GraphModel,
    pub nodes: usize,
    pub edges: usize,
    pub blocks: usize,
    pub p_in: f64,
    pub p_out: f64,

    pub sweep: BenchSweep,
    pub points: usize,
    pub repeats: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PairModeKind {
    #[default]
    All,
    Sampled,
}

impl FromStr for PairModeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all" => Ok(PairModeKind::All),
            "sampled" => Ok(PairModeKind::Sampled),
            _ => Err(Error::Usage(format!(
                "unknown pair mode {s:?} (expected all or sampled)"
            ))),
        }
    }
}

impl fmt::Display for PairModeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PairModeKind::All => "all",
            PairModeKind::Sampled => "sampled",
        })
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            input: None,
            delta: None,
            checkpoint: None,
            checkpoint_out: None,
            output: None,
            binary_output: None,
            embedding: None,
            dataset: None,
            weighted: false,
            dim: DEFAULT_DIM,
            order: DEFAULT_ORDER,
            alpha: None,
            seed: 0,
            normalization: Normalization::Adjacency,
            workers: default_workers(),
            eval: EvalTask::Reconstruction,
            hidden_fraction: 0.3,
            mode: PairModeKind::All,
            rate: 0.01,
            k: Vec::new(),
            steps: vec![0.3, 0.4, 0.5, 0.6, 0.7],
            model: GraphModel::Er,
            nodes: 1_000_000,
            edges: 10_000_000,
            blocks: 4,
            p_in: 0.05,
            p_out: 0.005,
            sweep: BenchSweep::All,
            points: 3,
            repeats: 1,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Usage(format!("bad value {value:?} for {key}")))
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| parse(key, t.trim()))
        .collect()
}

fn join<T: fmt::Display>(xs: &[T]) -> String {
    xs.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

fn opt_path(value: &str) -> Option<PathBuf> {
    (!value.is_empty()).then(|| PathBuf::from(value))
}

impl RunConfig {
    /// Set one option. Keys are the long flag names; `-` and `_` are
    /// interchangeable. An empty value clears an optional setting.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim().replace('-', "_");
        let value = value.trim();
        match key.as_str() {
            "input" => self.input = opt_path(value),
            "delta" => self.delta = opt_path(value),
            "checkpoint" => self.checkpoint = opt_path(value),
            "checkpoint_out" => self.checkpoint_out = opt_path(value),
            "output" => self.output = opt_path(value),
            "binary_output" => self.binary_output = opt_path(value),
            "embedding" => self.embedding = opt_path(value),
            "dataset" => self.dataset = (!value.is_empty()).then(|| value.to_string()),
            "weighted" => self.weighted = parse(&key, value)?,
            "dim" => self.dim = parse(&key, value)?,
            "order" => self.order = parse(&key, value)?,
            "alpha" => {
                self.alpha = if value.is_empty() {
                    None
                } else {
                    Some(value.parse()?)
                }
            }
            "seed" => self.seed = parse(&key, value)?,
            "normalization" => self.normalization = value.parse()?,
            "workers" => self.workers = parse(&key, value)?,
            "eval" => self.eval = value.parse()?,
            "hidden_fraction" => self.hidden_fraction = parse(&key, value)?,
            "mode" => self.mode = value.parse()?,
            "rate" => self.rate = parse(&key, value)?,
            "k" => self.k = parse_list(&key, value)?,
            "steps" => self.steps = parse_list(&key, value)?,
            "model" => self.model = value.parse()?,
            "nodes" => self.nodes = parse(&key, value)?,
            "edges" => self.edges = parse(&key, value)?,
            "blocks" => self.blocks = parse(&key, value)?,
            "p_in" => self.p_in = parse(&key, value)?,
            "p_out" => self.p_out = parse(&key, value)?,
            "sweep" => self.sweep = value.parse()?,
            "points" => self.points = parse(&key, value)?,
            "repeats" => self.repeats = parse(&key, value)?,
            _ => return Err(Error::Usage(format!("unknown option {key:?}"))),
        }
        Ok(())
    }

    /// Apply every `key = value` line of a config file. `#` starts a comment.
    pub fn apply_file(&mut self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        self.apply_str(&text).map_err(|e| match e {
            Error::Usage(msg) => Error::Usage(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn apply_str(&mut self, text: &str) -> Result<()> {
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Usage(format!("line {}: expected key = value", i + 1)))?;
            self.apply(key, value)?;
        }
        Ok(())
    }

    /// Range and consistency checks shared by all commands.
    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::Usage("dim must be positive".into()));
        }
        if self.order == 0 {
            return Err(Error::Usage("order must be positive".into()));
        }
        if let Some(w) = &self.alpha {
            if w.order() != self.order {
                return Err(Error::Usage(format!(
                    "alpha has {} entries but order {} needs {}",
                    w.alpha().len(),
                    self.order,
                    self.order + 1
                )));
            }
        }
        if self.workers == 0 {
            return Err(Error::Usage("workers must be positive".into()));
        }
        if !(self.rate > 0.0 && self.rate <= 1.0) {
            return Err(Error::Usage(format!(
                "rate must lie in (0, 1], got {}",
                self.rate
            )));
        }
        if self.k.contains(&0) {
            return Err(Error::Usage("K values must be positive".into()));
        }
        Ok(())
    }

    /// Weights to use when none are chosen by search: the configured ones,
    /// else `a0 = 0` and `a_i = 10^-(i-1)`.
    pub fn weights_or_default(&self) -> Weights {
        self.alpha
            .clone()
            .unwrap_or_else(|| default_weights(self.order))
    }

    pub fn pair_mode(&self) -> PairMode {
        match self.mode {
            PairModeKind::All => PairMode::All,
            PairModeKind::Sampled => PairMode::Sampled {
                rate: self.rate,
                seed: self.seed,
            },
        }
    }

    pub fn dataset_name(&self) -> String {
        self.dataset.clone().unwrap_or_else(|| {
            self.input
                .as_deref()
                .and_then(Path::file_stem)
                .map_or_else(|| "graph".into(), |s| s.to_string_lossy().into_owned())
        })
    }

    /// The configuration in the file format accepted by [`Self::apply_str`].
    pub fn echo(&self) -> String {
        let path = |p: &Option<PathBuf>| {
            p.as_ref()
                .map_or(String::new(), |p| p.display().to_string())
        };
        let entries: Vec<(&str, String)> = vec![
            ("input", path(&self.input)),
            ("delta", path(&self.delta)),
            ("checkpoint", path(&self.checkpoint)),
            ("checkpoint_out", path(&self.checkpoint_out)),
            ("output", path(&self.output)),
            ("binary_output", path(&self.binary_output)),
            ("embedding", path(&self.embedding)),
            ("dataset", self.dataset.clone().unwrap_or_default()),
            ("weighted", self.weighted.to_string()),
            ("dim", self.dim.to_string()),
            ("order", self.order.to_string()),
            (
                "alpha",
                self.alpha
                    .as_ref()
                    .map_or(String::new(), Weights::to_string),
            ),
            ("seed", self.seed.to_string()),
            ("normalization", self.normalization.to_string()),
            ("workers", self.workers.to_string()),
            ("eval", self.eval.to_string()),
            ("hidden_fraction", self.hidden_fraction.to_string()),
            ("mode", self.mode.to_string()),
            ("rate", self.rate.to_string()),
            ("k", join(&self.k)),
            ("steps", join(&self.steps)),
            ("model", self.model.to_string()),
            ("nodes", self.nodes.to_string()),
            ("edges", self.edges.to_string()),
            ("blocks", self.blocks.to_string()),
            ("p_in", self.p_in.to_string()),
            ("p_out", self.p_out.to_string()),
            ("sweep", self.sweep.to_string()),
            ("points", self.points.to_string()),
            ("repeats", self.repeats.to_string()),
        ];
        let mut out = String::new();
        for (k, v) in entries {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }
}

/// `a0 = 0`, `a_i = 10^-(i-1)` for `i >= 1`.
pub fn default_weights(order: usize) -> Weights {
    let mut alpha = vec![0.0];
    alpha.extend((0..order).map(|i| 10f64.powi(-(i as i32))));
    Weights::new(alpha).expect("order >= 1")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let c = RunConfig::default();
        assert_eq!((c.dim, c.order), (128, 3));
        assert_eq!(c.weights_or_default().alpha(), &[0.0, 1.0, 0.1, 0.01]);
        assert!(c.workers >= 1);
        c.validate().unwrap();
    }

    #[test]
    fn file_then_flags() {
        let mut c = RunConfig::default();
        c.apply_str("# run\ndim = 16\nalpha = 0,1,2 # two hops\norder=2\nk = 10,100\n")
            .unwrap();
        c.apply("dim", "32").unwrap();
        c.apply("hidden-fraction", "0.2").unwrap();
        assert_eq!(c.dim, 32);
        assert_eq!(c.alpha.as_ref().unwrap().alpha(), &[0.0, 1.0, 2.0]);
        assert_eq!(c.k, vec![10, 100]);
        assert_eq!(c.hidden_fraction, 0.2);
        c.validate().unwrap();
    }

    #[test]
    fn echo_round_trips() {
        let mut c = RunConfig::default();
        c.apply_str("input = g.txt\nalpha = 0.5,1,0.1,0.01\nnormalization = transition\nmode = sampled\nrate = 0.25\nk = 1,5\nseed = 42\neval = linkpred").unwrap();
        let mut back = RunConfig::default();
        back.apply_str(&c.echo()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn bad_values_are_usage_errors() {
        let mut c = RunConfig::default();
        for (k, v) in [
            ("dim", "x"),
            ("normalization", "laplacian"),
            ("mode", "some"),
            ("eval", "nodeclass"),
            ("frobnicate", "1"),
            ("alpha", "1"),
        ] {
            assert!(matches!(c.apply(k, v), Err(Error::Usage(_))), "{k}");
        }
        assert!(matches!(c.apply_str("dim 3"), Err(Error::Usage(_))));
        c.apply("alpha", "1,2").unwrap();
        assert!(matches!(c.validate(), Err(Error::Usage(_))));
    }
}
