//! Timing sweeps over random graphs.

use std::fmt;
use std::time::Instant;

use super::commands::emit_csv;
use super::config::{BenchSweep, RunConfig};
use crate::embed::RngSpec;
use crate::error::{Error, Result};
use crate::graph::generate_er;
use crate::parallel::embed_parallel;

pub const BENCH_HEADER: &str = "sweep,n_nodes,n_edges,dim,workers,seconds";

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub sweep: &'static str,
    pub n_nodes: usize,
    pub n_edges: usize,
    pub dim: usize,
    pub workers: usize,
    /// Fastest of the repeats.
    pub seconds: f64,
}

impl fmt::Display for BenchRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{},{},{},{},{},{:.6}",
            self.sweep, self.n_nodes, self.n_edges, self.dim, self.workers, self.seconds
        )
    }
}

/// `points` values doubling up to `top`: `top / 2^(points-1), ..., top`.
pub fn doubling_sweep(top: usize, points: usize) -> Vec<usize> {
    (0..points)
        .rev()
        .map(|k| top >> k)
        .filter(|&x| x > 0)
        .collect()
}

/// 1, 2, 4, ... up to `max`, plus `max` itself.
pub fn worker_sweep(max: usize) -> Vec<usize> {
    let mut out: Vec<usize> = std::iter::successors(Some(1usize), |&w| Some(w * 2))
        .take_while(|&w| w <= max)
        .collect();
    if out.last() != Some(&max) {
        out.push(max);
    }
    out
}

fn available_memory() -> Option<u64> {
    let info = std::fs::read_to_string("/proc/meminfo").ok()?;
    let line = info.lines().find(|l| l.starts_with("MemAvailable:"))?;
    let kb: u64 = line.split_whitespace().nth(1)?.parse().ok()?;
    Some(kb * 1024)
}

/// Rough peak bytes for generating and embedding one ER graph.
pub fn estimated_bytes(n: usize, m: usize, d: usize, order: usize) -> u64 {
    let (n, m, d, q) = (n as u64, m as u64, d as u64, order as u64);
    let graph = 8 * (n + 1) + 2 * m * 16;
    let generation = m * 48;
    let dense = n * d * 8 * (q + 3);
    graph + generation + dense
}

fn check_memory(n: usize, m: usize, d: usize, order: usize) -> Result<()> {
    let need = estimated_bytes(n, m, d, order);
    if let Some(avail) = available_memory() {
        if need > avail {
            return Err(Error::Data(format!(
                "N = {n}, M = {m}, d = {d} needs about {:.1} GiB but only {:.1} GiB is available; lower --nodes, --edges or --dim",
                need as f64 / (1u64 << 30) as f64,
                avail as f64 / (1u64 << 30) as f64
            )));
        }
    }
    Ok(())
}

fn time_point(
    cfg: &RunConfig,
    sweep: &'static str,
    n: usize,
    m: usize,
    workers: usize,
) -> Result<BenchRow> {
    check_memory(n, m, cfg.dim, cfg.order)?;
    let g = generate_er(n, m, cfg.seed)?;
    let weights = cfg.weights_or_default();
    let mut best = f64::INFINITY;
    for _ in 0..cfg.repeats.max(1) {
        let start = Instant::now();
        let out = embed_parallel(
            &g,
            cfg.dim,
            &weights,
            RngSpec::new(cfg.seed),
            cfg.normalization,
            workers,
        )?;
        best = best.min(start.elapsed().as_secs_f64());
        drop(out);
    }
    let row = BenchRow {
        sweep,
        n_nodes: n,
        n_edges: m,
        dim: cfg.dim,
        workers,
        seconds: best,
    };
    log::info!("{row}");
    Ok(row)
}

/// Time embedding on ER graphs: edge count doubling at fixed `nodes`,
/// node count doubling at fixed `edges`, and worker count doubling at
/// (`nodes`, `edges`), as selected by `sweep`.
pub fn cmd_bench(cfg: &RunConfig) -> Result<Vec<BenchRow>> {
    let mut rows = Vec::new();
    let all = cfg.sweep == BenchSweep::All;
    if all || cfg.sweep == BenchSweep::Edges {
        for m in doubling_sweep(cfg.edges, cfg.points) {
            rows.push(time_point(cfg, "edges", cfg.nodes, m, cfg.workers)?);
        }
    }
    if all || cfg.sweep == BenchSweep::Nodes {
        for n in doubling_sweep(cfg.nodes, cfg.points) {
            rows.push(time_point(cfg, "nodes", n, cfg.edges, cfg.workers)?);
        }
    }
    if all || cfg.sweep == BenchSweep::Workers {
        for w in worker_sweep(cfg.workers) {
            rows.push(time_point(cfg, "workers", cfg.nodes, cfg.edges, w)?);
        }
    }
    emit_csv(cfg.output.as_deref(), |w| {
        writeln!(w, "{BENCH_HEADER}")?;
        for row in &rows {
            writeln!(w, "{row}")?;
        }
        Ok(())
    })?;
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweeps() {
        assert_eq!(
            doubling_sweep(4_000_000, 3),
            vec![1_000_000, 2_000_000, 4_000_000]
        );
        assert_eq!(doubling_sweep(10, 1), vec![10]);
        assert_eq!(worker_sweep(1), vec![1]);
        assert_eq!(worker_sweep(8), vec![1, 2, 4, 8]);
        assert_eq!(worker_sweep(6), vec![1, 2, 4, 6]);
    }

    #[test]
    fn small_bench_runs() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = RunConfig::default();
        for (k, v) in [
            ("nodes", "400"),
            ("edges", "1600"),
            ("dim", "8"),
            ("workers", "2"),
            ("points", "2"),
        ] {
            cfg.apply(k, v).unwrap();
        }
        cfg.output = Some(dir.path().join("bench.csv"));
        let rows = cmd_bench(&cfg).unwrap();
        assert_eq!(rows.len(), 2 + 2 + 2);
        assert_eq!((rows[0].n_nodes, rows[0].n_edges), (400, 800));
        assert_eq!((rows[2].n_nodes, rows[2].n_edges), (200, 1600));
        assert_eq!(rows[5].workers, 2);
        let text = std::fs::read_to_string(dir.path().join("bench.csv")).unwrap();
        assert_eq!(text.lines().count(), 7);
        assert!(text.starts_with(BENCH_HEADER));
    }

    #[test]
    fn oversized_point_is_reported() {
        let mut cfg = RunConfig::default();
        cfg.apply_str("nodes = 4000000000\nedges = 10\ndim = 128\nsweep = nodes\npoints = 1")
            .unwrap();
        if available_memory().is_some() {
            assert!(matches!(cmd_bench(&cfg), Err(Error::Data(_))));
        }
    }
}
