use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::{BuildStats, Graph, NodeLabels};
use crate::error::{Error, Result};

/// Summary of an edge-list load.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LoadStats {
    pub data_lines: usize,
    pub self_loops: usize,
    pub duplicates: usize,
}

/// Read a whitespace-separated edge list (`u v` or `u v w` per line, `#`
/// starts a comment line). Tokens are node labels; internal ids are
/// assigned in order of first appearance. When `weighted` is false any
/// third column is ignored and every edge has weight 1.
pub fn load_edge_list(path: impl AsRef<Path>, weighted: bool) -> Result<(Graph, LoadStats)> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_edge_list(BufReader::new(file), path, weighted)
}

pub fn parse_edge_list<R: BufRead>(
    reader: R,
    source: &Path,
    weighted: bool,
) -> Result<(Graph, LoadStats)> {
    let mut ids: HashMap<String, usize> = HashMap::new();
    let mut names: Vec<String> = Vec::new();
    let mut edges = Vec::new();
    let mut data_lines = 0;

    let mut intern = |tok: &str| -> usize {
        if let Some(&id) = ids.get(tok) {
            return id;
        }
        let id = names.len();
        names.push(tok.to_owned());
        ids.insert(tok.to_owned(), id);
        id
    };

    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::io(source, e))?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let parse_err = |msg: String| Error::Parse {
            path: source.to_path_buf(),
            line: lineno,
            msg,
        };
        let toks: Vec<&str> = trimmed.split_whitespace().collect();
        if toks.len() < 2 || toks.len() > 3 {
            return Err(parse_err(format!(
                "expected `u v` or `u v w`, found {} fields",
                toks.len()
            )));
        }
        let w = match (weighted, toks.get(2)) {
            (true, Some(tok)) => {
                let w: f64 = tok
                    .parse()
                    .map_err(|_| parse_err(format!("bad weight `{tok}`")))?;
                if w < 0.0 {
                    return Err(parse_err(format!("negative weight {w}")));
                }
                if !(w.is_finite() && w > 0.0) {
                    return Err(parse_err(format!("weight must be positive, got {w}")));
                }
                w
            }
            _ => 1.0,
        };
        let u = intern(toks[0]);
        let v = intern(toks[1]);
        edges.push((u, v, w));
        data_lines += 1;
    }

    let n = names.len();
    let (
        graph,
        BuildStats {
            self_loops,
            duplicates,
        },
    ) = Graph::from_edges(n, edges)?;
    if duplicates > 0 {
        log::warn!(
            "{}: dropped {duplicates} duplicate edge(s), keeping first weights",
            source.display()
        );
    }
    if self_loops > 0 {
        log::warn!("{}: dropped {self_loops} self-loop(s)", source.display());
    }
    let identity = names.iter().enumerate().all(|(i, s)| *s == i.to_string());
    let labels = if identity {
        NodeLabels::Identity
    } else {
        NodeLabels::Named(names)
    };
    Ok((
        graph.with_labels(labels)?,
        LoadStats {
            data_lines,
            self_loops,
            duplicates,
        },
    ))
}

/// Write `label label weight` lines, one per undirected edge.
pub fn write_edge_list(g: &Graph, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    let labels = g.labels();
    writeln!(out, "# nodes {} edges {}", g.n_nodes(), g.n_edges())
        .map_err(|e| Error::io(path, e))?;
    for (u, v, w) in g.edges() {
        writeln!(out, "{} {} {}", labels.label(u), labels.label(v), w)
            .map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}
