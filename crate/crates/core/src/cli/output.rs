//! Embedding files.
//!
//! Text: a header line `N d`, then one line per node, `label v1 ... vd`,
//! with every value printed to 17 significant digits so it parses back to
//! the same `f64`. Binary: `rows`, `cols` as `u64` LE, then the entries
//! row by row as `f64` LE, the same layout as a checkpoint part.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use ndarray::Array2;

use super::checkpoint::{read_matrix, write_matrix};
use crate::embed::EmbeddingMatrix;
use crate::error::{Error, Result};
use crate::graph::NodeLabels;

pub fn write_embedding_text(
    emb: &EmbeddingMatrix,
    labels: &NodeLabels,
    path: impl AsRef<Path>,
) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    write_text(&mut w, emb, labels).map_err(|e| Error::io(path, e))
}

fn write_text<W: Write>(
    w: &mut W,
    emb: &EmbeddingMatrix,
    labels: &NodeLabels,
) -> std::io::Result<()> {
    writeln!(w, "{} {}", emb.n_nodes(), emb.dim())?;
    for node in 0..emb.n_nodes() {
        w.write_all(labels.label(node).as_bytes())?;
        for x in emb.row(node) {
            write!(w, " {x:.16e}")?;
        }
        writeln!(w)?;
    }
    w.flush()
}

/// Labels and matrix from a text embedding file.
pub fn read_embedding_text(path: impl AsRef<Path>) -> Result<(Vec<String>, EmbeddingMatrix)> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let parse_err = |line: usize, msg: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        msg,
    };
    let mut lines = BufReader::new(file).lines();
    let header = lines
        .next()
        .ok_or_else(|| parse_err(1, "empty file".into()))?
        .map_err(|e| Error::io(path, e))?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(|t| {
            t.parse()
                .map_err(|_| parse_err(1, format!("bad header {header:?}")))
        })
        .collect::<Result<_>>()?;
    let [n, d] = dims[..] else {
        return Err(parse_err(
            1,
            format!("header must be `N d`, got {header:?}"),
        ));
    };
    let mut labels = Vec::with_capacity(n);
    let mut data = Vec::with_capacity(n * d);
    for (i, line) in lines.enumerate() {
        let line_no = i + 2;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let mut tokens = line.split_whitespace();
        labels.push(tokens.next().unwrap().to_string());
        let before = data.len();
        for t in tokens {
            data.push(
                t.parse::<f64>()
                    .map_err(|_| parse_err(line_no, format!("bad value {t:?}")))?,
            );
        }
        if data.len() - before != d {
            return Err(parse_err(
                line_no,
                format!("expected {d} values, got {}", data.len() - before),
            ));
        }
    }
    if labels.len() != n {
        return Err(Error::Data(format!(
            "{}: header promises {n} rows, found {}",
            path.display(),
            labels.len()
        )));
    }
    let matrix = Array2::from_shape_vec((n, d), data).expect("row lengths checked");
    Ok((labels, EmbeddingMatrix::from_matrix(matrix)))
}

pub fn write_embedding_binary(emb: &EmbeddingMatrix, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    write_matrix(&mut w, &emb.matrix)
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

pub fn read_embedding_binary(path: impl AsRef<Path>) -> Result<EmbeddingMatrix> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(EmbeddingMatrix::from_matrix(read_matrix(
        &mut BufReader::new(file),
    )?))
}
