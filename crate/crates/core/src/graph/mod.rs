//! Undirected sparse graphs stored as a symmetric compressed-row adjacency.
//!
//! A [`Graph`] is immutable once built. Mutation happens by applying a
//! [`GraphDelta`], which produces a new graph.

mod delta;
mod generate;
mod io;
mod spmm;

pub use delta::{apply_delta, load_delta, parse_delta, EdgeChange, GraphDelta};
pub use generate::{generate_er, generate_sbm, sbm_block_of};
pub use io::{load_edge_list, parse_edge_list, write_edge_list, LoadStats};
pub use spmm::{spmm, spmm_into, Normalization};

use std::borrow::Cow;
use std::collections::HashMap;

use crate::error::{Error, Result};

/// Mapping between internal dense node ids and external labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NodeLabels {
    /// Label of node `i` is the decimal string of `i`.
    Identity,
    /// Explicit labels, indexed by internal id.
    Named(Vec<String>),
}

impl NodeLabels {
    pub fn label(&self, id: usize) -> Cow<'_, str> {
        match self {
            NodeLabels::Identity => Cow::Owned(id.to_string()),
            NodeLabels::Named(names) => Cow::Borrowed(&names[id]),
        }
    }

    /// Reverse dictionary, label to id. `None` for identity labels.
    pub fn index(&self) -> Option<HashMap<&str, usize>> {
        match self {
            NodeLabels::Identity => None,
            NodeLabels::Named(names) => Some(
                names
                    .iter()
                    .enumerate()
                    .map(|(i, s)| (s.as_str(), i))
                    .collect(),
            ),
        }
    }
}

/// Per-node weighted degree (row sums of the adjacency matrix).
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeVector(pub Vec<f64>);

impl DegreeVector {
    pub fn get(&self, node: usize) -> f64 {
        self.0[node]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Symmetric adjacency matrix in CSR form.
///
/// Every undirected edge `{u, v}` is stored twice, as `(u, v)` and `(v, u)`,
/// with the same weight. Column indices are strictly increasing within a
/// row, so there are no duplicates, and the diagonal is always empty.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    n_nodes: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
    labels: NodeLabels,
}

/// Counters for input cleaning performed while building a graph.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BuildStats {
    pub self_loops: usize,
    pub duplicates: usize,
}

impl Graph {
    /// Graph with `n_nodes` isolated nodes.
    pub fn empty(n_nodes: usize) -> Self {
        Graph {
            n_nodes,
            row_offsets: vec![0; n_nodes + 1],
            col_indices: Vec::new(),
            values: Vec::new(),
            labels: NodeLabels::Identity,
        }
    }

    /// Build from undirected weighted edges. Each edge is inserted in both
    /// directions; self-loops are dropped and repeated pairs keep the weight
    /// of their first occurrence.
    pub fn from_edges<I>(n_nodes: usize, edges: I) -> Result<(Graph, BuildStats)>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let mut stats = BuildStats::default();
        let mut kept: Vec<(usize, usize, f64)> = Vec::new();
        for (u, v, w) in edges {
            if u >= n_nodes || v >= n_nodes {
                return Err(Error::Data(format!(
                    "edge ({u}, {v}) references a node outside [0, {n_nodes})"
                )));
            }
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::Data(format!(
                    "edge ({u}, {v}) has non-positive or non-finite weight {w}"
                )));
            }
            if u == v {
                stats.self_loops += 1;
                continue;
            }
            kept.push((u, v, w));
        }

        let mut counts = vec![0usize; n_nodes + 1];
        for &(u, v, _) in &kept {
            counts[u + 1] += 1;
            counts[v + 1] += 1;
        }
        for i in 0..n_nodes {
            counts[i + 1] += counts[i];
        }
        let total = counts[n_nodes];
        let mut cursor = counts.clone();
        let mut cols = vec![0usize; total];
        let mut vals = vec![0f64; total];
        for &(u, v, w) in &kept {
            cols[cursor[u]] = v;
            vals[cursor[u]] = w;
            cursor[u] += 1;
            cols[cursor[v]] = u;
            vals[cursor[v]] = w;
            cursor[v] += 1;
        }
        drop(kept);

        // Stable sort per row keeps first-appearance order among duplicates,
        // then compact in place keeping the first of each run.
        let mut row_offsets = vec![0usize; n_nodes + 1];
        let mut write = 0usize;
        let mut removed = 0usize;
        let mut scratch: Vec<(usize, f64)> = Vec::new();
        for i in 0..n_nodes {
            let (lo, hi) = (counts[i], counts[i + 1]);
            scratch.clear();
            scratch.extend(
                cols[lo..hi]
                    .iter()
                    .copied()
                    .zip(vals[lo..hi].iter().copied()),
            );
            scratch.sort_by_key(|&(c, _)| c);
            let mut last = usize::MAX;
            for &(c, w) in &scratch {
                if c == last {
                    removed += 1;
                    continue;
                }
                last = c;
                cols[write] = c;
                vals[write] = w;
                write += 1;
            }
            row_offsets[i + 1] = write;
        }
        cols.truncate(write);
        vals.truncate(write);
        stats.duplicates = removed / 2;

        let graph = Graph {
            n_nodes,
            row_offsets,
            col_indices: cols,
            values: vals,
            labels: NodeLabels::Identity,
        };
        debug_assert!(graph.validate().is_ok());
        Ok((graph, stats))
    }

    /// Assemble from raw CSR arrays, verifying every structural invariant.
    pub fn from_csr(
        n_nodes: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Graph> {
        let g = Graph {
            n_nodes,
            row_offsets,
            col_indices,
            values,
            labels: NodeLabels::Identity,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn with_labels(mut self, labels: NodeLabels) -> Result<Graph> {
        if let NodeLabels::Named(names) = &labels {
            if names.len() != self.n_nodes {
                return Err(Error::Data(format!(
                    "{} labels for {} nodes",
                    names.len(),
                    self.n_nodes
                )));
            }
        }
        self.labels = labels;
        Ok(self)
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    /// Number of undirected edges.
    pub fn n_edges(&self) -> usize {
        self.col_indices.len() / 2
    }

    /// Number of stored (directed) entries, `2 * n_edges`.
    pub fn nnz(&self) -> usize {
        self.col_indices.len()
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn labels(&self) -> &NodeLabels {
        &self.labels
    }

    /// Sorted neighbor ids of `node`.
    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.col_indices[self.row_offsets[node]..self.row_offsets[node + 1]]
    }

    /// Edge weights aligned with [`Graph::neighbors`].
    pub fn neighbor_weights(&self, node: usize) -> &[f64] {
        &self.values[self.row_offsets[node]..self.row_offsets[node + 1]]
    }

    /// Unweighted degree (neighbor count).
    pub fn degree(&self, node: usize) -> usize {
        self.row_offsets[node + 1] - self.row_offsets[node]
    }

    pub fn weighted_degrees(&self) -> DegreeVector {
        DegreeVector(
            (0..self.n_nodes)
                .map(|i| self.neighbor_weights(i).iter().sum())
                .collect(),
        )
    }

    pub fn edge_weight(&self, u: usize, v: usize) -> Option<f64> {
        if u >= self.n_nodes || v >= self.n_nodes {
            return None;
        }
        let row = self.neighbors(u);
        row.binary_search(&v)
            .ok()
            .map(|k| self.values[self.row_offsets[u] + k])
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.edge_weight(u, v).is_some()
    }

    /// Undirected edges as `(u, v, w)` with `u < v`, in row-major order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n_nodes).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .zip(self.neighbor_weights(u))
                .filter(move |(&v, _)| v > u)
                .map(move |(&v, &w)| (u, v, w))
        })
    }

    /// Full structural scan: offsets, sortedness, no self-loops or
    /// duplicates, positive weights, and symmetry.
    pub fn validate(&self) -> Result<()> {
        let n = self.n_nodes;
        let bad = |msg: String| Err(Error::Data(msg));
        if self.row_offsets.len() != n + 1 {
            return bad(format!(
                "row_offsets has length {}, expected {}",
                self.row_offsets.len(),
                n + 1
            ));
        }
        if self.row_offsets[0] != 0 || self.row_offsets[n] != self.col_indices.len() {
            return bad("row_offsets endpoints do not match the entry arrays".into());
        }
        if self.values.len() != self.col_indices.len() {
            return bad("values and col_indices differ in length".into());
        }
        if self.col_indices.len() % 2 != 0 {
            return bad("odd number of stored entries in a symmetric matrix".into());
        }
        for i in 0..n {
            if self.row_offsets[i] > self.row_offsets[i + 1] {
                return bad(format!("row_offsets decreases at row {i}"));
            }
        }
        for i in 0..n {
            let row = self.neighbors(i);
            for (k, &j) in row.iter().enumerate() {
                if j >= n {
                    return bad(format!("row {i} references column {j} >= {n}"));
                }
                if j == i {
                    return bad(format!("self-loop at node {i}"));
                }
                if k > 0 && row[k - 1] >= j {
                    return bad(format!("row {i} is unsorted or has duplicates"));
                }
                let w = self.neighbor_weights(i)[k];
                if !(w.is_finite() && w > 0.0) {
                    return bad(format!("entry ({i}, {j}) has weight {w}"));
                }
                match self.edge_weight(j, i) {
                    Some(back) if back == w => {}
                    _ => return bad(format!("entry ({i}, {j}) has no symmetric partner")),
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn from_edges_cleans_input() {
        let (g, stats) =
            Graph::from_edges(4, [(0, 1, 1.0), (1, 0, 3.0), (2, 2, 1.0), (1, 2, 2.0)]).unwrap();
        assert_eq!(g.n_edges(), 2);
        assert_eq!(stats.duplicates, 1);
        assert_eq!(stats.self_loops, 1);
        assert_eq!(g.edge_weight(1, 0), Some(1.0));
        assert_eq!(g.edge_weight(2, 1), Some(2.0));
        assert_eq!(g.degree(1), 2);
        assert_eq!(g.degree(3), 0);
        assert_eq!(g.weighted_degrees().0, vec![1.0, 3.0, 2.0, 0.0]);
        g.validate().unwrap();
    }

    #[test]
    fn rejects_bad_edges() {
        assert!(Graph::from_edges(2, [(0, 2, 1.0)]).is_err());
        assert!(Graph::from_edges(2, [(0, 1, -1.0)]).is_err());
        assert!(Graph::from_edges(2, [(0, 1, f64::NAN)]).is_err());
    }

    #[test]
    fn validate_catches_asymmetry() {
        let err = Graph::from_csr(2, vec![0, 1, 1], vec![1], vec![1.0]);
        assert!(err.is_err());
        let err = Graph::from_csr(2, vec![0, 1, 2], vec![1, 0], vec![1.0, 2.0]);
        assert!(err.is_err());
        Graph::from_csr(2, vec![0, 1, 2], vec![1, 0], vec![1.0, 1.0]).unwrap();
    }

    #[test]
    fn edges_iterates_each_pair_once() {
        let (g, _) = Graph::from_edges(3, [(2, 0, 1.0), (0, 1, 1.0)]).unwrap();
        let e: Vec<_> = g.edges().collect();
        assert_eq!(e, vec![(0, 1, 1.0), (0, 2, 1.0)]);
    }
}
