use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use super::{Graph, NodeLabels};
use crate::error::{Error, Result};

/// Weight change on one undirected pair. Positive inserts or strengthens an
/// edge, negative weakens or removes it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeChange {
    pub u: usize,
    pub v: usize,
    pub delta_weight: f64,
}

/// A batch of graph changes: `n_new_nodes` empty nodes appended at the end
/// of the id space, followed by edge weight changes.
///
/// Changes are canonical: `u < v`, one entry per pair, sorted, no zeros.
/// Removing a node is expressed as removing all of its edges.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GraphDelta {
    n_new_nodes: usize,
    changes: Vec<EdgeChange>,
    new_labels: Option<Vec<String>>,
}

impl GraphDelta {
    pub fn new(n_new_nodes: usize, changes: impl IntoIterator<Item = EdgeChange>) -> Result<Self> {
        let mut acc: Vec<EdgeChange> = Vec::new();
        for c in changes {
            if c.u == c.v {
                return Err(Error::Data(format!("self-loop change on node {}", c.u)));
            }
            if !c.delta_weight.is_finite() {
                return Err(Error::Data(format!(
                    "non-finite weight change on ({}, {})",
                    c.u, c.v
                )));
            }
            let (u, v) = if c.u < c.v { (c.u, c.v) } else { (c.v, c.u) };
            acc.push(EdgeChange {
                u,
                v,
                delta_weight: c.delta_weight,
            });
        }
        acc.sort_by_key(|c| (c.u, c.v));
        let mut changes: Vec<EdgeChange> = Vec::with_capacity(acc.len());
        for c in acc {
            match changes.last_mut() {
                Some(last) if last.u == c.u && last.v == c.v => last.delta_weight += c.delta_weight,
                _ => changes.push(c),
            }
        }
        changes.retain(|c| c.delta_weight != 0.0);
        Ok(GraphDelta {
            n_new_nodes,
            changes,
            new_labels: None,
        })
    }

    pub fn insertions(edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        Self::new(
            0,
            edges.into_iter().map(|(u, v)| EdgeChange {
                u,
                v,
                delta_weight: 1.0,
            }),
        )
    }

    /// Removal of each listed edge at its current weight in `g`.
    pub fn deletions(g: &Graph, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut changes = Vec::new();
        for (u, v) in edges {
            let w = g
                .edge_weight(u, v)
                .ok_or_else(|| Error::Data(format!("cannot delete missing edge ({u}, {v})")))?;
            changes.push(EdgeChange {
                u,
                v,
                delta_weight: -w,
            });
        }
        Self::new(0, changes)
    }

    pub fn with_new_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.n_new_nodes {
            return Err(Error::Data(format!(
                "{} labels for {} new nodes",
                labels.len(),
                self.n_new_nodes
            )));
        }
        self.new_labels = Some(labels);
        Ok(self)
    }

    pub fn n_new_nodes(&self) -> usize {
        self.n_new_nodes
    }

    pub fn changes(&self) -> &[EdgeChange] {
        &self.changes
    }

    pub fn is_empty(&self) -> bool {
        self.n_new_nodes == 0 && self.changes.is_empty()
    }

    /// Distinct endpoints of changed edges, ascending.
    pub fn touched_nodes(&self) -> Vec<usize> {
        let mut nodes: Vec<usize> = self.changes.iter().flat_map(|c| [c.u, c.v]).collect();
        nodes.sort_unstable();
        nodes.dedup();
        nodes
    }

    /// Edge-only inverse: every weight change negated.
    pub fn inverse(&self) -> Result<Self> {
        if self.n_new_nodes != 0 {
            return Err(Error::Data(
                "a delta that appends nodes has no edge-only inverse".into(),
            ));
        }
        Self::new(
            0,
            self.changes.iter().map(|c| EdgeChange {
                delta_weight: -c.delta_weight,
                ..*c
            }),
        )
    }

    /// Single delta equivalent to applying `self` then `next`.
    pub fn then(&self, next: &GraphDelta) -> Result<Self> {
        let merged = Self::new(
            self.n_new_nodes + next.n_new_nodes,
            self.changes.iter().chain(next.changes.iter()).copied(),
        )?;
        let labels = match (&self.new_labels, &next.new_labels) {
            (None, None) => None,
            (a, b) => {
                let mut all = a
                    .clone()
                    .unwrap_or_else(|| vec![String::new(); self.n_new_nodes]);
                all.extend(
                    b.clone()
                        .unwrap_or_else(|| vec![String::new(); next.n_new_nodes]),
                );
                Some(all)
            }
        };
        Ok(GraphDelta {
            new_labels: labels,
            ..merged
        })
    }

    /// Check ids and resulting weights against the graph the delta applies
    /// to, without building the new graph. Returns the new weight of every
    /// changed pair (0 for removed edges), aligned with [`GraphDelta::changes`].
    pub fn resolve_against(&self, g: &Graph) -> Result<Vec<f64>> {
        let n_total = g.n_nodes() + self.n_new_nodes;
        let mut out = Vec::with_capacity(self.changes.len());
        for c in &self.changes {
            if c.v >= n_total {
                return Err(Error::Data(format!(
                    "change ({}, {}) references a node outside [0, {n_total})",
                    c.u, c.v
                )));
            }
            let old = g.edge_weight(c.u, c.v);
            if old.is_none() && c.delta_weight < 0.0 {
                return Err(Error::Data(format!(
                    "deletion of non-existent edge ({}, {})",
                    c.u, c.v
                )));
            }
            let old = old.unwrap_or(0.0);
            let mut new = old + c.delta_weight;
            if new.abs() <= 1e-12 * old.abs().max(c.delta_weight.abs()) {
                new = 0.0;
            }
            if new < 0.0 {
                return Err(Error::Data(format!(
                    "change on ({}, {}) drives weight {old} to {new}",
                    c.u, c.v
                )));
            }
            out.push(new);
        }
        Ok(out)
    }
}

/// Apply `delta` to `g`, producing a new graph with `delta.n_new_nodes()`
/// isolated nodes appended and every edge change applied symmetrically.
pub fn apply_delta(g: &Graph, delta: &GraphDelta) -> Result<Graph> {
    let resolved = delta.resolve_against(g)?;
    let n_old = g.n_nodes();
    let n = n_old + delta.n_new_nodes;

    // Per-row replacement entries: (col, new weight), both directions.
    let mut per_row: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (c, &w) in delta.changes.iter().zip(&resolved) {
        per_row[c.u].push((c.v, w));
        per_row[c.v].push((c.u, w));
    }

    let mut row_offsets = Vec::with_capacity(n + 1);
    row_offsets.push(0);
    let mut cols = Vec::with_capacity(g.nnz() + 2 * delta.changes.len());
    let mut vals = Vec::with_capacity(cols.capacity());
    for (i, patch) in per_row.iter_mut().enumerate() {
        patch.sort_by_key(|&(c, _)| c);
        let (old_cols, old_vals): (&[usize], &[f64]) = if i < n_old {
            (g.neighbors(i), g.neighbor_weights(i))
        } else {
            (&[], &[])
        };
        let (mut a, mut b) = (0, 0);
        while a < old_cols.len() || b < patch.len() {
            let take_old = b >= patch.len() || (a < old_cols.len() && old_cols[a] < patch[b].0);
            if take_old {
                cols.push(old_cols[a]);
                vals.push(old_vals[a]);
                a += 1;
            } else {
                let (c, w) = patch[b];
                if a < old_cols.len() && old_cols[a] == c {
                    a += 1;
                }
                if w > 0.0 {
                    cols.push(c);
                    vals.push(w);
                }
                b += 1;
            }
        }
        row_offsets.push(cols.len());
    }

    let labels = match (g.labels(), &delta.new_labels) {
        (NodeLabels::Identity, None) => NodeLabels::Identity,
        (old, extra) => {
            let mut names: Vec<String> = (0..n_old).map(|i| old.label(i).into_owned()).collect();
            for k in 0..delta.n_new_nodes {
                let id = n_old + k;
                let name = extra
                    .as_ref()
                    .map(|v| v[k].clone())
                    .filter(|s| !s.is_empty())
                    .unwrap_or_else(|| id.to_string());
                names.push(name);
            }
            NodeLabels::Named(names)
        }
    };
    let out = Graph::from_csr(n, row_offsets, cols, vals)?;
    out.with_labels(labels)
}

/// Read a delta file. Data lines are `+ u v [w]` or `- u v [w]`; an optional
/// `nodes K` line declares `K` appended nodes. Tokens resolve against the
/// labels of `g`. For named graphs, unknown tokens claim the appended slots
/// in first-appearance order. A deletion without a weight removes the edge
/// entirely.
pub fn load_delta(path: impl AsRef<Path>, g: &Graph) -> Result<GraphDelta> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_delta(BufReader::new(file), path, g)
}

pub fn parse_delta<R: BufRead>(reader: R, source: &Path, g: &Graph) -> Result<GraphDelta> {
    let n_old = g.n_nodes();
    let index = g.labels().index();
    let mut n_new = 0usize;
    let mut seen_data = false;
    let mut new_names: Vec<String> = Vec::new();
    let mut new_ids: HashMap<String, usize> = HashMap::new();
    let mut pending: HashMap<(usize, usize), f64> = HashMap::new();
    let mut changes = Vec::new();

    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::io(source, e))?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let err = |msg: String| Error::Parse {
            path: source.to_path_buf(),
            line: lineno,
            msg,
        };
        let toks: Vec<&str> = trimmed.split_whitespace().collect();
        if toks[0] == "nodes" {
            if seen_data {
                return Err(err("`nodes` header must precede edge changes".into()));
            }
            if toks.len() != 2 {
                return Err(err("expected `nodes K`".into()));
            }
            n_new = toks[1]
                .parse()
                .map_err(|_| err(format!("bad node count `{}`", toks[1])))?;
            continue;
        }
        seen_data = true;
        if toks.len() < 3 || toks.len() > 4 || !(toks[0] == "+" || toks[0] == "-") {
            return Err(err("expected `+ u v [w]` or `- u v [w]`".into()));
        }

        let mut resolve = |tok: &str| -> Result<usize> {
            match &index {
                None => {
                    let id: usize = tok
                        .parse()
                        .map_err(|_| err(format!("node `{tok}` is not an integer id")))?;
                    if id >= n_old + n_new {
                        return Err(err(format!("node {id} is outside [0, {})", n_old + n_new)));
                    }
                    Ok(id)
                }
                Some(map) => {
                    if let Some(&id) = map.get(tok) {
                        return Ok(id);
                    }
                    if let Some(&id) = new_ids.get(tok) {
                        return Ok(id);
                    }
                    if new_names.len() >= n_new {
                        return Err(err(format!(
                            "unknown node `{tok}` and no appended slot left (declared {n_new})"
                        )));
                    }
                    let id = n_old + new_names.len();
                    new_names.push(tok.to_owned());
                    new_ids.insert(tok.to_owned(), id);
                    Ok(id)
                }
            }
        };
        let u = resolve(toks[1])?;
        let v = resolve(toks[2])?;
        if u == v {
            return Err(err(format!("self-loop change on `{}`", toks[1])));
        }
        let key = (u.min(v), u.max(v));
        let current =
            g.edge_weight(u, v).unwrap_or(0.0) + pending.get(&key).copied().unwrap_or(0.0);
        let w = match toks.get(3) {
            Some(t) => {
                let w: f64 = t.parse().map_err(|_| err(format!("bad weight `{t}`")))?;
                if !(w.is_finite() && w > 0.0) {
                    return Err(err(format!("weight must be positive, got {w}")));
                }
                w
            }
            None if toks[0] == "+" => 1.0,
            None => {
                if current <= 0.0 {
                    return Err(err(format!(
                        "deletion of non-existent edge ({}, {})",
                        toks[1], toks[2]
                    )));
                }
                current
            }
        };
        let delta_weight = if toks[0] == "+" { w } else { -w };
        *pending.entry(key).or_insert(0.0) += delta_weight;
        changes.push(EdgeChange { u, v, delta_weight });
    }

    let delta = GraphDelta::new(n_new, changes)?;
    if index.is_some() && n_new > 0 {
        let mut labels = new_names;
        labels.extend((labels.len()..n_new).map(|k| (n_old + k).to_string()));
        delta.with_new_labels(labels)
    } else {
        Ok(delta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path3() -> Graph {
        Graph::from_edges(3, [(0, 1, 1.0), (1, 2, 1.0)]).unwrap().0
    }

    #[test]
    fn add_node_and_edge() {
        let delta = GraphDelta::new(
            1,
            [EdgeChange {
                u: 2,
                v: 3,
                delta_weight: 1.0,
            }],
        )
        .unwrap();
        let g = apply_delta(&path3(), &delta).unwrap();
        let expected = Graph::from_edges(4, [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)])
            .unwrap()
            .0;
        assert_eq!(g, expected);
    }

    #[test]
    fn remove_edge_leaves_isolated_node() {
        let g0 = path3();
        let delta = GraphDelta::deletions(&g0, [(0, 1)]).unwrap();
        let g = apply_delta(&g0, &delta).unwrap();
        assert_eq!(g.n_nodes(), 3);
        assert_eq!(g.n_edges(), 1);
        assert_eq!(g.degree(0), 0);
        assert!(g.has_edge(2, 1));
    }

    #[test]
    fn empty_delta_is_identity() {
        let g0 = path3();
        assert_eq!(apply_delta(&g0, &GraphDelta::default()).unwrap(), g0);
    }

    #[test]
    fn errors() {
        let g0 = path3();
        let out_of_range = GraphDelta::insertions([(0, 5)]).unwrap();
        assert!(apply_delta(&g0, &out_of_range).is_err());
        let missing = GraphDelta::new(
            0,
            [EdgeChange {
                u: 0,
                v: 2,
                delta_weight: -1.0,
            }],
        )
        .unwrap();
        assert!(apply_delta(&g0, &missing).is_err());
        let too_much = GraphDelta::new(
            0,
            [EdgeChange {
                u: 0,
                v: 1,
                delta_weight: -2.0,
            }],
        )
        .unwrap();
        assert!(apply_delta(&g0, &too_much).is_err());
        assert!(GraphDelta::insertions([(1, 1)]).is_err());
    }

    #[test]
    fn canonicalizes_changes() {
        let d = GraphDelta::new(
            0,
            [
                EdgeChange {
                    u: 3,
                    v: 1,
                    delta_weight: 1.0,
                },
                EdgeChange {
                    u: 1,
                    v: 3,
                    delta_weight: 0.5,
                },
                EdgeChange {
                    u: 0,
                    v: 2,
                    delta_weight: 1.0,
                },
                EdgeChange {
                    u: 2,
                    v: 0,
                    delta_weight: -1.0,
                },
            ],
        )
        .unwrap();
        assert_eq!(
            d.changes(),
            &[EdgeChange {
                u: 1,
                v: 3,
                delta_weight: 1.5
            }]
        );
        assert_eq!(d.touched_nodes(), vec![1, 3]);
    }

    #[test]
    fn partial_weight_change() {
        let g0 = Graph::from_edges(2, [(0, 1, 3.0)]).unwrap().0;
        let d = GraphDelta::new(
            0,
            [EdgeChange {
                u: 1,
                v: 0,
                delta_weight: -1.0,
            }],
        )
        .unwrap();
        let g = apply_delta(&g0, &d).unwrap();
        assert_eq!(g.edge_weight(0, 1), Some(2.0));
        assert_eq!(apply_delta(&g, &d.inverse().unwrap()).unwrap(), g0);
    }

    #[test]
    fn parse_identity_delta() {
        let g0 = path3();
        let text = "nodes 1\n+ 2 3\n- 0 1\n# comment\n+ 0 2 2.5\n";
        let d = parse_delta(text.as_bytes(), Path::new("d"), &g0).unwrap();
        assert_eq!(d.n_new_nodes(), 1);
        let g = apply_delta(&g0, &d).unwrap();
        assert_eq!(g.n_nodes(), 4);
        assert!(g.has_edge(2, 3));
        assert!(!g.has_edge(0, 1));
        assert_eq!(g.edge_weight(0, 2), Some(2.5));
        assert_eq!(g.labels(), &NodeLabels::Identity);
    }

    #[test]
    fn parse_named_delta_assigns_new_slots() {
        let g0 = Graph::from_edges(2, [(0, 1, 1.0)])
            .unwrap()
            .0
            .with_labels(NodeLabels::Named(vec!["a".into(), "b".into()]))
            .unwrap();
        let d = parse_delta("nodes 2\n+ b zed\n".as_bytes(), Path::new("d"), &g0).unwrap();
        let g = apply_delta(&g0, &d).unwrap();
        assert_eq!(g.labels().label(2), "zed");
        assert_eq!(g.labels().label(3), "3");
        assert!(g.has_edge(1, 2));
        let bad = parse_delta("+ b zed\n".as_bytes(), Path::new("d"), &g0);
        assert!(matches!(bad, Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn parse_rejects_bad_lines() {
        let g0 = path3();
        for text in [
            "* 0 1\n",
            "+ 0\n",
            "- 0 2\n",
            "+ 0 9\n",
            "+ 0 1 0\n",
            "+ 0 1\nnodes 2\n",
        ] {
            assert!(
                parse_delta(text.as_bytes(), Path::new("d"), &g0).is_err(),
                "{text}"
            );
        }
    }
}
