//! Incremental maintenance of a [`ProjectionState`] under graph changes.
//!
//! With `A' = A + dA` and `U_i' = U_i + dU_i`, the recurrence
//! `U_i' = A' U_{i-1}'` gives
//!
//! ```text
//! dU_i = A dU_{i-1} + dA U_{i-1} + dA dU_{i-1},   dU_0 = 0
//! ```
//!
//! `dU_i` is nonzero only on the frontier: nodes touched by `dA` plus the
//! `A`-neighbors of the previous frontier. Rows outside it are never read
//! or written, so the cost follows the changed neighborhoods rather than
//! the graph size.
//!
//! New nodes are handled first by appending rows: fresh Gaussian rows to
//! `U0` and zero rows to `U1..Uq`, which is exactly the state of a graph
//! where those nodes are isolated.

use std::collections::HashMap;

use ndarray::{s, Array2, Axis};

use crate::embed::{
    gaussian_rows, orthogonalize, recombine, EmbeddingMatrix, ProjectionState, RngSpec, Weights,
};
use crate::error::{Error, Result};
use crate::graph::{Graph, GraphDelta, Normalization};
use crate::parallel::{partition_columns, run_column_blocks};

/// What an update touched.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct UpdateReport {
    pub n_new_nodes: usize,
    pub changed_edges: usize,
    /// `|frontier_i|` for hops `i = 1..=q`.
    pub frontier_sizes: Vec<usize>,
}

/// Append `n_new` rows for new, isolated nodes.
///
/// `U0` gains rows `N..N + n_new` of the seeded Gaussian stream with `d`
/// columns. When `n_new >= d` the new block's columns are orthonormalized
/// on their own; smaller blocks are used as drawn. `U1..Uq` gain zero rows.
pub fn extend_for_new_nodes(
    state: &ProjectionState,
    n_new: usize,
    rng: &RngSpec,
) -> Result<ProjectionState> {
    let mut out = state.clone();
    extend_in_place(&mut out, n_new, rng)?;
    Ok(out)
}

fn extend_in_place(state: &mut ProjectionState, n_new: usize, rng: &RngSpec) -> Result<()> {
    if n_new == 0 {
        return Ok(());
    }
    let (n, d) = (state.n_nodes(), state.dim());
    let mut block = gaussian_rows(rng, n..n + n_new, d);
    if n_new >= d {
        block = orthogonalize(block.view())?;
    }
    let zeros = Array2::<f64>::zeros((n_new, d));
    for (i, part) in state.parts.iter_mut().enumerate() {
        let rows = if i == 0 { block.view() } else { zeros.view() };
        part.append(Axis(0), rows)
            .map_err(|e| Error::Shape(format!("cannot extend part {i}: {e}")))?;
    }
    Ok(())
}

/// Sparse symmetric `dA`, one sorted row per touched node.
struct DeltaRows {
    rows: HashMap<usize, Vec<(usize, f64)>>,
}

impl DeltaRows {
    fn new(delta: &GraphDelta) -> Self {
        let mut rows: HashMap<usize, Vec<(usize, f64)>> = HashMap::new();
        for c in delta.changes() {
            rows.entry(c.u).or_default().push((c.v, c.delta_weight));
            rows.entry(c.v).or_default().push((c.u, c.delta_weight));
        }
        for row in rows.values_mut() {
            row.sort_by_key(|&(j, _)| j);
        }
        DeltaRows { rows }
    }

    fn row(&self, r: usize) -> &[(usize, f64)] {
        self.rows.get(&r).map_or(&[], Vec::as_slice)
    }
}

/// Rows of `dU_i` that may be nonzero, for each hop, with a row-to-slot map.
struct Frontier {
    rows: Vec<usize>,
    slot: HashMap<usize, usize>,
}

impl Frontier {
    fn new(rows: Vec<usize>) -> Self {
        let slot = rows.iter().enumerate().map(|(k, &r)| (r, k)).collect();
        Frontier { rows, slot }
    }
}

fn frontiers(g_old: &Graph, touched: &[usize], order: usize) -> Vec<Frontier> {
    let n_old = g_old.n_nodes();
    let mut out: Vec<Frontier> = Vec::with_capacity(order);
    let mut current = touched.to_vec();
    for hop in 1..=order {
        if hop > 1 {
            let prev = &out[hop - 2].rows;
            let mut next: Vec<usize> = touched.to_vec();
            for &r in prev.iter().filter(|&&r| r < n_old) {
                next.extend_from_slice(g_old.neighbors(r));
            }
            next.sort_unstable();
            next.dedup();
            current = next;
        }
        out.push(Frontier::new(std::mem::take(&mut current)));
    }
    out
}

/// Apply `delta` to a state computed for `g_old`, in place.
///
/// Only the adjacency normalization is supported: under the transition
/// matrix a degree change rescales whole rows, which breaks locality.
pub fn update_in_place(
    state: &mut ProjectionState,
    g_old: &Graph,
    delta: &GraphDelta,
    n_workers: usize,
) -> Result<UpdateReport> {
    if state.normalization() != Normalization::Adjacency {
        return Err(Error::Usage(format!(
            "incremental updates need the adjacency normalization, state uses {}",
            state.normalization()
        )));
    }
    if state.n_nodes() != g_old.n_nodes() {
        return Err(Error::Shape(format!(
            "state has {} rows but the graph has {} nodes",
            state.n_nodes(),
            g_old.n_nodes()
        )));
    }
    delta.resolve_against(g_old)?;
    let order = state.order();
    let mut report = UpdateReport {
        n_new_nodes: delta.n_new_nodes(),
        changed_edges: delta.changes().len(),
        frontier_sizes: Vec::new(),
    };

    let rng = state.rng();
    extend_in_place(state, delta.n_new_nodes(), &rng)?;
    if delta.changes().is_empty() {
        report.frontier_sizes = vec![0; order];
        return Ok(report);
    }

    let d_rows = DeltaRows::new(delta);
    let fronts = frontiers(g_old, &delta.touched_nodes(), order);
    report.frontier_sizes = fronts.iter().map(|f| f.rows.len()).collect();

    let parts = &state.parts;
    let n_old = g_old.n_nodes();
    let partition = partition_columns(state.dim(), n_workers);
    let blocks = run_column_blocks(&partition, n_workers, |cols| {
        let w = cols.len();
        // deltas[i - 1] holds dU_i on fronts[i - 1], row-major |F_i| x w.
        let mut deltas: Vec<Vec<f64>> = Vec::with_capacity(order);
        for hop in 1..=order {
            let front = &fronts[hop - 1];
            let prev_part = parts[hop - 1].slice(s![.., cols.clone()]);
            let prev_delta = (hop > 1).then(|| (&fronts[hop - 2], &deltas[hop - 2]));
            let mut buf = vec![0.0; front.rows.len() * w];
            for (k, &r) in front.rows.iter().enumerate() {
                let out = &mut buf[k * w..(k + 1) * w];
                // A dU_{i-1}
                if let Some((pf, pd)) = prev_delta {
                    if r < n_old {
                        for (&j, &a) in g_old.neighbors(r).iter().zip(g_old.neighbor_weights(r)) {
                            if let Some(&slot) = pf.slot.get(&j) {
                                for (o, &x) in out.iter_mut().zip(&pd[slot * w..(slot + 1) * w]) {
                                    *o += a * x;
                                }
                            }
                        }
                    }
                }
                // dA (U_{i-1} + dU_{i-1})
                for &(j, dw) in d_rows.row(r) {
                    for (o, &x) in out.iter_mut().zip(prev_part.row(j)) {
                        *o += dw * x;
                    }
                    if let Some((pf, pd)) = prev_delta {
                        if let Some(&slot) = pf.slot.get(&j) {
                            for (o, &x) in out.iter_mut().zip(&pd[slot * w..(slot + 1) * w]) {
                                *o += dw * x;
                            }
                        }
                    }
                }
            }
            deltas.push(buf);
        }
        Ok(deltas)
    })?;

    for (range, deltas) in partition.ranges().iter().zip(blocks) {
        let w = range.len();
        for (hop, buf) in deltas.iter().enumerate() {
            let part = &mut state.parts[hop + 1];
            for (k, &r) in fronts[hop].rows.iter().enumerate() {
                let mut row = part.slice_mut(s![r, range.clone()]);
                for (dst, &x) in row.iter_mut().zip(&buf[k * w..(k + 1) * w]) {
                    *dst += x;
                }
            }
        }
    }
    Ok(report)
}

/// Updated copy of `state` for the graph `apply_delta(g_old, delta)`.
pub fn update(
    state: &ProjectionState,
    g_old: &Graph,
    delta: &GraphDelta,
) -> Result<ProjectionState> {
    let mut out = state.clone();
    update_in_place(&mut out, g_old, delta, 1)?;
    Ok(out)
}

/// [`update`] followed by [`recombine`].
pub fn update_and_recombine(
    state: &ProjectionState,
    g_old: &Graph,
    delta: &GraphDelta,
    weights: &Weights,
) -> Result<(ProjectionState, EmbeddingMatrix)> {
    let next = update(state, g_old, delta)?;
    let emb = recombine(&next, weights)?;
    Ok((next, emb))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embed::{embed_static, embed_with_projection};
    use crate::graph::{apply_delta, generate_er, EdgeChange};

    fn rel_err(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
        let diff = (a - b).mapv(|x| x * x).sum().sqrt();
        let base = b.mapv(|x| x * x).sum().sqrt();
        if base == 0.0 {
            diff
        } else {
            diff / base
        }
    }

    fn assert_states_close(a: &ProjectionState, b: &ProjectionState, tol: f64) {
        assert_eq!(a.order(), b.order());
        for i in 0..=a.order() {
            assert_eq!(a.part(i).dim(), b.part(i).dim());
            let e = rel_err(a.part(i), b.part(i));
            assert!(e <= tol, "part {i}: relative error {e}");
        }
    }

    fn w3() -> Weights {
        Weights::new(vec![1.0, 1.0, 0.5, 0.25]).unwrap()
    }

    #[test]
    fn empty_delta_is_bitwise_noop() {
        let g = generate_er(50, 100, 1).unwrap();
        let (state, _) =
            embed_static(&g, 8, &w3(), RngSpec::new(2), Normalization::Adjacency).unwrap();
        let out = update(&state, &g, &GraphDelta::default()).unwrap();
        assert_eq!(out, state);
    }

    #[test]
    fn single_insertion_on_path_matches_rerun() {
        let n = 40;
        let (g, _) = Graph::from_edges(n, (0..n - 1).map(|i| (i, i + 1, 1.0))).unwrap();
        let w = Weights::new(vec![1.0, 1.0, 1.0]).unwrap();
        let rng = RngSpec::new(7);
        let (state, _) = embed_static(&g, 8, &w, rng, Normalization::Adjacency).unwrap();
        let delta = GraphDelta::insertions([(3, 30)]).unwrap();
        let updated = update(&state, &g, &delta).unwrap();
        let g2 = apply_delta(&g, &delta).unwrap();
        let (rerun, _) = embed_static(&g2, 8, &w, rng, Normalization::Adjacency).unwrap();
        assert_states_close(&updated, &rerun, 1e-8);
    }

    #[test]
    fn mixed_churn_matches_rerun() {
        let g = generate_er(200, 800, 3).unwrap();
        let rng = RngSpec::new(1);
        let (state, _) = embed_static(&g, 16, &w3(), rng, Normalization::Adjacency).unwrap();
        let removed: Vec<_> = g.edges().step_by(37).map(|(u, v, _)| (u, v)).collect();
        let mut changes: Vec<EdgeChange> = removed
            .iter()
            .map(|&(u, v)| EdgeChange {
                u,
                v,
                delta_weight: -1.0,
            })
            .collect();
        changes.extend(
            (0..20)
                .map(|k| (k, 199 - k))
                .filter(|&(u, v)| !g.has_edge(u, v))
                .map(|(u, v)| EdgeChange {
                    u,
                    v,
                    delta_weight: 2.0,
                }),
        );
        let delta = GraphDelta::new(0, changes).unwrap();
        let mut updated = state.clone();
        let report = update_in_place(&mut updated, &g, &delta, 3).unwrap();
        assert_eq!(report.frontier_sizes.len(), 3);
        let g2 = apply_delta(&g, &delta).unwrap();
        let (rerun, _) = embed_static(&g2, 16, &w3(), rng, Normalization::Adjacency).unwrap();
        assert_states_close(&updated, &rerun, 1e-8);
    }

    #[test]
    fn worker_count_does_not_change_update() {
        let g = generate_er(120, 400, 8).unwrap();
        let (state, _) =
            embed_static(&g, 12, &w3(), RngSpec::new(4), Normalization::Adjacency).unwrap();
        let delta = GraphDelta::insertions(
            [(0, 5), (7, 9), (100, 3)]
                .into_iter()
                .filter(|&(u, v)| !g.has_edge(u, v)),
        )
        .unwrap();
        let mut a = state.clone();
        let mut b = state.clone();
        update_in_place(&mut a, &g, &delta, 1).unwrap();
        update_in_place(&mut b, &g, &delta, 4).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn locality_outside_neighborhood() {
        // Two components: path 0..10 and path 10..20. Change only the first.
        let edges = (0..9)
            .map(|i| (i, i + 1, 1.0))
            .chain((10..19).map(|i| (i, i + 1, 1.0)));
        let (g, _) = Graph::from_edges(20, edges).unwrap();
        let w = Weights::new(vec![1.0, 1.0, 1.0, 1.0]).unwrap();
        let (state, _) =
            embed_static(&g, 4, &w, RngSpec::new(0), Normalization::Adjacency).unwrap();
        let delta = GraphDelta::insertions([(0, 2)]).unwrap();
        let updated = update(&state, &g, &delta).unwrap();
        for i in 0..=3 {
            for r in 10..20 {
                assert_eq!(updated.part(i).row(r), state.part(i).row(r));
            }
        }
        // Within the component, beyond q hops of nodes 0 and 2 nothing moves.
        for r in 6..10 {
            for i in 0..=3 {
                assert_eq!(updated.part(i).row(r), state.part(i).row(r));
            }
        }
        assert_ne!(updated.part(1).row(0), state.part(1).row(0));
    }

    #[test]
    fn extension_rows() {
        let g = generate_er(30, 60, 2).unwrap();
        let rng = RngSpec::new(5);
        let (state, _) = embed_static(&g, 8, &w3(), rng, Normalization::Adjacency).unwrap();
        assert_eq!(extend_for_new_nodes(&state, 0, &rng).unwrap(), state);
        let ext = extend_for_new_nodes(&state, 3, &rng).unwrap();
        assert_eq!(ext.n_nodes(), 33);
        for i in 1..=3 {
            assert!(ext.part(i).slice(s![30.., ..]).iter().all(|&x| x == 0.0));
            assert_eq!(ext.part(i).slice(s![..30, ..]), state.part(i));
        }
        assert_eq!(
            ext.part(0).slice(s![30.., ..]),
            gaussian_rows(&rng, 30..33, 8)
        );
        let twice =
            extend_for_new_nodes(&extend_for_new_nodes(&state, 2, &rng).unwrap(), 3, &rng).unwrap();
        let once = extend_for_new_nodes(&state, 5, &rng).unwrap();
        assert_eq!(twice, once);
        let big = extend_for_new_nodes(&state, 10, &rng).unwrap();
        let block = big.part(0).slice(s![30.., ..]).to_owned();
        assert!(crate::embed::orthonormality_error(block.view()) < 1e-10);
    }

    #[test]
    fn node_addition_matches_rerun_with_extended_projection() {
        let g = generate_er(60, 150, 6).unwrap();
        let rng = RngSpec::new(9);
        let (state, _) = embed_static(&g, 8, &w3(), rng, Normalization::Adjacency).unwrap();
        let delta = GraphDelta::new(
            2,
            [
                EdgeChange {
                    u: 60,
                    v: 3,
                    delta_weight: 1.0,
                },
                EdgeChange {
                    u: 61,
                    v: 60,
                    delta_weight: 1.0,
                },
                EdgeChange {
                    u: 61,
                    v: 17,
                    delta_weight: 1.0,
                },
            ],
        )
        .unwrap();
        let updated = update(&state, &g, &delta).unwrap();
        let g2 = apply_delta(&g, &delta).unwrap();
        let (rerun, _) = embed_with_projection(
            &g2,
            updated.part(0).clone(),
            &w3(),
            rng,
            Normalization::Adjacency,
        )
        .unwrap();
        assert_states_close(&updated, &rerun, 1e-8);
    }

    #[test]
    fn node_deletion_as_edge_removal() {
        let g = generate_er(80, 300, 11).unwrap();
        let rng = RngSpec::new(2);
        let (state, _) = embed_static(&g, 8, &w3(), rng, Normalization::Adjacency).unwrap();
        let victim = 5;
        let delta =
            GraphDelta::deletions(&g, g.neighbors(victim).iter().map(|&v| (victim, v))).unwrap();
        let updated = update(&state, &g, &delta).unwrap();
        let g2 = apply_delta(&g, &delta).unwrap();
        assert_eq!(g2.degree(victim), 0);
        let (rerun, _) = embed_static(&g2, 8, &w3(), rng, Normalization::Adjacency).unwrap();
        assert_states_close(&updated, &rerun, 1e-8);
    }

    #[test]
    fn sequential_equals_merged() {
        let g = generate_er(150, 500, 12).unwrap();
        let rng = RngSpec::new(3);
        let (state, _) = embed_static(&g, 8, &w3(), rng, Normalization::Adjacency).unwrap();
        let d1 = GraphDelta::insertions(
            [(0, 149), (3, 77)]
                .into_iter()
                .filter(|&(u, v)| !g.has_edge(u, v)),
        )
        .unwrap();
        let g1 = apply_delta(&g, &d1).unwrap();
        let d2 = GraphDelta::deletions(&g1, g1.edges().take(4).map(|(u, v, _)| (u, v))).unwrap();
        let g2 = apply_delta(&g1, &d2).unwrap();
        let (_, seq) =
            update_and_recombine(&update(&state, &g, &d1).unwrap(), &g1, &d2, &w3()).unwrap();
        let (_, merged) = update_and_recombine(&state, &g, &d1.then(&d2).unwrap(), &w3()).unwrap();
        assert!(rel_err(&seq.matrix, &merged.matrix) <= 1e-8);
        assert_eq!(apply_delta(&g, &d1.then(&d2).unwrap()).unwrap(), g2);
    }

    #[test]
    fn rejects_transition_and_shape_mismatch() {
        let g = generate_er(30, 50, 1).unwrap();
        let (state, _) =
            embed_static(&g, 4, &w3(), RngSpec::new(0), Normalization::Transition).unwrap();
        let delta =
            GraphDelta::insertions([(0, 1)].into_iter().filter(|&(u, v)| !g.has_edge(u, v)))
                .unwrap();
        assert!(matches!(update(&state, &g, &delta), Err(Error::Usage(_))));
        let (state, _) =
            embed_static(&g, 4, &w3(), RngSpec::new(0), Normalization::Adjacency).unwrap();
        let other = generate_er(31, 50, 1).unwrap();
        assert!(matches!(
            update(&state, &other, &delta),
            Err(Error::Shape(_))
        ));
    }
}
