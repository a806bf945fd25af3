//! Column-partitioned parallel execution.
//!
//! Column `j` of every part `U_i` depends only on the graph and column `j`
//! of `U0`, so disjoint column ranges can be propagated by independent
//! workers that share the graph and `U0` read-only and never talk to each
//! other. Each worker writes only its own block; blocks are stitched
//! together after a single join.

use std::ops::Range;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;

use ndarray::{s, Array2};

use crate::embed::{
    projection_matrix, propagate, recombine, EmbeddingMatrix, ProjectionState, RngSpec, Weights,
};
use crate::error::Result;
use crate::graph::{Graph, Normalization};

/// Disjoint, sorted, contiguous column ranges covering `0..d`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnPartition {
    ranges: Vec<Range<usize>>,
}

impl ColumnPartition {
    pub fn ranges(&self) -> &[Range<usize>] {
        &self.ranges
    }

    pub fn len(&self) -> usize {
        self.ranges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranges.is_empty()
    }

    pub fn width(&self) -> usize {
        self.ranges.last().map_or(0, |r| r.end)
    }
}

/// Split `d` columns into `min(d, n_workers)` ranges whose sizes differ by
/// at most one, larger ranges first. `n_workers = 0` is treated as 1.
pub fn partition_columns(d: usize, n_workers: usize) -> ColumnPartition {
    let parts = n_workers.max(1).min(d);
    let mut ranges = Vec::with_capacity(parts);
    let mut start = 0;
    for k in 0..parts {
        let size = d / parts + usize::from(k < d % parts);
        ranges.push(start..start + size);
        start += size;
    }
    ColumnPartition { ranges }
}

/// Number of hardware threads, at least 1.
pub fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// Run `job` once per range of `partition` on up to `n_workers` threads.
///
/// Workers claim the next unprocessed range whenever they become idle.
/// Results come back in partition order; the first error wins.
pub fn run_column_blocks<T, F>(
    partition: &ColumnPartition,
    n_workers: usize,
    job: F,
) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(Range<usize>) -> Result<T> + Sync,
{
    let ranges = partition.ranges();
    let n_workers = n_workers.max(1).min(ranges.len().max(1));
    if n_workers == 1 {
        return ranges.iter().cloned().map(&job).collect();
    }

    let next = AtomicUsize::new(0);
    let (tx, rx) = mpsc::channel();
    std::thread::scope(|scope| {
        for _ in 0..n_workers {
            let tx = tx.clone();
            let (next, job) = (&next, &job);
            scope.spawn(move || loop {
                let idx = next.fetch_add(1, Ordering::Relaxed);
                let Some(range) = ranges.get(idx) else { break };
                if tx.send((idx, job(range.clone()))).is_err() {
                    break;
                }
            });
        }
    });
    drop(tx);

    let mut slots: Vec<Option<Result<T>>> = (0..ranges.len()).map(|_| None).collect();
    for (idx, res) in rx {
        debug_assert!(slots[idx].is_none(), "range {idx} computed twice");
        slots[idx] = Some(res);
    }
    slots
        .into_iter()
        .map(|r| r.expect("every range is claimed by exactly one worker"))
        .collect()
}

/// Propagate `u0` through `order` sparse products, one column block per
/// task. Bitwise identical to the single-threaded path for any worker count.
pub fn propagate_parallel(
    g: &Graph,
    u0: &Array2<f64>,
    order: usize,
    normalization: Normalization,
    n_workers: usize,
) -> Result<Vec<Array2<f64>>> {
    let (n, d) = u0.dim();
    let partition = partition_columns(d, n_workers);
    let blocks = run_column_blocks(&partition, n_workers, |cols| {
        let block = u0.slice(s![.., cols]).to_owned();
        propagate(g, block, order, normalization)
    })?;

    let mut parts: Vec<Array2<f64>> = Vec::with_capacity(order + 1);
    parts.push(u0.as_standard_layout().into_owned());
    parts.extend((1..=order).map(|_| Array2::zeros((n, d))));
    let mut owner: Vec<Option<usize>> = vec![None; if cfg!(debug_assertions) { d } else { 0 }];
    for (k, (range, block)) in partition.ranges().iter().zip(blocks).enumerate() {
        if cfg!(debug_assertions) {
            for c in range.clone() {
                assert!(
                    owner[c].is_none(),
                    "column {c} written by blocks {:?} and {k}",
                    owner[c]
                );
                owner[c] = Some(k);
            }
        }
        for (i, part) in block.into_iter().enumerate().skip(1) {
            parts[i].slice_mut(s![.., range.clone()]).assign(&part);
        }
    }
    debug_assert!(owner.iter().all(Option::is_some));
    Ok(parts)
}

/// Embedding with the column work spread over `n_workers` threads. Output
/// is bitwise identical to [`crate::embed::embed_static`].
pub fn embed_parallel(
    g: &Graph,
    d: usize,
    weights: &Weights,
    rng: RngSpec,
    normalization: Normalization,
    n_workers: usize,
) -> Result<(ProjectionState, EmbeddingMatrix)> {
    let u0 = projection_matrix(&rng, g.n_nodes(), d)?;
    let parts = propagate_parallel(g, &u0, weights.order(), normalization, n_workers)?;
    let state = ProjectionState::from_parts(rng, normalization, parts)?;
    let emb = recombine(&state, weights)?;
    Ok((state, emb))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embed::embed_static;
    use crate::graph::generate_er;

    fn sizes(p: &ColumnPartition) -> Vec<usize> {
        p.ranges().iter().map(|r| r.len()).collect()
    }

    #[test]
    fn partition_examples() {
        assert_eq!(sizes(&partition_columns(128, 4)), vec![32; 4]);
        assert_eq!(sizes(&partition_columns(5, 3)), vec![2, 2, 1]);
        assert_eq!(partition_columns(7, 1).ranges(), &[0..7]);
        assert_eq!(sizes(&partition_columns(3, 8)), vec![1, 1, 1]);
        assert_eq!(partition_columns(9, 0).ranges(), &[0..9]);
    }

    #[test]
    fn partition_is_exhaustive_and_balanced() {
        for d in 1..40 {
            for w in 1..12 {
                let p = partition_columns(d, w);
                let mut next = 0;
                for r in p.ranges() {
                    assert_eq!(r.start, next);
                    assert!(!r.is_empty());
                    next = r.end;
                }
                assert_eq!(next, d);
                let s = sizes(&p);
                assert!(s.iter().max().unwrap() - s.iter().min().unwrap() <= 1);
            }
        }
    }

    #[test]
    fn results_in_partition_order() {
        let p = partition_columns(10, 4);
        let out = run_column_blocks(&p, 3, |r| Ok(r.start)).unwrap();
        assert_eq!(out, vec![0, 3, 6, 8]);
    }

    #[test]
    fn first_error_propagates() {
        let p = partition_columns(6, 3);
        let out: Result<Vec<()>> = run_column_blocks(&p, 3, |r| {
            if r.start == 2 {
                Err(crate::Error::Numeric("boom".into()))
            } else {
                Ok(())
            }
        });
        assert!(out.is_err());
    }

    #[test]
    fn bitwise_equal_to_serial() {
        let g = generate_er(300, 1500, 5).unwrap();
        let w = Weights::new(vec![0.5, 1.0, 0.1, 0.01]).unwrap();
        for norm in [Normalization::Adjacency, Normalization::Transition] {
            let (s1, u1) = embed_static(&g, 16, &w, RngSpec::new(3), norm).unwrap();
            for workers in [1, 2, 3, 4, 8] {
                let (s2, u2) = embed_parallel(&g, 16, &w, RngSpec::new(3), norm, workers).unwrap();
                assert_eq!(s1, s2, "workers = {workers}");
                assert_eq!(u1, u2);
            }
        }
    }
}
