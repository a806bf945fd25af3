use std::collections::HashSet;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Graph;
use crate::error::{Error, Result};

fn pair_key(u: usize, v: usize) -> (usize, usize) {
    if u < v {
        (u, v)
    } else {
        (v, u)
    }
}

/// Uniform random simple graph on `n` nodes with exactly `m` edges (the
/// G(n, m) model). Deterministic for a fixed seed.
pub fn generate_er(n: usize, m: usize, seed: u64) -> Result<Graph> {
    let max_edges = (n as u128) * (n.saturating_sub(1) as u128) / 2;
    if (m as u128) > max_edges {
        return Err(Error::Usage(format!(
            "{m} edges requested but a simple graph on {n} nodes has at most {max_edges}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let max_edges = max_edges as usize;

    // Dense requests sample the complement so rejection stays cheap.
    let complement = m > max_edges / 2;
    let target = if complement { max_edges - m } else { m };
    let mut chosen: HashSet<(usize, usize)> = HashSet::with_capacity(target);
    let mut picked: Vec<(usize, usize)> = Vec::with_capacity(target);
    while picked.len() < target {
        let u = rng.random_range(0..n);
        let v = rng.random_range(0..n);
        if u == v {
            continue;
        }
        let key = pair_key(u, v);
        if chosen.insert(key) {
            picked.push(key);
        }
    }

    let edges: Vec<(usize, usize, f64)> = if complement {
        let mut out = Vec::with_capacity(m);
        for u in 0..n {
            for v in u + 1..n {
                if !chosen.contains(&(u, v)) {
                    out.push((u, v, 1.0));
                }
            }
        }
        out
    } else {
        drop(chosen);
        picked.into_iter().map(|(u, v)| (u, v, 1.0)).collect()
    };
    let (g, _) = Graph::from_edges(n, edges)?;
    debug_assert_eq!(g.n_edges(), m);
    Ok(g)
}

/// Block index of `node` when `n` nodes are split into `blocks` contiguous
/// blocks whose sizes differ by at most one.
pub fn sbm_block_of(n: usize, blocks: usize, node: usize) -> usize {
    ((node as u128 * blocks as u128) / n as u128) as usize
}

/// Planted-partition graph: nodes are split into `blocks` contiguous,
/// near-equal blocks; each within-block pair is an edge with probability
/// `p_in`, each cross-block pair with probability `p_out`.
pub fn generate_sbm(n: usize, blocks: usize, p_in: f64, p_out: f64, seed: u64) -> Result<Graph> {
    if blocks == 0 || blocks > n.max(1) {
        return Err(Error::Usage(format!(
            "block count {blocks} must lie in [1, {}]",
            n.max(1)
        )));
    }
    if !(0.0..=1.0).contains(&p_in) || !(0.0..=1.0).contains(&p_out) || p_out > p_in {
        return Err(Error::Usage(format!(
            "need 0 <= p_out <= p_in <= 1, got p_in = {p_in}, p_out = {p_out}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    // First node of each block, plus a sentinel.
    let mut starts: Vec<usize> = (0..n)
        .filter(|&i| i == 0 || sbm_block_of(n, blocks, i) != sbm_block_of(n, blocks, i - 1))
        .collect();
    starts.push(n);

    for u in 0..n {
        let b = sbm_block_of(n, blocks, u);
        let block_end = starts[b + 1];
        sample_segment(&mut rng, u + 1, block_end, p_in, |v| {
            edges.push((u, v, 1.0))
        });
        sample_segment(&mut rng, block_end, n, p_out, |v| edges.push((u, v, 1.0)));
    }
    let (g, _) = Graph::from_edges(n, edges)?;
    Ok(g)
}

/// Bernoulli(p) selection over `start..end` by geometric skipping.
fn sample_segment(
    rng: &mut ChaCha8Rng,
    start: usize,
    end: usize,
    p: f64,
    mut emit: impl FnMut(usize),
) {
    if start >= end || p <= 0.0 {
        return;
    }
    if p >= 1.0 {
        (start..end).for_each(emit);
        return;
    }
    let log_q = (1.0 - p).ln();
    let mut pos = start;
    loop {
        // 1 - U lies in (0, 1], so the logarithm is finite.
        let u: f64 = 1.0 - rng.random::<f64>();
        let skip = (u.ln() / log_q).floor();
        if skip >= (end - pos) as f64 {
            return;
        }
        pos += skip as usize;
        emit(pos);
        pos += 1;
        if pos >= end {
            return;
        }
    }
}
