//! Iterative Gaussian random projection.
//!
//! The embedding of a graph with adjacency `A` is
//!
//! ```text
//! U = (a0 I + a1 A + a2 A^2 + ... + aq A^q) U0
//! ```
//!
//! where `U0` is an orthonormalized Gaussian matrix. It is never formed
//! through matrix powers: the parts `U_i = A U_{i-1}` are computed with
//! `q` sparse products and kept in a [`ProjectionState`], so changing the
//! weights ([`recombine`]) or the graph ([`crate::dynamic`]) is cheap.

mod grid;
mod orthogonalize;
mod rng;

pub use grid::{
    default_grid, extended_grid, grid_search_scored, grid_search_weights, validation_score,
    ValidationMetric, GRID_VALUES,
};
pub use orthogonalize::{orthogonalize, orthonormality_error, DEPENDENCE_TOL};
pub use rng::{gaussian_matrix, gaussian_rows, RngSpec};

use std::fmt;
use std::str::FromStr;

use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};
use crate::graph::{spmm_into, Graph, Normalization};

/// Default embedding dimension.
pub const DEFAULT_DIM: usize = 128;
/// Default proximity order.
pub const DEFAULT_ORDER: usize = 3;

/// Coefficients `(a0, ..., aq)` of the proximity polynomial.
#[derive(Debug, Clone, PartialEq)]
pub struct Weights {
    alpha: Vec<f64>,
}

impl Weights {
    pub fn new(alpha: Vec<f64>) -> Result<Self> {
        if alpha.len() < 2 {
            return Err(Error::Usage(format!(
                "need at least two weights (order >= 1), got {}",
                alpha.len()
            )));
        }
        if alpha.iter().any(|a| !a.is_finite()) {
            return Err(Error::Usage("weights must be finite".into()));
        }
        Ok(Weights { alpha })
    }

    /// `e_k` of order `q`.
    pub fn one_hot(order: usize, k: usize) -> Result<Self> {
        let mut alpha = vec![0.0; order + 1];
        *alpha
            .get_mut(k)
            .ok_or_else(|| Error::Usage(format!("index {k} exceeds order {order}")))? = 1.0;
        Self::new(alpha)
    }

    pub fn order(&self) -> usize {
        self.alpha.len() - 1
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }
}

impl fmt::Display for Weights {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, a) in self.alpha.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

impl FromStr for Weights {
    type Err = Error;

    /// Comma-separated list, e.g. `0,1,0.1,0.01`.
    fn from_str(s: &str) -> Result<Self> {
        let alpha = s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Usage(format!("bad weight `{t}` in `{s}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        Weights::new(alpha)
    }
}

/// The projection `U0` and its propagated parts `U1..Uq`.
///
/// Invariant: `U_i = M U_{i-1}` with `M` the matrix selected by
/// `normalization`. This is everything needed to recombine under new
/// weights or to update after graph changes.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionState {
    pub(crate) rng: RngSpec,
    pub(crate) normalization: Normalization,
    pub(crate) parts: Vec<Array2<f64>>,
}

impl ProjectionState {
    /// Assemble a state from explicit parts. All parts must share one shape
    /// and there must be at least two (order >= 1).
    pub fn from_parts(
        rng: RngSpec,
        normalization: Normalization,
        parts: Vec<Array2<f64>>,
    ) -> Result<Self> {
        if parts.len() < 2 {
            return Err(Error::Shape(format!(
                "a projection state needs at least 2 parts, got {}",
                parts.len()
            )));
        }
        let shape = parts[0].dim();
        if let Some(bad) = parts.iter().position(|p| p.dim() != shape) {
            return Err(Error::Shape(format!(
                "part {bad} is {:?}, expected {shape:?}",
                parts[bad].dim()
            )));
        }
        Ok(ProjectionState {
            rng,
            normalization,
            parts,
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.parts[0].nrows()
    }

    pub fn dim(&self) -> usize {
        self.parts[0].ncols()
    }

    pub fn order(&self) -> usize {
        self.parts.len() - 1
    }

    pub fn rng(&self) -> RngSpec {
        self.rng
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    /// `U_i` for `i` in `0..=order`.
    pub fn part(&self, i: usize) -> &Array2<f64> {
        &self.parts[i]
    }

    pub fn parts(&self) -> &[Array2<f64>] {
        &self.parts
    }

    pub fn into_parts(self) -> Vec<Array2<f64>> {
        self.parts
    }
}

/// Dense `N x d` embedding with the settings it was produced from.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    pub matrix: Array2<f64>,
    pub weights: Option<Weights>,
    pub rng: Option<RngSpec>,
    pub normalization: Normalization,
    pub rows_normalized: bool,
}

impl EmbeddingMatrix {
    /// Wrap a bare matrix with no recorded provenance.
    pub fn from_matrix(matrix: Array2<f64>) -> Self {
        EmbeddingMatrix {
            matrix,
            weights: None,
            rng: None,
            normalization: Normalization::Adjacency,
            rows_normalized: false,
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn dim(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn row(&self, node: usize) -> &[f64] {
        let d = self.dim();
        &self.matrix.as_slice().expect("standard layout")[node * d..(node + 1) * d]
    }
}

/// Orthonormal Gaussian projection `U0` of shape `n x d`.
pub fn projection_matrix(rng: &RngSpec, n: usize, d: usize) -> Result<Array2<f64>> {
    if d == 0 || n == 0 {
        return Err(Error::Usage(format!(
            "need n >= 1 and d >= 1, got n = {n}, d = {d}"
        )));
    }
    if d > n {
        return Err(Error::Usage(format!(
            "dimension {d} exceeds the number of nodes {n}"
        )));
    }
    orthogonalize(gaussian_matrix(rng, n, d).view())
}

/// `[U0, M U0, ..., M^q U0]` for a column block `u0` of the projection.
pub(crate) fn propagate(
    g: &Graph,
    u0: Array2<f64>,
    order: usize,
    normalization: Normalization,
) -> Result<Vec<Array2<f64>>> {
    let mut parts = Vec::with_capacity(order + 1);
    parts.push(u0);
    for i in 1..=order {
        let mut next = Array2::zeros(parts[i - 1].dim());
        spmm_into(g, parts[i - 1].view(), normalization, next.view_mut())?;
        parts.push(next);
    }
    Ok(parts)
}

/// Embed `g` from a given projection `u0` instead of a freshly drawn one.
pub fn embed_with_projection(
    g: &Graph,
    u0: Array2<f64>,
    weights: &Weights,
    rng: RngSpec,
    normalization: Normalization,
) -> Result<(ProjectionState, EmbeddingMatrix)> {
    if u0.nrows() != g.n_nodes() {
        return Err(Error::Shape(format!(
            "projection has {} rows for a graph of {} nodes",
            u0.nrows(),
            g.n_nodes()
        )));
    }
    let u0 = u0.as_standard_layout().into_owned();
    let parts = propagate(g, u0, weights.order(), normalization)?;
    let state = ProjectionState::from_parts(rng, normalization, parts)?;
    let emb = recombine(&state, weights)?;
    Ok((state, emb))
}

/// Single-threaded embedding of `g` into `d` dimensions.
pub fn embed_static(
    g: &Graph,
    d: usize,
    weights: &Weights,
    rng: RngSpec,
    normalization: Normalization,
) -> Result<(ProjectionState, EmbeddingMatrix)> {
    let u0 = projection_matrix(&rng, g.n_nodes(), d)?;
    embed_with_projection(g, u0, weights, rng, normalization)
}

/// `sum_i alpha_i U_i`, accumulated in increasing `i` for every entry.
pub fn recombine(state: &ProjectionState, weights: &Weights) -> Result<EmbeddingMatrix> {
    if weights.order() != state.order() {
        return Err(Error::Shape(format!(
            "weights have order {} but the state has order {}",
            weights.order(),
            state.order()
        )));
    }
    let matrix = combine_parts(state.parts.iter().map(|p| p.view()), weights.alpha());
    if let Some(pos) = matrix.iter().position(|x| !x.is_finite()) {
        return Err(Error::Numeric(format!(
            "embedding entry ({}, {}) is not finite; edge weights or alpha overflow f64",
            pos / matrix.ncols(),
            pos % matrix.ncols()
        )));
    }
    Ok(EmbeddingMatrix {
        matrix,
        weights: Some(weights.clone()),
        rng: Some(state.rng),
        normalization: state.normalization,
        rows_normalized: false,
    })
}

pub(crate) fn combine_parts<'a>(
    parts: impl IntoIterator<Item = ArrayView2<'a, f64>>,
    alpha: &[f64],
) -> Array2<f64> {
    let mut parts = parts.into_iter();
    let first = parts.next().expect("at least one part");
    let mut out = Array2::zeros(first.dim());
    out.scaled_add(alpha[0], &first);
    for (p, &a) in parts.zip(&alpha[1..]) {
        out.scaled_add(a, &p);
    }
    out
}

/// Scale every nonzero row to unit Euclidean norm.
pub fn normalize_rows(u: &EmbeddingMatrix) -> EmbeddingMatrix {
    let mut matrix = u.matrix.clone();
    for mut row in matrix.rows_mut() {
        let norm = row.dot(&row).sqrt();
        if norm > 0.0 {
            row.mapv_inplace(|x| x / norm);
        }
    }
    EmbeddingMatrix {
        matrix,
        rows_normalized: true,
        ..u.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::generate_er;
    use ndarray::array;

    fn rel_frobenius(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
        let diff = (a - b).mapv(|x| x * x).sum().sqrt();
        diff / b.mapv(|x| x * x).sum().sqrt()
    }

    #[test]
    fn weights_parse_and_display() {
        let w: Weights = "0, 1,0.5".parse().unwrap();
        assert_eq!(w.alpha(), &[0.0, 1.0, 0.5]);
        assert_eq!(w.order(), 2);
        assert_eq!(w.to_string(), "0,1,0.5");
        assert!("1".parse::<Weights>().is_err());
        assert!("1,x".parse::<Weights>().is_err());
    }

    #[test]
    fn zeroth_order_only_is_orthonormal() {
        let g = generate_er(60, 150, 1).unwrap();
        let w = Weights::new(vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        let (state, u) =
            embed_static(&g, 8, &w, RngSpec::new(2), Normalization::Adjacency).unwrap();
        assert_eq!(&u.matrix, state.part(0));
        assert!(orthonormality_error(u.matrix.view()) <= 1e-10);
    }

    #[test]
    fn empty_graph_scales_projection() {
        let g = Graph::empty(20);
        let w = Weights::new(vec![2.5, 1.0, 3.0]).unwrap();
        let (state, u) =
            embed_static(&g, 4, &w, RngSpec::new(9), Normalization::Adjacency).unwrap();
        assert_eq!(u.matrix, state.part(0) * 2.5);
    }

    #[test]
    fn dense_power_oracle() {
        let g = generate_er(40, 200, 4).unwrap();
        let w = Weights::new(vec![0.3, 1.0, -0.5, 0.25]).unwrap();
        let rng = RngSpec::new(13);
        let (state, u) = embed_static(&g, 8, &w, rng, Normalization::Adjacency).unwrap();
        let mut a = Array2::<f64>::zeros((40, 40));
        for (i, j, x) in g.edges() {
            a[[i, j]] = x;
            a[[j, i]] = x;
        }
        let mut s = Array2::<f64>::eye(40) * w.alpha()[0];
        let mut power = Array2::<f64>::eye(40);
        for k in 1..=3 {
            power = power.dot(&a);
            s = s + &power * w.alpha()[k];
        }
        let expected = s.dot(state.part(0));
        assert!(rel_frobenius(&u.matrix, &expected) <= 1e-10);
    }

    #[test]
    fn recombine_properties() {
        let g = generate_er(50, 120, 3).unwrap();
        let w1 = Weights::new(vec![0.0, 1.0, 0.1, 0.01]).unwrap();
        let w2 = Weights::new(vec![1.0, -2.0, 0.5, 3.0]).unwrap();
        let (state, u1) =
            embed_static(&g, 6, &w1, RngSpec::new(1), Normalization::Adjacency).unwrap();
        assert_eq!(recombine(&state, &w1).unwrap().matrix, u1.matrix);
        for k in 0..=3 {
            let e = recombine(&state, &Weights::one_hot(3, k).unwrap()).unwrap();
            assert_eq!(&e.matrix, state.part(k));
        }
        let sum: Vec<f64> = w1
            .alpha()
            .iter()
            .zip(w2.alpha())
            .map(|(a, b)| a + b)
            .collect();
        let lhs = recombine(&state, &w1).unwrap().matrix + recombine(&state, &w2).unwrap().matrix;
        let rhs = recombine(&state, &Weights::new(sum).unwrap())
            .unwrap()
            .matrix;
        let scale = rhs.iter().fold(1.0f64, |m, x| m.max(x.abs()));
        for (a, b) in lhs.iter().zip(rhs.iter()) {
            assert!((a - b).abs() <= 1e-12 * scale);
        }
        assert!(recombine(&state, &Weights::one_hot(2, 0).unwrap()).is_err());
    }

    #[test]
    fn transition_parts_follow_recurrence() {
        let g = generate_er(30, 60, 8).unwrap();
        let w = Weights::new(vec![1.0, 1.0, 1.0]).unwrap();
        let (state, _) =
            embed_static(&g, 5, &w, RngSpec::new(0), Normalization::Transition).unwrap();
        let deg = g.weighted_degrees();
        for i in 0..30 {
            for c in 0..5 {
                let mut acc = 0.0;
                for (&j, &x) in g.neighbors(i).iter().zip(g.neighbor_weights(i)) {
                    acc += x * state.part(1)[[j, c]];
                }
                let expected = if deg.get(i) > 0.0 {
                    acc / deg.get(i)
                } else {
                    0.0
                };
                assert!((state.part(2)[[i, c]] - expected).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn dimension_errors() {
        let g = Graph::empty(3);
        let w = Weights::new(vec![1.0, 1.0]).unwrap();
        assert!(embed_static(&g, 4, &w, RngSpec::new(0), Normalization::Adjacency).is_err());
        assert!(embed_static(&g, 0, &w, RngSpec::new(0), Normalization::Adjacency).is_err());
    }

    #[test]
    fn normalize_rows_examples() {
        let u = EmbeddingMatrix::from_matrix(array![[3.0, 4.0], [0.0, 0.0], [1e-3, 0.0]]);
        let n = normalize_rows(&u);
        assert_eq!(n.matrix.row(0).to_vec(), vec![0.6, 0.8]);
        assert_eq!(n.matrix.row(1).to_vec(), vec![0.0, 0.0]);
        for row in n.matrix.rows() {
            let norm = row.dot(&row).sqrt();
            assert!(norm == 0.0 || (norm - 1.0).abs() <= 1e-12);
        }
        assert!(n.rows_normalized);
    }
}
