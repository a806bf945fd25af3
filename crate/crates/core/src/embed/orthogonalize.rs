use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};

/// Relative residual below which a column counts as linearly dependent on
/// its predecessors.
pub const DEPENDENCE_TOL: f64 = 1e-12;

/// Orthonormalize the columns of `r` with modified Gram-Schmidt.
///
/// Column `j` of the result lies in the span of input columns `0..=j`.
/// Fails when there are more columns than rows or a column is numerically
/// dependent on the previous ones.
pub fn orthogonalize(r: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
    let (n, d) = r.dim();
    if d > n {
        return Err(Error::Usage(format!(
            "cannot orthonormalize {d} columns in dimension {n}"
        )));
    }
    // Column-major working copy.
    let mut cols: Vec<Vec<f64>> = (0..d).map(|j| r.column(j).to_vec()).collect();

    for j in 0..d {
        let (done, rest) = cols.split_at_mut(j);
        let v = &mut rest[0];
        let original = norm(v);
        for q in done.iter() {
            let proj = dot(q, v);
            for (x, &y) in v.iter_mut().zip(q) {
                *x -= proj * y;
            }
        }
        let residual = norm(v);
        if !(residual > DEPENDENCE_TOL * original) || residual == 0.0 {
            return Err(Error::Numeric(format!(
                "column {j} is linearly dependent on earlier columns (residual {residual:e})"
            )));
        }
        let inv = 1.0 / residual;
        v.iter_mut().for_each(|x| *x *= inv);
    }

    let mut out = Array2::zeros((n, d));
    for (j, col) in cols.iter().enumerate() {
        for (dst, &x) in out.column_mut(j).iter_mut().zip(col) {
            *dst = x;
        }
    }
    Ok(out)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `max |Q^T Q - I|` over all entries.
pub fn orthonormality_error(q: ArrayView2<'_, f64>) -> f64 {
    let gram = q.t().dot(&q);
    gram.indexed_iter()
        .map(|((i, j), &g)| (g - if i == j { 1.0 } else { 0.0 }).abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embed::rng::{gaussian_matrix, RngSpec};
    use ndarray::array;

    #[test]
    fn hand_computed_three_by_two() {
        let r = array![[1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        let q = orthogonalize(r.view()).unwrap();
        let s2 = 2f64.sqrt();
        let s6 = 6f64.sqrt();
        let expected = array![[1.0 / s2, -1.0 / s6], [1.0 / s2, 1.0 / s6], [0.0, 2.0 / s6]];
        for (a, b) in q.iter().zip(expected.iter()) {
            assert!((a - b).abs() < 1e-15, "{q:?}");
        }
    }

    #[test]
    fn orthonormal_input_is_fixed_point() {
        let mut r = Array2::zeros((5, 3));
        for j in 0..3 {
            r[[j, j]] = 1.0;
        }
        let q = orthogonalize(r.view()).unwrap();
        for (a, b) in q.iter().zip(r.iter()) {
            assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn gaussian_input_becomes_orthonormal() {
        let r = gaussian_matrix(&RngSpec::new(5), 300, 40);
        let q = orthogonalize(r.view()).unwrap();
        assert!(orthonormality_error(q.view()) <= 1e-10);
    }

    #[test]
    fn span_is_nested() {
        // Column j of Q has no component along input columns beyond j, so
        // Q's first column is parallel to R's first column.
        let r = gaussian_matrix(&RngSpec::new(6), 20, 4);
        let q = orthogonalize(r.view()).unwrap();
        let c0 = r.column(0);
        let scale = c0.dot(&c0).sqrt();
        for i in 0..20 {
            assert!((q[[i, 0]] - c0[i] / scale).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_wide_and_dependent() {
        assert!(matches!(
            orthogonalize(Array2::<f64>::zeros((2, 3)).view()),
            Err(Error::Usage(_))
        ));
        let dep = array![[1.0, 2.0], [1.0, 2.0], [0.0, 0.0]];
        assert!(matches!(orthogonalize(dep.view()), Err(Error::Numeric(_))));
        let zero = Array2::<f64>::zeros((3, 1));
        assert!(matches!(orthogonalize(zero.view()), Err(Error::Numeric(_))));
    }
}
