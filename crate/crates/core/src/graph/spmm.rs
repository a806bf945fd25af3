use std::fmt;
use std::str::FromStr;

use ndarray::{Array2, ArrayView2, ArrayViewMut2};

use super::Graph;
use crate::error::{Error, Result};

/// Which matrix the graph stands for in products.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Normalization {
    /// The adjacency matrix `A`.
    #[default]
    Adjacency,
    /// The row-normalized transition matrix `D^-1 A`. Rows of zero-degree
    /// nodes are zero.
    Transition,
}

impl Normalization {
    pub fn tag(self) -> u8 {
        match self {
            Normalization::Adjacency => 0,
            Normalization::Transition => 1,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            0 => Some(Normalization::Adjacency),
            1 => Some(Normalization::Transition),
            _ => None,
        }
    }
}

impl fmt::Display for Normalization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Normalization::Adjacency => "adjacency",
            Normalization::Transition => "transition",
        })
    }
}

impl FromStr for Normalization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "adjacency" => Ok(Normalization::Adjacency),
            "transition" => Ok(Normalization::Transition),
            other => Err(Error::Usage(format!(
                "unknown normalization `{other}` (expected adjacency or transition)"
            ))),
        }
    }
}

/// Sparse-dense product `M * x` where `M` is `A` or `D^-1 A`.
pub fn spmm(
    g: &Graph,
    x: ArrayView2<'_, f64>,
    normalization: Normalization,
) -> Result<Array2<f64>> {
    let mut out = Array2::zeros((g.n_nodes(), x.ncols()));
    spmm_into(g, x, normalization, out.view_mut())?;
    Ok(out)
}

/// Like [`spmm`], writing into `out` (overwritten, not accumulated).
///
/// Each output entry sums its row's contributions in ascending column
/// order, so results do not depend on how the columns of `x` are split.
pub fn spmm_into(
    g: &Graph,
    x: ArrayView2<'_, f64>,
    normalization: Normalization,
    mut out: ArrayViewMut2<'_, f64>,
) -> Result<()> {
    let n = g.n_nodes();
    if x.nrows() != n {
        return Err(Error::Shape(format!(
            "spmm: graph has {n} nodes but the dense operand has {} rows",
            x.nrows()
        )));
    }
    if out.dim() != (n, x.ncols()) {
        return Err(Error::Shape(format!(
            "spmm: output is {:?}, expected ({n}, {})",
            out.dim(),
            x.ncols()
        )));
    }
    let k = x.ncols();
    let owned;
    let xs = match x.as_slice() {
        Some(s) => s,
        None => {
            owned = x.as_standard_layout().into_owned();
            owned.as_slice().expect("standard layout")
        }
    };
    let offsets = g.row_offsets();
    let cols = g.col_indices();
    let vals = g.values();

    for (i, mut out_row) in out.rows_mut().into_iter().enumerate() {
        out_row.fill(0.0);
        let (lo, hi) = (offsets[i], offsets[i + 1]);
        if lo == hi {
            continue;
        }
        let dst = out_row
            .as_slice_mut()
            .expect("output rows must be contiguous");
        for e in lo..hi {
            let w = vals[e];
            let src = &xs[cols[e] * k..cols[e] * k + k];
            for (o, &s) in dst.iter_mut().zip(src) {
                *o += w * s;
            }
        }
        if normalization == Normalization::Transition {
            let deg: f64 = vals[lo..hi].iter().sum();
            for o in dst.iter_mut() {
                *o /= deg;
            }
        }
    }
    Ok(())
}
