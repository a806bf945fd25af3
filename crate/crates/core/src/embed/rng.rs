use std::ops::Range;

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Seeded source of the Gaussian projection entries.
///
/// Entry `(row, col)` is a pure function of `(seed, row, col)`: column `col`
/// is ChaCha8 stream number `col` under the seed, and consecutive row pairs
/// consume one Box-Muller pair (two 64-bit words) each. Any rectangular
/// window of the projection can therefore be regenerated on its own.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngSpec {
    pub seed: u64,
}

impl RngSpec {
    /// Identifier of the generator scheme.
    pub const ALGORITHM: &'static str = "chacha8-stream-per-column/box-muller";

    pub fn new(seed: u64) -> Self {
        RngSpec { seed }
    }

    /// Standard normal variates for `rows` of column `col`.
    pub fn standard_normal_column(&self, col: usize, rows: Range<usize>) -> Vec<f64> {
        let mut out = Vec::with_capacity(rows.len());
        if rows.is_empty() {
            return out;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(col as u64);
        // Each pair uses two u64 draws, i.e. four 32-bit words.
        let first_pair = rows.start / 2;
        rng.set_word_pos(first_pair as u128 * 4);
        let mut row = first_pair * 2;
        while row < rows.end {
            let (z0, z1) = box_muller(&mut rng);
            if row >= rows.start {
                out.push(z0);
            }
            if row + 1 >= rows.start && row + 1 < rows.end {
                out.push(z1);
            }
            row += 2;
        }
        out
    }
}

fn unit_f64(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn box_muller(rng: &mut ChaCha8Rng) -> (f64, f64) {
    // 1 - U is in (0, 1], keeping the logarithm finite.
    let u1 = 1.0 - unit_f64(rng);
    let u2 = unit_f64(rng);
    let radius = (-2.0 * u1.ln()).sqrt();
    let theta = std::f64::consts::TAU * u2;
    (radius * theta.cos(), radius * theta.sin())
}

/// `n x d` matrix of i.i.d. `N(0, 1/d)` entries.
pub fn gaussian_matrix(rng: &RngSpec, n: usize, d: usize) -> Array2<f64> {
    gaussian_rows(rng, 0..n, d)
}

/// Rows `rows` of the (conceptually unbounded) `N(0, 1/d)` projection with
/// `d` columns. `gaussian_rows(rng, a..b, d)` equals rows `a..b` of
/// `gaussian_matrix(rng, b, d)`.
pub fn gaussian_rows(rng: &RngSpec, rows: Range<usize>, d: usize) -> Array2<f64> {
    let n = rows.len();
    let scale = 1.0 / (d as f64).sqrt();
    let mut out = Array2::zeros((n, d));
    for j in 0..d {
        let col = rng.standard_normal_column(j, rows.clone());
        for (dst, z) in out.column_mut(j).iter_mut().zip(col) {
            *dst = z * scale;
        }
    }
    out
}
