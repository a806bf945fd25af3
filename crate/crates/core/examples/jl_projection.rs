//! Gaussian projections roughly preserve squared norms. Measure how often
//! a unit vector's norm moves by more than eps, next to the textbook
//! tail bound 2 exp(-(eps^2 - eps^3) d / 4).
//!
//! cargo run --release --example jl_projection

use ndarray::Array1;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use netproj::embed::{gaussian_matrix, RngSpec};

fn main() {
    let (n, trials, eps) = (500, 400, 0.3f64);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    println!("{:>5} {:>10} {:>10}", "d", "observed", "bound");
    for d in [16, 32, 64, 128, 256] {
        let mut failures = 0;
        for t in 0..trials {
            let mut x: Array1<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
            x /= x.dot(&x).sqrt();
            let y = x.dot(&gaussian_matrix(&RngSpec::new(t), n, d));
            if (y.dot(&y) - 1.0).abs() > eps {
                failures += 1;
            }
        }
        let bound = (2.0 * (-(eps * eps - eps.powi(3)) * d as f64 / 4.0).exp()).min(1.0);
        println!("{d:>5} {:>10.4} {bound:>10.4}", failures as f64 / trials as f64);
    }
}
