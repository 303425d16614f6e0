#![allow(dead_code)]

use ckd::numerics::Matrix;
use ckd::semgraph::LabelMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

pub fn random_symmetric(n: usize, rng: &mut ChaCha8Rng) -> Matrix {
    let a = gaussian(n, n, rng);
    (&a + a.transpose()) * 0.5
}

pub fn random_orthonormal(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Matrix {
    gaussian(rows, cols, rng).qr().q().columns(0, cols).into_owned()
}

/// Multi-hot labels with 1..=max_labels classes per row.
pub fn random_labels(n: usize, c: usize, max_labels: usize, rng: &mut ChaCha8Rng) -> LabelMatrix {
    let mut y = Matrix::zeros(n, c);
    for i in 0..n {
        let k = rng.random_range(1..=max_labels.min(c));
        for _ in 0..k {
            y[(i, rng.random_range(0..c))] = 1.0;
        }
    }
    LabelMatrix::new(y).unwrap()
}

/// Dense `n x n` centering matrix built entry by entry.
pub fn dense_h(n: usize) -> Matrix {
    Matrix::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 } - 1.0 / n as f64)
}

/// `Σ_ij A_ij B_ji`.
pub fn trace_of_product(a: &Matrix, b: &Matrix) -> f64 {
    let mut s = 0.0;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            s += a[(i, j)] * b[(j, i)];
        }
    }
    s
}

/// Brute-force `tr(H A H B)` from explicit matrix chains.
pub fn raw_hsic_oracle(a: &Matrix, b: &Matrix) -> f64 {
    let h = dense_h(a.nrows());
    trace_of_product(&(&h * a * &h), b)
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}
