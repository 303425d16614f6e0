//! Empirical Hilbert-Schmidt Independence Criterion between two kernels.
//!
//! Two entry points: [`hsic`] carries the `(n-1)^-2` normalization, while
//! [`hsic_trace`] is the raw `tr(H Kx H Kz)` that enters the training
//! objective. They are kept apart so objective bookkeeping never mixes them.

use crate::error::{CkdError, Result};
use crate::numerics::{self, Matrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKind {
    LinearGram,
    LabelGram,
}

#[derive(Debug, Clone)]
pub struct KernelMatrix {
    matrix: Matrix,
    kind: KernelKind,
}

impl KernelMatrix {
    /// Wraps a square symmetric matrix. Symmetry is checked to 1e-10
    /// relative to the largest entry.
    pub fn new(matrix: Matrix, kind: KernelKind) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(CkdError::size(format!(
                "kernel must be square, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        numerics::ensure_finite(&matrix, "kernel")?;
        let scale = matrix.amax().max(1.0);
        if (&matrix - matrix.transpose()).amax() > numerics::TOL * scale {
            return Err(CkdError::Numeric("kernel is not symmetric".into()));
        }
        Ok(Self { matrix, kind })
    }

    /// Linear kernel `V V^T` of projected features.
    pub fn linear(v: &Matrix) -> Self {
        Self {
            matrix: numerics::gram(v),
            kind: KernelKind::LinearGram,
        }
    }

    /// Label kernel `Y Y^T`.
    pub fn labels(y: &Matrix) -> Self {
        Self {
            matrix: numerics::gram(y),
            kind: KernelKind::LabelGram,
        }
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn kind(&self) -> KernelKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }
}

/// `H K H`, computed by subtracting row and column means.
pub fn double_center(k: &Matrix) -> Matrix {
    let n = k.nrows() as f64;
    let row_means: Vec<f64> = k.row_iter().map(|r| r.sum() / n).collect();
    let col_means: Vec<f64> = k.column_iter().map(|c| c.sum() / n).collect();
    let grand = row_means.iter().sum::<f64>() / n;
    Matrix::from_fn(k.nrows(), k.ncols(), |i, j| {
        k[(i, j)] - row_means[i] - col_means[j] + grand
    })
}

fn check_pair(kx: &KernelMatrix, kz: &KernelMatrix) -> Result<usize> {
    let n = kx.n();
    if kz.n() != n {
        return Err(CkdError::size(format!("kernel sizes differ: {n} vs {}", kz.n())));
    }
    if n < 2 {
        return Err(CkdError::size(format!("hsic needs n >= 2, got {n}")));
    }
    Ok(n)
}

/// `tr(H Kx H Kz)` with no normalization.
pub fn hsic_trace(kx: &KernelMatrix, kz: &KernelMatrix) -> Result<f64> {
    check_pair(kx, kz)?;
    // tr(HKxH · Kz) = sum_ij (HKxH)_ij (Kz)_ji, and Kz is symmetric
    let centered = double_center(kx.matrix());
    Ok(numerics::frobenius_inner(&centered, kz.matrix()))
}

/// `(n-1)^-2 tr(Kx H Kz H)`.
pub fn hsic(kx: &KernelMatrix, kz: &KernelMatrix) -> Result<f64> {
    let n = check_pair(kx, kz)?;
    let denom = ((n - 1) as f64).powi(2);
    Ok(hsic_trace(kx, kz)? / denom)
}
