//! Dense symmetric linear-algebra primitives shared by the rest of the crate.
//!
//! Everything here is a pure function of its inputs. Matrices are plain
//! `nalgebra::DMatrix<f64>`; finiteness is checked at the entry points that
//! accept external data (`ensure_finite`).

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{CkdError, Result};

pub type Matrix = DMatrix<f64>;

/// Default absolute tolerance used across the crate.
pub const TOL: f64 = 1e-10;

/// Rejects empty matrices and any NaN/Inf entry.
pub fn ensure_finite(m: &Matrix, what: &str) -> Result<()> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Err(CkdError::size(format!("{what} is empty ({}x{})", m.nrows(), m.ncols())));
    }
    if let Some(pos) = m.iter().position(|v| !v.is_finite()) {
        // column-major storage
        let (r, c) = (pos % m.nrows(), pos / m.nrows());
        return Err(CkdError::Numeric(format!("{what} has a non-finite entry at ({r}, {c})")));
    }
    Ok(())
}

/// `H = I - (1/n) 1 1^T`.
pub fn centering_matrix(n: usize) -> Result<Matrix> {
    if n < 2 {
        return Err(CkdError::size(format!("centering matrix needs n >= 2, got {n}")));
    }
    let off = 1.0 / n as f64;
    Ok(Matrix::from_fn(n, n, |i, j| if i == j { 1.0 - off } else { -off }))
}

/// `V * V^T`.
pub fn gram(v: &Matrix) -> Matrix {
    let g = v * v.transpose();
    symmetrize(&g)
}

pub fn symmetrize(q: &Matrix) -> Matrix {
    (q + q.transpose()) * 0.5
}

/// Column means of `x`.
pub fn column_means(x: &Matrix) -> DVector<f64> {
    let n = x.nrows() as f64;
    DVector::from_iterator(x.ncols(), x.column_iter().map(|c| c.sum() / n))
}

/// Subtracts `means` from every row of `x`.
pub fn subtract_row(x: &Matrix, means: &DVector<f64>) -> Result<Matrix> {
    if x.ncols() != means.len() {
        return Err(CkdError::size(format!(
            "expected {} columns, got {}",
            means.len(),
            x.ncols()
        )));
    }
    let mut out = x.clone();
    for (j, mut col) in out.column_iter_mut().enumerate() {
        col.add_scalar_mut(-means[j]);
    }
    Ok(out)
}

/// `X` minus its column-mean broadcast, i.e. `H X`.
pub fn zero_center_columns(x: &Matrix) -> Matrix {
    let means = column_means(x);
    subtract_row(x, &means).expect("means computed from x")
}

/// Full symmetric eigendecomposition, eigenvalues sorted descending and
/// eigenvector signs fixed so the largest-magnitude entry of each column is
/// positive (first such entry on ties).
///
/// Within a repeated eigenvalue the basis is only defined up to rotation; the
/// ordering there is whatever the underlying solver produced, made stable by
/// the sort.
pub fn sym_eigen(q: &Matrix) -> Result<(DVector<f64>, Matrix)> {
    if q.nrows() != q.ncols() {
        return Err(CkdError::size(format!("eigen input must be square, got {}x{}", q.nrows(), q.ncols())));
    }
    ensure_finite(q, "eigen input")?;
    let sym = symmetrize(q);
    let eig = SymmetricEigen::new(sym);
    let n = q.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

    let values = DVector::from_iterator(n, order.iter().map(|&k| eig.eigenvalues[k]));
    let mut vectors = Matrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = eig.eigenvectors.column(src).into_owned();
        fix_sign(&mut col);
        vectors.set_column(dst, &col);
    }
    if !values.iter().all(|v| v.is_finite()) || !vectors.iter().all(|v| v.is_finite()) {
        return Err(CkdError::Numeric("eigendecomposition produced non-finite output".into()));
    }
    Ok((values, vectors))
}

fn fix_sign(col: &mut DVector<f64>) {
    let mut best = 0usize;
    let mut best_abs = -1.0;
    for (i, v) in col.iter().enumerate() {
        if v.abs() > best_abs {
            best_abs = v.abs();
            best = i;
        }
    }
    if col[best] < 0.0 {
        col.neg_mut();
    }
}

/// Orthonormal eigenvectors of `q` for its `d` algebraically largest
/// eigenvalues, returned with those eigenvalues (descending).
pub fn top_d_eigen(q: &Matrix, d: usize) -> Result<(DVector<f64>, Matrix)> {
    if d == 0 || d > q.nrows() {
        return Err(CkdError::size(format!("requested {d} eigenvectors of a {}x{} matrix", q.nrows(), q.ncols())));
    }
    let (values, vectors) = sym_eigen(q)?;
    Ok((values.rows(0, d).into_owned(), vectors.columns(0, d).into_owned()))
}

pub fn top_d_eigvecs(q: &Matrix, d: usize) -> Result<Matrix> {
    top_d_eigen(q, d).map(|(_, v)| v)
}

/// `‖P^T P - I‖_F`.
pub fn orthonormality_residual(p: &Matrix) -> f64 {
    let ptp = p.transpose() * p;
    (ptp - Matrix::identity(p.ncols(), p.ncols())).norm()
}

/// Euclidean norms of the rows of `p`.
pub fn row_norms(p: &Matrix) -> Vec<f64> {
    p.row_iter().map(|r| r.norm()).collect()
}

/// `‖P‖_{2,1}`: sum of row norms.
pub fn l21_norm(p: &Matrix) -> f64 {
    row_norms(p).iter().sum()
}

/// `tr(A^T B)` without forming the product.
pub fn frobenius_inner(a: &Matrix, b: &Matrix) -> f64 {
    a.component_mul(b).sum()
}
