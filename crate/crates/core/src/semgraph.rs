//! Shared semantic graph over samples built from their label vectors.

use nalgebra::DVector;

use crate::error::{CkdError, Result};
use crate::numerics::Matrix;

/// Multi-hot `n x c` label matrix. Every row has at least one positive entry.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelMatrix(Matrix);

impl LabelMatrix {
    pub fn new(matrix: Matrix) -> Result<Self> {
        if matrix.nrows() == 0 || matrix.ncols() == 0 {
            return Err(CkdError::size("label matrix is empty"));
        }
        for (i, row) in matrix.row_iter().enumerate() {
            if let Some(v) = row.iter().find(|&&v| v != 0.0 && v != 1.0) {
                return Err(CkdError::Data(format!("label row {i} has non-binary entry {v}")));
            }
            if row.iter().all(|&v| v == 0.0) {
                return Err(CkdError::UnlabeledSample { row: i });
            }
        }
        Ok(Self(matrix))
    }

    /// One-hot labels from class indices.
    pub fn one_hot(classes: &[usize], c: usize) -> Result<Self> {
        let mut m = Matrix::zeros(classes.len(), c);
        for (i, &k) in classes.iter().enumerate() {
            if k >= c {
                return Err(CkdError::Data(format!("class {k} out of range for c={c}")));
            }
            m[(i, k)] = 1.0;
        }
        Self::new(m)
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn n(&self) -> usize {
        self.0.nrows()
    }

    pub fn classes(&self) -> usize {
        self.0.ncols()
    }

    pub fn row(&self, i: usize) -> DVector<f64> {
        self.0.row(i).transpose()
    }

    /// Rows `idx` in the given order.
    pub fn select_rows(&self, idx: &[usize]) -> Self {
        Self(self.0.select_rows(idx))
    }

    /// Positive class indices of row `i`.
    pub fn positives(&self, i: usize) -> Vec<usize> {
        self.0
            .row(i)
            .iter()
            .enumerate()
            .filter_map(|(k, &v)| (v != 0.0).then_some(k))
            .collect()
    }
}

/// `y_i . y_j / (‖y_i‖ ‖y_j‖)`.
pub fn cosine_similarity(yi: &DVector<f64>, yj: &DVector<f64>) -> Result<f64> {
    if yi.len() != yj.len() {
        return Err(CkdError::size(format!("label lengths differ: {} vs {}", yi.len(), yj.len())));
    }
    let (ni, nj) = (yi.norm(), yj.norm());
    if ni == 0.0 || nj == 0.0 {
        return Err(CkdError::Data("zero label vector".into()));
    }
    Ok(yi.dot(yj) / (ni * nj))
}

#[derive(Debug, Clone)]
pub struct SemanticGraph {
    similarity: Matrix,
    laplacian: Matrix,
}

impl SemanticGraph {
    pub fn similarity(&self) -> &Matrix {
        &self.similarity
    }

    pub fn laplacian(&self) -> &Matrix {
        &self.laplacian
    }
}

/// Dense cosine graph `S` and its unnormalized Laplacian `L = diag(S 1) - S`.
pub fn build_graph(y: &LabelMatrix) -> SemanticGraph {
    let n = y.n();
    // normalize rows once, then S = Yn Yn^T filled upper-triangular and mirrored
    let mut yn = y.matrix().clone();
    for mut row in yn.row_iter_mut() {
        let norm = row.norm();
        row /= norm;
    }
    let mut s = Matrix::zeros(n, n);
    for i in 0..n {
        s[(i, i)] = 1.0;
        for j in (i + 1)..n {
            let v = yn.row(i).dot(&yn.row(j)).clamp(0.0, 1.0);
            s[(i, j)] = v;
            s[(j, i)] = v;
        }
    }
    let mut l = -&s;
    for i in 0..n {
        l[(i, i)] += s.row(i).sum();
    }
    SemanticGraph {
        similarity: s,
        laplacian: l,
    }
}
