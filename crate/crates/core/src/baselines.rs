//! Reference comparators: regularized two-view CCA. The CKD ablations are
//! configuration presets (`SolverConfig::beta0`, `SolverConfig::kdm_like`).

use nalgebra::DVector;

use crate::error::{CkdError, Result};
use crate::numerics::{self, Matrix};
use crate::solver::{Method, Modality};

/// Default ridge, relative to the mean covariance eigenvalue `tr(C)/d`.
pub const DEFAULT_RIDGE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineModel {
    pub method: Method,
    pub w1: Matrix,
    pub w2: Matrix,
    pub column_means_1: DVector<f64>,
    pub column_means_2: DVector<f64>,
    pub ridge: f64,
    /// Canonical correlations, descending.
    pub correlations: Vec<f64>,
}

impl BaselineModel {
    pub fn projection(&self, m: Modality) -> &Matrix {
        match m {
            Modality::First => &self.w1,
            Modality::Second => &self.w2,
        }
    }

    pub fn project(&self, x: &Matrix, m: Modality) -> Result<Matrix> {
        let means = match m {
            Modality::First => &self.column_means_1,
            Modality::Second => &self.column_means_2,
        };
        Ok(numerics::subtract_row(x, means)? * self.projection(m))
    }
}

/// `C^{-1/2}` of a symmetric positive definite covariance.
fn inverse_sqrt(c: &Matrix, what: &str) -> Result<Matrix> {
    let (vals, vecs) = numerics::sym_eigen(c)?;
    let max = vals.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    let floor = 1e-12 * max.max(f64::MIN_POSITIVE);
    if vals.iter().any(|&l| l <= floor) {
        return Err(CkdError::Numeric(format!(
            "{what} covariance is singular; use a ridge > 0"
        )));
    }
    let scaled = DVector::from_iterator(vals.len(), vals.iter().map(|l| 1.0 / l.sqrt()));
    Ok(&vecs * Matrix::from_diagonal(&scaled) * vecs.transpose())
}

/// Regularized CCA on centered views: top-`d` solutions of
/// `(C11 + r1 I)^-1 C12 (C22 + r2 I)^-1 C21 w = ρ² w`, with `rv = ridge tr(Cvv)/dv`.
pub fn fit_cca(x1: &Matrix, x2: &Matrix, d: usize, ridge: f64) -> Result<BaselineModel> {
    numerics::ensure_finite(x1, "X1")?;
    numerics::ensure_finite(x2, "X2")?;
    let n = x1.nrows();
    if x2.nrows() != n {
        return Err(CkdError::size(format!("row counts differ: {n} vs {}", x2.nrows())));
    }
    if d == 0 || d > x1.ncols().min(x2.ncols()) || n <= d {
        return Err(CkdError::InvalidConfig(format!(
            "CCA needs 1 <= d <= min(d1, d2) and n > d (d={d}, n={n})"
        )));
    }
    if !ridge.is_finite() || ridge < 0.0 {
        return Err(CkdError::InvalidConfig(format!("ridge must be >= 0, got {ridge}")));
    }
    let means1 = numerics::column_means(x1);
    let means2 = numerics::column_means(x2);
    let a = numerics::subtract_row(x1, &means1)?;
    let b = numerics::subtract_row(x2, &means2)?;
    let scale = 1.0 / (n as f64 - 1.0);

    let regularized = |c: Matrix| {
        let dim = c.nrows();
        let r = ridge * c.trace() / dim as f64;
        numerics::symmetrize(&c) + Matrix::identity(dim, dim) * r
    };
    let c11 = regularized(a.transpose() * &a * scale);
    let c22 = regularized(b.transpose() * &b * scale);
    let c12 = a.transpose() * &b * scale;

    let s1 = inverse_sqrt(&c11, "first view")?;
    let s2 = inverse_sqrt(&c22, "second view")?;
    let m = &s1 * c12 * &s2;
    let svd = m.svd(true, true);
    let u = svd.u.ok_or_else(|| CkdError::Numeric("SVD failed".into()))?;
    let v_t = svd.v_t.ok_or_else(|| CkdError::Numeric("SVD failed".into()))?;
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let order = &order[..d];

    let mut u_d = Matrix::zeros(u.nrows(), d);
    let mut v_d = Matrix::zeros(v_t.ncols(), d);
    for (k, &src) in order.iter().enumerate() {
        let mut uc = u.column(src).into_owned();
        let mut vc = v_t.row(src).transpose();
        // sign: largest-magnitude entry of the first-view direction positive
        if uc[uc.iamax()] < 0.0 {
            uc.neg_mut();
            vc.neg_mut();
        }
        u_d.set_column(k, &uc);
        v_d.set_column(k, &vc);
    }
    let correlations = order.iter().map(|&i| svd.singular_values[i]).collect();
    Ok(BaselineModel {
        method: Method::Cca,
        w1: s1 * u_d,
        w2: s2 * v_d,
        column_means_1: means1,
        column_means_2: means2,
        ridge,
        correlations,
    })
}
