//! Binary model container shared by CKD models and the CCA baseline.
//!
//! All integers and floats are little-endian; floats are raw IEEE-754 bits so
//! a round trip is bit-exact.
//!
//! ```text
//! offset  size  field
//! 0       8     magic "CKDMODEL"
//! 8       4     format version (u32) = 1
//! 12      1     method tag: 0 CKD, 1 CKD(beta=0), 2 KDM-like, 3 CCA
//! 13      1     init tag: 0 supervised, 1 random (0 for CCA)
//! 14      1     align flag: 1 if the bases were aligned after training
//! 15      1     reserved, zero
//! 16      64    f64 x 8: alpha1 alpha2 lambda1 lambda2 beta rel_tol row_norm_eps ridge
//! 80      24    u64 x 3: d max_iters seed
//! 104     ..    matrix P1, matrix P2     (u64 rows, u64 cols, rows*cols f64 row-major)
//! ..      ..    vector means1, means2,   (u64 len, len f64)
//!               vector correlations      (empty for CKD models)
//! ```
//!
//! For CCA the solver fields other than `d` are written as zero.

use std::fs;
use std::path::Path;

use nalgebra::DVector;

use crate::baselines::BaselineModel;
use crate::error::{CkdError, Result};
use crate::numerics::Matrix;
use crate::solver::{Init, Method, ModelParams, Modality, SolverConfig};

pub const MAGIC: &[u8; 8] = b"CKDMODEL";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub enum SavedModel {
    Ckd(ModelParams),
    Cca(BaselineModel),
}

impl SavedModel {
    pub fn method(&self) -> Method {
        match self {
            SavedModel::Ckd(p) => p.method,
            SavedModel::Cca(b) => b.method,
        }
    }

    pub fn projection(&self, m: Modality) -> &Matrix {
        match self {
            SavedModel::Ckd(p) => p.projection(m),
            SavedModel::Cca(b) => b.projection(m),
        }
    }

    /// Feature dimension of each modality and the subspace dimension.
    pub fn dims(&self) -> (usize, usize, usize) {
        let p1 = self.projection(Modality::First);
        let p2 = self.projection(Modality::Second);
        (p1.nrows(), p2.nrows(), p1.ncols())
    }

    pub fn project(&self, x: &Matrix, m: Modality) -> Result<Matrix> {
        match self {
            SavedModel::Ckd(p) => p.project(x, m),
            SavedModel::Cca(b) => b.project(x, m),
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer(Vec::new());
        w.0.extend_from_slice(MAGIC);
        w.u32(FORMAT_VERSION);
        w.0.push(self.method().tag());
        match self {
            SavedModel::Ckd(p) => {
                let c = &p.config;
                w.0.push(c.init.tag());
                w.0.extend_from_slice(&[c.align as u8, 0]);
                for v in [c.alpha1, c.alpha2, c.lambda1, c.lambda2, c.beta, c.rel_tol, c.row_norm_eps, 0.0] {
                    w.f64(v);
                }
                for v in [c.d as u64, c.max_iters as u64, c.seed] {
                    w.u64(v);
                }
                w.matrix(&p.p1);
                w.matrix(&p.p2);
                w.vector(p.column_means_1.as_slice());
                w.vector(p.column_means_2.as_slice());
                w.vector(&[]);
            }
            SavedModel::Cca(b) => {
                w.0.extend_from_slice(&[0, 0, 0]);
                for _ in 0..7 {
                    w.f64(0.0);
                }
                w.f64(b.ridge);
                for v in [b.w1.ncols() as u64, 0, 0] {
                    w.u64(v);
                }
                w.matrix(&b.w1);
                w.matrix(&b.w2);
                w.vector(b.column_means_1.as_slice());
                w.vector(b.column_means_2.as_slice());
                w.vector(&b.correlations);
            }
        }
        w.0
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(8)? != MAGIC {
            return Err(CkdError::Format("not a model file (bad magic)".into()));
        }
        let version = r.u32()?;
        if version != FORMAT_VERSION {
            return Err(CkdError::Format(format!("unsupported format version {version}")));
        }
        let head = r.take(4)?;
        let method = Method::from_tag(head[0])
            .ok_or_else(|| CkdError::Format(format!("unknown method tag {}", head[0])))?;
        let init = Init::from_tag(head[1])
            .ok_or_else(|| CkdError::Format(format!("unknown init tag {}", head[1])))?;
        let align = match head[2] {
            0 => false,
            1 => true,
            other => return Err(CkdError::Format(format!("bad align flag {other}"))),
        };
        let mut f = [0.0; 8];
        for v in &mut f {
            *v = r.f64()?;
        }
        let d = r.u64()? as usize;
        let max_iters = r.u64()? as usize;
        let seed = r.u64()?;
        let p1 = r.matrix()?;
        let p2 = r.matrix()?;
        let means1 = DVector::from_vec(r.vector()?);
        let means2 = DVector::from_vec(r.vector()?);
        let correlations = r.vector()?;
        if r.pos != bytes.len() {
            return Err(CkdError::Format(format!("{} trailing bytes", bytes.len() - r.pos)));
        }
        if p1.ncols() != d || p2.ncols() != d || means1.len() != p1.nrows() || means2.len() != p2.nrows() {
            return Err(CkdError::Format("inconsistent shapes in model file".into()));
        }
        Ok(match method {
            Method::Cca => SavedModel::Cca(BaselineModel {
                method,
                w1: p1,
                w2: p2,
                column_means_1: means1,
                column_means_2: means2,
                ridge: f[7],
                correlations,
            }),
            _ => SavedModel::Ckd(ModelParams {
                method,
                p1,
                p2,
                column_means_1: means1,
                column_means_2: means2,
                config: SolverConfig {
                    d,
                    alpha1: f[0],
                    alpha2: f[1],
                    lambda1: f[2],
                    lambda2: f[3],
                    beta: f[4],
                    max_iters,
                    rel_tol: f[5],
                    row_norm_eps: f[6],
                    seed,
                    init,
                    align,
                },
            }),
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_bytes()).map_err(|e| CkdError::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| CkdError::io(path, e))?;
        Self::from_bytes(&bytes)
    }
}

struct Writer(Vec<u8>);

impl Writer {
    fn u32(&mut self, v: u32) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }

    fn u64(&mut self, v: u64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }

    fn f64(&mut self, v: f64) {
        self.0.extend_from_slice(&v.to_bits().to_le_bytes());
    }

    fn matrix(&mut self, m: &Matrix) {
        self.u64(m.nrows() as u64);
        self.u64(m.ncols() as u64);
        for row in m.row_iter() {
            for &v in row.iter() {
                self.f64(v);
            }
        }
    }

    fn vector(&mut self, v: &[f64]) {
        self.u64(v.len() as u64);
        for &x in v {
            self.f64(x);
        }
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, k: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(k)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| CkdError::Format(format!("truncated model file at byte {}", self.pos)))?;
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_bits(self.u64()?))
    }

    fn len(&mut self) -> Result<usize> {
        let n = self.u64()?;
        // every element needs 8 bytes; reject lengths the file cannot hold
        if n > ((self.bytes.len() - self.pos) / 8) as u64 {
            return Err(CkdError::Format(format!("length {n} exceeds file size")));
        }
        Ok(n as usize)
    }

    fn matrix(&mut self) -> Result<Matrix> {
        let rows = self.u64()? as usize;
        let cols = self.u64()? as usize;
        let count = rows
            .checked_mul(cols)
            .filter(|&c| c <= (self.bytes.len() - self.pos) / 8)
            .ok_or_else(|| CkdError::Format(format!("matrix {rows}x{cols} exceeds file size")))?;
        let mut data = Vec::with_capacity(count);
        for _ in 0..count {
            data.push(self.f64()?);
        }
        Ok(Matrix::from_row_slice(rows, cols, &data))
    }

    fn vector(&mut self) -> Result<Vec<f64>> {
        let n = self.len()?;
        (0..n).map(|_| self.f64()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> SavedModel {
        SavedModel::Ckd(ModelParams {
            method: Method::KdmLike,
            p1: Matrix::from_row_slice(3, 2, &[0.1, -0.0, 1.0 / 3.0, 2.0, f64::MIN_POSITIVE, 7.5]),
            p2: Matrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]),
            column_means_1: DVector::from_vec(vec![0.5, -1.25, 3.0]),
            column_means_2: DVector::from_vec(vec![1e-300, 2.0]),
            config: SolverConfig {
                d: 2,
                seed: 99,
                init: Init::Random,
                ..SolverConfig::default()
            },
        })
    }

    #[test]
    fn roundtrip_bit_exact() {
        let m = sample();
        let bytes = m.to_bytes();
        let back = SavedModel::from_bytes(&bytes).unwrap();
        assert_eq!(back.to_bytes(), bytes);
        if let (SavedModel::Ckd(a), SavedModel::Ckd(b)) = (&m, &back) {
            assert_eq!(a.p1[(0, 1)].to_bits(), b.p1[(0, 1)].to_bits());
        }
    }

    #[test]
    fn header_layout() {
        let bytes = sample().to_bytes();
        assert_eq!(&bytes[..8], MAGIC);
        assert_eq!(u32::from_le_bytes(bytes[8..12].try_into().unwrap()), 1);
        assert_eq!(bytes[12], Method::KdmLike.tag());
        assert_eq!(u64::from_le_bytes(bytes[80..88].try_into().unwrap()), 2);
        assert_eq!(u64::from_le_bytes(bytes[104..112].try_into().unwrap()), 3);
    }

    #[test]
    fn rejects_corruption() {
        let bytes = sample().to_bytes();
        assert!(SavedModel::from_bytes(&bytes[..bytes.len() - 1]).is_err());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(SavedModel::from_bytes(&bad).is_err());
        let mut extra = bytes;
        extra.push(0);
        assert!(SavedModel::from_bytes(&extra).is_err());
    }
}
