//! Paired two-modality datasets: CSV + JSON manifest I/O, seeded splits and a
//! synthetic generator.
//!
//! Manifest layout (paths are relative to the manifest's directory):
//!
//! ```json
//! { "x1": "x1.csv", "x2": "x2.csv", "y": "y.csv",
//!   "train_idx": "train_idx.txt", "query_idx": "query_idx.txt", "name": "toy" }
//! ```
//!
//! CSVs have no header, one sample per row. Index files hold one zero-based
//! index per line. With only one index file present the other split is its
//! complement; with neither, every sample is training data.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{CkdError, Result};
use crate::numerics::{self, Matrix};
use crate::semgraph::LabelMatrix;
use crate::solver::Modality;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub train: Vec<usize>,
    pub query: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub x1: Matrix,
    pub x2: Matrix,
    pub y: LabelMatrix,
    pub split: Split,
    pub name: Option<String>,
}

/// Row subset of a dataset for one side of the split.
#[derive(Debug, Clone)]
pub struct Subset {
    pub x1: Matrix,
    pub x2: Matrix,
    pub y: LabelMatrix,
}

impl Subset {
    pub fn features(&self, m: Modality) -> &Matrix {
        match m {
            Modality::First => &self.x1,
            Modality::Second => &self.x2,
        }
    }
}

impl Dataset {
    /// Validates row alignment and the split; every sample starts as training data.
    pub fn new(x1: Matrix, x2: Matrix, y: LabelMatrix) -> Result<Self> {
        numerics::ensure_finite(&x1, "X1")?;
        numerics::ensure_finite(&x2, "X2")?;
        let n = y.n();
        if x1.nrows() != n || x2.nrows() != n {
            return Err(CkdError::Data(format!(
                "rows are not aligned: X1 has {}, X2 has {}, Y has {n}",
                x1.nrows(),
                x2.nrows()
            )));
        }
        Ok(Self {
            x1,
            x2,
            y,
            split: Split {
                train: (0..n).collect(),
                query: Vec::new(),
            },
            name: None,
        })
    }

    pub fn n(&self) -> usize {
        self.y.n()
    }

    pub fn with_split(mut self, split: Split) -> Result<Self> {
        validate_split(&split, self.n())?;
        self.split = split;
        Ok(self)
    }

    pub fn subset(&self, idx: &[usize]) -> Subset {
        Subset {
            x1: self.x1.select_rows(idx),
            x2: self.x2.select_rows(idx),
            y: self.y.select_rows(idx),
        }
    }

    pub fn train(&self) -> Subset {
        self.subset(&self.split.train)
    }

    pub fn query(&self) -> Subset {
        self.subset(&self.split.query)
    }
}

fn validate_split(split: &Split, n: usize) -> Result<()> {
    let mut seen = vec![0u8; n];
    for (which, idx) in [(1u8, &split.train), (2u8, &split.query)] {
        for &i in idx {
            if i >= n {
                return Err(CkdError::Data(format!("split index {i} out of range for n={n}")));
            }
            if seen[i] != 0 {
                return Err(CkdError::Data(format!("sample {i} appears twice in the split")));
            }
            seen[i] = which;
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub x1: PathBuf,
    pub x2: PathBuf,
    pub y: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub train_idx: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub query_idx: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| CkdError::io(path, e))
}

pub fn read_csv_matrix(path: &Path) -> Result<Matrix> {
    let text = read_to_string(path)?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut data = Vec::new();
    let mut cols = None;
    let mut rows = 0usize;
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CkdError::Data(format!("{}: {e}", path.display())))?;
        match cols {
            None => cols = Some(record.len()),
            Some(c) if c != record.len() => {
                return Err(CkdError::Data(format!(
                    "{}: row {i} has {} columns, expected {c}",
                    path.display(),
                    record.len()
                )))
            }
            _ => {}
        }
        for field in record.iter() {
            let v: f64 = field.parse().map_err(|_| {
                CkdError::Data(format!("{}: row {i}: cannot parse '{field}'", path.display()))
            })?;
            if !v.is_finite() {
                return Err(CkdError::Data(format!("{}: row {i}: non-finite value", path.display())));
            }
            data.push(v);
        }
        rows += 1;
    }
    let cols = cols.ok_or_else(|| CkdError::Data(format!("{}: no rows", path.display())))?;
    Ok(Matrix::from_row_slice(rows, cols, &data))
}

/// Writes with 17 significant digits so values parse back exactly.
pub fn write_csv_matrix(path: &Path, m: &Matrix) -> Result<()> {
    let mut out = String::with_capacity(m.nrows() * m.ncols() * 24);
    for row in m.row_iter() {
        let fields: Vec<String> = row.iter().map(|v| format_f64(*v)).collect();
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| CkdError::io(path, e))
}

fn format_f64(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v:.16e}")
    }
}

fn read_indices(path: &Path) -> Result<Vec<usize>> {
    read_to_string(path)?
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(|l| {
            l.parse()
                .map_err(|_| CkdError::Data(format!("{}: bad index '{l}'", path.display())))
        })
        .collect()
}

fn write_indices(path: &Path, idx: &[usize]) -> Result<()> {
    let mut out = String::new();
    for i in idx {
        out.push_str(&i.to_string());
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| CkdError::io(path, e))
}

fn complement(n: usize, idx: &[usize]) -> Vec<usize> {
    let mut mask = vec![true; n];
    for &i in idx {
        if i < n {
            mask[i] = false;
        }
    }
    (0..n).filter(|&i| mask[i]).collect()
}

/// Reads the manifest and the files it names. Features are not centered here.
pub fn load_dataset(manifest_path: &Path) -> Result<Dataset> {
    let text = read_to_string(manifest_path)?;
    let manifest: Manifest = serde_json::from_str(&text)
        .map_err(|e| CkdError::Data(format!("{}: {e}", manifest_path.display())))?;
    let base = manifest_path.parent().unwrap_or(Path::new("."));
    let x1 = read_csv_matrix(&base.join(&manifest.x1))?;
    let x2 = read_csv_matrix(&base.join(&manifest.x2))?;
    let y_raw = read_csv_matrix(&base.join(&manifest.y))?;
    let y = LabelMatrix::new(y_raw)?;
    let mut ds = Dataset::new(x1, x2, y)?;
    ds.name = manifest.name.clone();

    let n = ds.n();
    let train = manifest.train_idx.as_ref().map(|p| read_indices(&base.join(p))).transpose()?;
    let query = manifest.query_idx.as_ref().map(|p| read_indices(&base.join(p))).transpose()?;
    let split = match (train, query) {
        (Some(t), Some(q)) => Split { train: t, query: q },
        (Some(t), None) => Split {
            query: complement(n, &t),
            train: t,
        },
        (None, Some(q)) => Split {
            train: complement(n, &q),
            query: q,
        },
        (None, None) => Split {
            train: (0..n).collect(),
            query: Vec::new(),
        },
    };
    ds.with_split(split)
}

/// Writes `x1.csv`, `x2.csv`, `y.csv`, `query_idx.txt` (when the query split
/// is non-empty) and `manifest.json` into `dir`. Returns the manifest path.
pub fn save_dataset(ds: &Dataset, dir: &Path) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| CkdError::io(dir, e))?;
    write_csv_matrix(&dir.join("x1.csv"), &ds.x1)?;
    write_csv_matrix(&dir.join("x2.csv"), &ds.x2)?;
    write_csv_matrix(&dir.join("y.csv"), ds.y.matrix())?;
    let query_idx = if ds.split.query.is_empty() {
        None
    } else {
        write_indices(&dir.join("query_idx.txt"), &ds.split.query)?;
        Some(PathBuf::from("query_idx.txt"))
    };
    // train is stored implicitly as the complement; keep that invariant honest
    let implied = complement(ds.n(), &ds.split.query);
    let train_idx = if implied == ds.split.train {
        None
    } else {
        write_indices(&dir.join("train_idx.txt"), &ds.split.train)?;
        Some(PathBuf::from("train_idx.txt"))
    };
    let manifest = Manifest {
        x1: "x1.csv".into(),
        x2: "x2.csv".into(),
        y: "y.csv".into(),
        train_idx,
        query_idx,
        name: ds.name.clone(),
    };
    let path = dir.join("manifest.json");
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
    fs::write(&path, json).map_err(|e| CkdError::io(&path, e))?;
    Ok(path)
}

/// Seeded split into training and query samples, stratified by each
/// sample's first positive class. Every class with at least two members
/// lands in both sides when the requested total allows it.
pub fn split(ds: &Dataset, query_fraction: f64, seed: u64) -> Result<Dataset> {
    if !(query_fraction > 0.0 && query_fraction < 1.0) {
        return Err(CkdError::InvalidConfig(format!(
            "query fraction must be in (0, 1), got {query_fraction}"
        )));
    }
    let n = ds.n();
    let target = ((n as f64) * query_fraction).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..n {
        let first = ds.y.positives(i)[0];
        groups.entry(first).or_default().push(i);
    }
    let mut groups: Vec<Vec<usize>> = groups.into_values().collect();
    for g in &mut groups {
        g.shuffle(&mut rng);
    }

    let quotas = allocate(&groups.iter().map(Vec::len).collect::<Vec<_>>(), query_fraction, target);
    let mut query = Vec::with_capacity(target);
    let mut train = Vec::with_capacity(n - target);
    for (g, q) in groups.iter().zip(quotas) {
        query.extend_from_slice(&g[..q]);
        train.extend_from_slice(&g[q..]);
    }
    query.sort_unstable();
    train.sort_unstable();
    ds.clone().with_split(Split { train, query })
}

/// Query counts per group summing to `target`: floors of the proportional
/// share, clamped to `[1, size-1]` for groups of two or more, then adjusted
/// by largest remainder.
fn allocate(sizes: &[usize], fraction: f64, target: usize) -> Vec<usize> {
    let exact: Vec<f64> = sizes.iter().map(|&s| s as f64 * fraction).collect();
    let mut quota: Vec<usize> = sizes
        .iter()
        .zip(&exact)
        .map(|(&s, &e)| {
            let q = e.floor() as usize;
            if s >= 2 {
                q.clamp(1, s - 1)
            } else {
                q
            }
        })
        .collect();
    let lower = |s: usize, strict: bool| if strict && s >= 2 { 1 } else { 0 };
    let upper = |s: usize, strict: bool| if strict && s >= 2 { s - 1 } else { s };

    for strict in [true, false] {
        let mut total: usize = quota.iter().sum();
        while total < target {
            // largest remainder first, ties by group order
            let pick = (0..sizes.len())
                .filter(|&k| quota[k] < upper(sizes[k], strict))
                .max_by(|&a, &b| {
                    (exact[a] - quota[a] as f64)
                        .total_cmp(&(exact[b] - quota[b] as f64))
                        .then(b.cmp(&a))
                });
            match pick {
                Some(k) => {
                    quota[k] += 1;
                    total += 1;
                }
                None => break,
            }
        }
        while total > target {
            let pick = (0..sizes.len())
                .filter(|&k| quota[k] > lower(sizes[k], strict))
                .min_by(|&a, &b| {
                    (exact[a] - quota[a] as f64)
                        .total_cmp(&(exact[b] - quota[b] as f64))
                        .then(a.cmp(&b))
                });
            match pick {
                Some(k) => {
                    quota[k] -= 1;
                    total -= 1;
                }
                None => break,
            }
        }
        if total == target {
            break;
        }
    }
    quota
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthSpec {
    pub n: usize,
    pub d1: usize,
    pub d2: usize,
    pub c: usize,
    pub latent_dim: usize,
    pub noise_sigma: f64,
    /// Inclusive range of class count per sample.
    pub labels_min: usize,
    pub labels_max: usize,
    /// Spread of samples around their class-prototype mean.
    pub jitter: f64,
    /// Scale of the class prototypes in the latent space.
    pub separation: f64,
    pub query_fraction: f64,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            n: 200,
            d1: 30,
            d2: 20,
            c: 5,
            latent_dim: 10,
            noise_sigma: 0.0,
            labels_min: 1,
            labels_max: 1,
            jitter: 0.1,
            separation: 3.0,
            query_fraction: 0.3,
            seed: 0,
        }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(CkdError::InvalidConfig(m));
        if self.n < 2 || self.c == 0 || self.d1 == 0 || self.d2 == 0 || self.latent_dim == 0 {
            return bad(format!(
                "n >= 2 and c, d1, d2, latent_dim >= 1 required (n={}, c={}, d1={}, d2={}, latent={})",
                self.n, self.c, self.d1, self.d2, self.latent_dim
            ));
        }
        if self.latent_dim > self.d1.min(self.d2) {
            return bad(format!(
                "latent_dim {} exceeds min(d1, d2) = {}",
                self.latent_dim,
                self.d1.min(self.d2)
            ));
        }
        if self.labels_min == 0 || self.labels_min > self.labels_max || self.labels_max > self.c {
            return bad(format!(
                "labels per sample must satisfy 1 <= min <= max <= c, got {}..={} with c={}",
                self.labels_min, self.labels_max, self.c
            ));
        }
        for (name, v) in [("noise_sigma", self.noise_sigma), ("jitter", self.jitter), ("separation", self.separation)] {
            if !v.is_finite() || v < 0.0 {
                return bad(format!("{name} must be finite and >= 0, got {v}"));
            }
        }
        if !(self.query_fraction >= 0.0 && self.query_fraction < 1.0) {
            return bad(format!("query_fraction must be in [0, 1), got {}", self.query_fraction));
        }
        Ok(())
    }
}

/// Class prototypes in a latent space, mapped into both modalities by fixed
/// random linear maps. Each sample's latent code is the mean of its classes'
/// prototypes plus jitter; each modality adds its own Gaussian noise.
pub fn synth(spec: &SynthSpec) -> Result<Dataset> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let gauss = |rng: &mut ChaCha8Rng| -> f64 { StandardNormal.sample(rng) };

    let prototypes = Matrix::from_fn(spec.c, spec.latent_dim, |_, _| spec.separation * gauss(&mut rng));
    let map1 = Matrix::from_fn(spec.latent_dim, spec.d1, |_, _| gauss(&mut rng));
    let map2 = Matrix::from_fn(spec.latent_dim, spec.d2, |_, _| gauss(&mut rng));

    let mut y = Matrix::zeros(spec.n, spec.c);
    let mut latent = Matrix::zeros(spec.n, spec.latent_dim);
    let classes: Vec<usize> = (0..spec.c).collect();
    for i in 0..spec.n {
        let count = rng.random_range(spec.labels_min..=spec.labels_max);
        // first class cycles so every class is populated
        let mut chosen = vec![i % spec.c];
        let mut rest: Vec<usize> = classes.iter().copied().filter(|&k| k != i % spec.c).collect();
        rest.shuffle(&mut rng);
        chosen.extend(rest.into_iter().take(count - 1));
        for &k in &chosen {
            y[(i, k)] = 1.0;
        }
        for j in 0..spec.latent_dim {
            let mean = chosen.iter().map(|&k| prototypes[(k, j)]).sum::<f64>() / chosen.len() as f64;
            latent[(i, j)] = mean + spec.jitter * gauss(&mut rng);
        }
    }

    let noisy = |clean: Matrix, rng: &mut ChaCha8Rng| -> Result<Matrix> {
        if spec.noise_sigma == 0.0 {
            return Ok(clean);
        }
        let normal = Normal::new(0.0, spec.noise_sigma)
            .map_err(|e| CkdError::InvalidConfig(format!("noise_sigma: {e}")))?;
        Ok(clean.map(|v| v + normal.sample(rng)))
    };
    let x1 = noisy(&latent * &map1, &mut rng)?;
    let x2 = noisy(&latent * &map2, &mut rng)?;

    let labels = LabelMatrix::new(y)?;
    let mut ds = Dataset::new(x1, x2, labels)?;
    ds.name = Some(format!("synth-n{}-c{}-seed{}", spec.n, spec.c, spec.seed));
    if spec.query_fraction > 0.0 {
        ds = split(&ds, spec.query_fraction, spec.seed.wrapping_add(1))?;
    }
    Ok(ds)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(n: usize, classes: &[usize], c: usize) -> Dataset {
        let x = Matrix::from_fn(n, 2, |i, j| (i + j) as f64);
        Dataset::new(x.clone(), x, LabelMatrix::one_hot(classes, c).unwrap()).unwrap()
    }

    #[test]
    fn split_counts() {
        let ds = small(10, &[0, 0, 0, 0, 0, 1, 1, 1, 1, 1], 2);
        let s = split(&ds, 0.4, 3).unwrap();
        assert_eq!(s.split.query.len(), 4);
        assert_eq!(s.split.train.len(), 6);
        assert_eq!(split(&ds, 0.4, 3).unwrap().split, s.split);
    }

    #[test]
    fn split_two_member_class_on_both_sides() {
        let ds = small(8, &[0, 0, 1, 1, 1, 1, 1, 1], 2);
        for seed in 0..20 {
            let s = split(&ds, 0.25, seed).unwrap();
            let in_query = s.split.query.iter().filter(|&&i| i < 2).count();
            assert_eq!(in_query, 1, "seed {seed}");
        }
    }

    #[test]
    fn split_fraction_range() {
        let ds = small(4, &[0, 1, 0, 1], 2);
        assert!(split(&ds, 0.0, 1).is_err());
        assert!(split(&ds, 1.0, 1).is_err());
    }

    #[test]
    fn synth_one_hot_and_deterministic() {
        let spec = SynthSpec {
            n: 40,
            ..SynthSpec::default()
        };
        let a = synth(&spec).unwrap();
        let b = synth(&spec).unwrap();
        assert_eq!(a, b);
        for row in a.y.matrix().row_iter() {
            assert_eq!(row.sum(), 1.0);
        }
    }

    #[test]
    fn synth_multi_label() {
        let spec = SynthSpec {
            n: 30,
            labels_min: 1,
            labels_max: 3,
            ..SynthSpec::default()
        };
        let ds = synth(&spec).unwrap();
        assert!(ds.y.matrix().row_iter().all(|r| (1.0..=3.0).contains(&r.sum())));
    }

    #[test]
    fn synth_infeasible() {
        let spec = SynthSpec {
            latent_dim: 40,
            d2: 20,
            ..SynthSpec::default()
        };
        assert!(matches!(synth(&spec), Err(CkdError::InvalidConfig(_))));
    }

    #[test]
    fn misaligned_rows() {
        let x1 = Matrix::zeros(5, 2);
        let x2 = Matrix::zeros(4, 2);
        let y = LabelMatrix::one_hot(&[0, 1, 0, 1], 2).unwrap();
        assert!(matches!(Dataset::new(x1, x2, y), Err(CkdError::Data(_))));
    }
}
