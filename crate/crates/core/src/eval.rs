//! Retrieval evaluation: similarity ranking, average precision, MAP and CMC.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::data::Subset;
use crate::error::{CkdError, Result};
use crate::numerics::Matrix;
use crate::semgraph::LabelMatrix;
use crate::solver::Modality;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Candidate list sizes reported by default.
pub const DEFAULT_CMC_DEPTHS: [usize; 6] = [5, 10, 15, 20, 25, 30];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Task {
    /// Image (first modality) queries against the text database.
    I2T,
    /// Text (second modality) queries against the image database.
    T2I,
}

impl Task {
    /// Modality of the queries; the database uses the other one.
    pub fn query_modality(self) -> Modality {
        match self {
            Task::I2T => Modality::First,
            Task::T2I => Modality::Second,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Task::I2T => "I2T",
            Task::T2I => "T2I",
        }
    }
}

impl std::str::FromStr for Task {
    type Err = CkdError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "i2t" => Ok(Task::I2T),
            "t2i" => Ok(Task::T2I),
            other => Err(CkdError::InvalidConfig(format!("unknown task '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Similarity {
    /// Mean-centered cosine.
    #[default]
    Nc,
    Cosine,
}

impl std::str::FromStr for Similarity {
    type Err = CkdError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "nc" => Ok(Similarity::Nc),
            "cosine" => Ok(Similarity::Cosine),
            other => Err(CkdError::InvalidConfig(format!("unknown similarity '{other}'"))),
        }
    }
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    (dot / (na * nb)).clamp(-1.0, 1.0)
}

fn center(a: &[f64]) -> Vec<f64> {
    let mean = a.iter().sum::<f64>() / a.len() as f64;
    a.iter().map(|x| x - mean).collect()
}

/// Normalized correlation: each vector centered by its own mean, then
/// cosine. Defined as 0 when either centered vector is zero.
pub fn nc_similarity(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "nc_similarity on vectors of different length");
    cosine(&center(a), &center(b))
}

pub fn similarity(kind: Similarity, a: &[f64], b: &[f64]) -> f64 {
    match kind {
        Similarity::Nc => nc_similarity(a, b),
        Similarity::Cosine => {
            assert_eq!(a.len(), b.len(), "cosine on vectors of different length");
            cosine(a, b)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedList {
    pub query: usize,
    /// Database indices by descending score.
    pub indices: Vec<usize>,
    pub scores: Vec<f64>,
}

/// Orders database items by descending score, ties by ascending index.
pub fn rank_scores(query: usize, scores: &[f64]) -> RankedList {
    let mut indices: Vec<usize> = (0..scores.len()).collect();
    indices.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    let sorted = indices.iter().map(|&i| scores[i]).collect();
    RankedList {
        query,
        indices,
        scores: sorted,
    }
}

fn rows(m: &Matrix) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

/// Ranks every database row against each query row.
pub fn rank(queries: &Matrix, database: &Matrix, kind: Similarity) -> Result<Vec<RankedList>> {
    if queries.ncols() != database.ncols() {
        return Err(CkdError::size(format!(
            "query dim {} != database dim {}",
            queries.ncols(),
            database.ncols()
        )));
    }
    let db = rows(database);
    let qs = rows(queries);
    let one = |(qi, q): (usize, &Vec<f64>)| {
        let scores: Vec<f64> = db.iter().map(|row| similarity(kind, q, row)).collect();
        rank_scores(qi, &scores)
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        Ok(qs.par_iter().enumerate().map(one).collect())
    }
    #[cfg(not(feature = "parallel"))]
    {
        Ok(qs.iter().enumerate().map(one).collect())
    }
}

/// Relevant iff the label sets share at least one class.
pub fn relevance(query_labels: &[f64], db_labels: &[f64]) -> bool {
    query_labels
        .iter()
        .zip(db_labels)
        .any(|(&a, &b)| a != 0.0 && b != 0.0)
}

/// Binary relevance of each ranked item to its query.
pub fn ranked_relevance(list: &RankedList, query_labels: &LabelMatrix, db_labels: &LabelMatrix) -> Vec<bool> {
    let q: Vec<f64> = query_labels.matrix().row(list.query).iter().copied().collect();
    list.indices
        .iter()
        .map(|&i| {
            let d: Vec<f64> = db_labels.matrix().row(i).iter().copied().collect();
            relevance(&q, &d)
        })
        .collect()
}

/// `(1/l) Σ_{m<=R} Precision@m · δ(m)` where `l` counts relevant items in
/// the top `R`. Zero when there are none. `R` is clamped to the list length.
pub fn average_precision(relevant: &[bool], depth: usize) -> f64 {
    let depth = depth.min(relevant.len());
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (m, &rel) in relevant[..depth].iter().enumerate() {
        if rel {
            hits += 1;
            sum += hits as f64 / (m + 1) as f64;
        }
    }
    if hits == 0 {
        0.0
    } else {
        sum / hits as f64
    }
}

pub fn map_score(lists: &[Vec<bool>], depth: usize) -> Result<f64> {
    if lists.is_empty() {
        return Err(CkdError::Data("MAP over an empty query set".into()));
    }
    Ok(lists.iter().map(|l| average_precision(l, depth)).sum::<f64>() / lists.len() as f64)
}

/// Fraction of queries with a relevant item in the top `m`, for each `m`.
/// Depths beyond a list's length are clamped to it.
pub fn cmc_curve(lists: &[Vec<bool>], depths: &[usize]) -> Result<BTreeMap<usize, f64>> {
    if lists.is_empty() {
        return Err(CkdError::Data("CMC over an empty query set".into()));
    }
    if depths.contains(&0) {
        return Err(CkdError::InvalidConfig("CMC depth must be >= 1".into()));
    }
    let first_hits: Vec<Option<usize>> = lists.iter().map(|l| l.iter().position(|&r| r)).collect();
    let mut curve = BTreeMap::new();
    for &m in depths {
        let matched = first_hits
            .iter()
            .zip(lists)
            .filter(|(hit, l)| matches!(hit, Some(p) if *p < m.min(l.len())))
            .count();
        curve.insert(m, matched as f64 / lists.len() as f64);
    }
    Ok(curve)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetrievalReport {
    pub schema_version: u32,
    pub task: Task,
    /// Evaluation depth.
    pub r: usize,
    pub map: f64,
    pub aps: Vec<f64>,
    pub cmc: BTreeMap<usize, f64>,
}

impl RetrievalReport {
    pub fn from_relevance(task: Task, lists: &[Vec<bool>], depth: usize, cmc_depths: &[usize]) -> Result<Self> {
        let aps: Vec<f64> = lists.iter().map(|l| average_precision(l, depth)).collect();
        let map = map_score(lists, depth)?;
        Ok(Self {
            schema_version: REPORT_SCHEMA_VERSION,
            task,
            r: depth,
            map,
            aps,
            cmc: cmc_curve(lists, cmc_depths)?,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn cmc_csv(&self) -> String {
        let mut out = String::from("m,rate\n");
        for (m, rate) in &self.cmc {
            out.push_str(&format!("{m},{rate}\n"));
        }
        out
    }

    /// Aligned-column summary for terminals.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "{:<6}{:>8}{:>10}\n{:<6}{:>8}{:>10.4}\n",
            "task", "R", "MAP", self.task.as_str(), self.r, self.map
        );
        out.push_str(&format!("{:<6}{:>8}\n", "", "CMC@m"));
        for (m, rate) in &self.cmc {
            out.push_str(&format!("{:<6}{:>8}{:>10.4}\n", "", m, rate));
        }
        out
    }
}

/// Ranks projected queries against a projected database and scores the
/// result. `depth = None` evaluates the full database.
#[allow(clippy::too_many_arguments)]
pub fn evaluate(
    task: Task,
    query_features: &Matrix,
    query_labels: &LabelMatrix,
    db_features: &Matrix,
    db_labels: &LabelMatrix,
    depth: Option<usize>,
    cmc_depths: &[usize],
    kind: Similarity,
) -> Result<RetrievalReport> {
    if query_features.nrows() != query_labels.n() || db_features.nrows() != db_labels.n() {
        return Err(CkdError::size("features and labels are not row-aligned"));
    }
    let lists = rank(query_features, db_features, kind)?;
    let relevance: Vec<Vec<bool>> = lists
        .iter()
        .map(|l| ranked_relevance(l, query_labels, db_labels))
        .collect();
    let depth = depth.unwrap_or(db_features.nrows());
    if depth == 0 {
        return Err(CkdError::InvalidConfig("R must be >= 1".into()));
    }
    RetrievalReport::from_relevance(task, &relevance, depth, cmc_depths)
}

/// Projects the query split in the task's query modality and the database
/// split in the other modality with `project`, then calls [`evaluate`].
pub fn evaluate_split<F>(
    task: Task,
    project: F,
    queries: &Subset,
    database: &Subset,
    depth: Option<usize>,
    cmc_depths: &[usize],
    kind: Similarity,
) -> Result<RetrievalReport>
where
    F: Fn(&Matrix, Modality) -> Result<Matrix>,
{
    if queries.y.n() == 0 {
        return Err(CkdError::Data("query split is empty".into()));
    }
    let qm = task.query_modality();
    let q = project(queries.features(qm), qm)?;
    let db = project(database.features(qm.other()), qm.other())?;
    evaluate(task, &q, &queries.y, &db, &database.y, depth, cmc_depths, kind)
}
