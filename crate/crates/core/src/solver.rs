//! Alternating eigen-update training loop.
//!
//! The objective minimized over orthonormal `P1`, `P2` is
//!
//! ```text
//! T = -β [tr(H K1 H K2) + tr(H K1 H KY) + tr(H K2 H KY)]
//!     + α1 (tr(P1ᵀ X1ᵀ L X1 P1) + λ1 ‖P1‖₂,₁)
//!     + α2 (tr(P2ᵀ X2ᵀ L X2 P2) + λ2 ‖P2‖₂,₁)
//! ```
//!
//! with `Kv = Xv Pv Pvᵀ Xvᵀ` and `KY = Y Yᵀ`. Each iteration recomputes the
//! row reweighting `Dv = diag(1 / (2 ‖row_i(Pv)‖))`, then replaces `P1` and
//! `P2` in turn with the top-`d` eigenvectors of `Q1` and `Q2`. Because `Dv`
//! majorizes the `l2,1` term, `T` never increases.
//!
//! Every product that involves `n` (cross-covariances, `Xvᵀ L Xv`) is formed
//! once in [`Problem::new`], so an iteration costs `O(d_v³)` regardless of the
//! number of samples.

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{CkdError, Result};
use crate::numerics::{self, Matrix};
use crate::semgraph::{self, LabelMatrix, SemanticGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Ckd,
    CkdBeta0,
    KdmLike,
    Cca,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Ckd => "CKD",
            Method::CkdBeta0 => "CKD(beta=0)",
            Method::KdmLike => "KDM-like",
            Method::Cca => "CCA",
        }
    }

    pub fn tag(self) -> u8 {
        match self {
            Method::Ckd => 0,
            Method::CkdBeta0 => 1,
            Method::KdmLike => 2,
            Method::Cca => 3,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        Some(match tag {
            0 => Method::Ckd,
            1 => Method::CkdBeta0,
            2 => Method::KdmLike,
            3 => Method::Cca,
            _ => return None,
        })
    }
}

impl std::str::FromStr for Method {
    type Err = CkdError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ckd" => Ok(Method::Ckd),
            "ckd-beta0" | "ckd(beta=0)" | "beta0" => Ok(Method::CkdBeta0),
            "kdm" | "kdm-like" => Ok(Method::KdmLike),
            "cca" => Ok(Method::Cca),
            other => Err(CkdError::InvalidConfig(format!("unknown method '{other}'"))),
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Init {
    /// Top-`d` eigenvectors of the label term `Xvᵀ H Y Yᵀ H Xv`.
    Supervised,
    /// Orthonormalized Gaussian matrix drawn from `seed`.
    Random,
}

impl Init {
    pub fn tag(self) -> u8 {
        match self {
            Init::Supervised => 0,
            Init::Random => 1,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            0 => Some(Init::Supervised),
            1 => Some(Init::Random),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub d: usize,
    pub alpha1: f64,
    pub alpha2: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub beta: f64,
    pub max_iters: usize,
    pub rel_tol: f64,
    pub row_norm_eps: f64,
    pub seed: u64,
    pub init: Init,
    /// Rotate both bases after training so `V1ᵀ V2` is diagonal (see [`align_bases`]).
    pub align: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            d: 10,
            alpha1: 1e-2,
            alpha2: 1e-2,
            lambda1: 1e-2,
            lambda2: 1e-2,
            beta: 1.0,
            max_iters: 100,
            rel_tol: 1e-6,
            row_norm_eps: 1e-8,
            seed: 0,
            init: Init::Supervised,
            align: true,
        }
    }
}

impl SolverConfig {
    /// Structure preservation only: the kernel-correlation terms are dropped.
    pub fn beta0(self) -> Self {
        Self { beta: 0.0, ..self }
    }

    /// Kernel-correlation only: no Laplacian and no `l2,1` terms.
    pub fn kdm_like(self) -> Self {
        Self {
            alpha1: 0.0,
            alpha2: 0.0,
            ..self
        }
    }

    pub fn for_method(self, method: Method) -> Self {
        match method {
            Method::CkdBeta0 => self.beta0(),
            Method::KdmLike => self.kdm_like(),
            Method::Ckd | Method::Cca => self,
        }
    }

    pub fn validate(&self, d1: usize, d2: usize) -> Result<()> {
        let reals = [
            ("alpha1", self.alpha1),
            ("alpha2", self.alpha2),
            ("lambda1", self.lambda1),
            ("lambda2", self.lambda2),
            ("beta", self.beta),
        ];
        for (name, v) in reals {
            if !v.is_finite() || v < 0.0 {
                return Err(CkdError::InvalidConfig(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        if self.d == 0 || self.d > d1.min(d2) {
            return Err(CkdError::InvalidConfig(format!(
                "d must be in 1..={} (min of feature dims {d1}, {d2}), got {}",
                d1.min(d2),
                self.d
            )));
        }
        if self.max_iters == 0 {
            return Err(CkdError::InvalidConfig("max_iters must be >= 1".into()));
        }
        if [self.rel_tol, self.row_norm_eps].iter().any(|v| v.is_nan() || *v <= 0.0) {
            return Err(CkdError::InvalidConfig("rel_tol and row_norm_eps must be > 0".into()));
        }
        // Q_v is identically zero when both its HSIC part and its structure part vanish.
        if self.beta == 0.0 {
            for (v, alpha) in [(1, self.alpha1), (2, self.alpha2)] {
                if alpha == 0.0 {
                    return Err(CkdError::DegenerateConfig(format!(
                        "beta = 0 and alpha{v} = 0 leave Q{v} identically zero"
                    )));
                }
            }
        }
        Ok(())
    }

    fn alpha(&self, m: Modality) -> f64 {
        match m {
            Modality::First => self.alpha1,
            Modality::Second => self.alpha2,
        }
    }

    fn lambda(&self, m: Modality) -> f64 {
        match m {
            Modality::First => self.lambda1,
            Modality::Second => self.lambda2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Modality {
    First,
    Second,
}

impl Modality {
    pub fn other(self) -> Self {
        match self {
            Modality::First => Modality::Second,
            Modality::Second => Modality::First,
        }
    }
}

/// `D_ii = 1 / (2 max(‖row_i(P)‖, eps))`.
pub fn reweight_matrix(p: &Matrix, eps: f64) -> Matrix {
    let diag = DVector::from_iterator(
        p.nrows(),
        numerics::row_norms(p).into_iter().map(|r| 1.0 / (2.0 * r.max(eps))),
    );
    Matrix::from_diagonal(&diag)
}

/// Training data with every `n`-sized product precomputed.
#[derive(Debug, Clone)]
pub struct Problem {
    x1: Matrix,
    x2: Matrix,
    means1: DVector<f64>,
    means2: DVector<f64>,
    labels: LabelMatrix,
    graph: SemanticGraph,
    /// `X1ᵀ H X2`
    cross: Matrix,
    /// `Xvᵀ H Y`
    label_cross1: Matrix,
    label_cross2: Matrix,
    /// `Xvᵀ L Xv`
    structure1: Matrix,
    structure2: Matrix,
}

impl Problem {
    /// Zero-centers both modalities column-wise (keeping the offsets) and
    /// builds the semantic graph once.
    pub fn new(x1: &Matrix, x2: &Matrix, y: &LabelMatrix) -> Result<Self> {
        numerics::ensure_finite(x1, "X1")?;
        numerics::ensure_finite(x2, "X2")?;
        let n = y.n();
        if x1.nrows() != n || x2.nrows() != n {
            return Err(CkdError::size(format!(
                "row counts differ: X1 {}, X2 {}, Y {n}",
                x1.nrows(),
                x2.nrows()
            )));
        }
        if n < 2 {
            return Err(CkdError::size(format!("need at least 2 samples, got {n}")));
        }
        let means1 = numerics::column_means(x1);
        let means2 = numerics::column_means(x2);
        let x1 = numerics::subtract_row(x1, &means1)?;
        let x2 = numerics::subtract_row(x2, &means2)?;
        let graph = semgraph::build_graph(y);

        // H is idempotent and symmetric, so Xaᵀ H Xb = (H Xa)ᵀ (H Xb).
        let hy = numerics::zero_center_columns(y.matrix());
        let h1 = numerics::zero_center_columns(&x1);
        let h2 = numerics::zero_center_columns(&x2);
        let cross = h1.transpose() * &h2;
        let label_cross1 = h1.transpose() * &hy;
        let label_cross2 = h2.transpose() * &hy;
        let structure1 = numerics::symmetrize(&(x1.transpose() * (graph.laplacian() * &x1)));
        let structure2 = numerics::symmetrize(&(x2.transpose() * (graph.laplacian() * &x2)));

        Ok(Self {
            x1,
            x2,
            means1,
            means2,
            labels: y.clone(),
            graph,
            cross,
            label_cross1,
            label_cross2,
            structure1,
            structure2,
        })
    }

    pub fn n(&self) -> usize {
        self.x1.nrows()
    }

    pub fn dim(&self, m: Modality) -> usize {
        self.features(m).ncols()
    }

    /// Centered training features.
    pub fn features(&self, m: Modality) -> &Matrix {
        match m {
            Modality::First => &self.x1,
            Modality::Second => &self.x2,
        }
    }

    pub fn means(&self, m: Modality) -> &DVector<f64> {
        match m {
            Modality::First => &self.means1,
            Modality::Second => &self.means2,
        }
    }

    pub fn labels(&self) -> &LabelMatrix {
        &self.labels
    }

    pub fn graph(&self) -> &SemanticGraph {
        &self.graph
    }

    fn label_cross(&self, m: Modality) -> &Matrix {
        match m {
            Modality::First => &self.label_cross1,
            Modality::Second => &self.label_cross2,
        }
    }

    pub fn structure(&self, m: Modality) -> &Matrix {
        match m {
            Modality::First => &self.structure1,
            Modality::Second => &self.structure2,
        }
    }

    /// `Xvᵀ H Xw` with `v = m`.
    fn cross_from(&self, m: Modality) -> Matrix {
        match m {
            Modality::First => self.cross.clone(),
            Modality::Second => self.cross.transpose(),
        }
    }

    fn check_projection(&self, m: Modality, p: &Matrix, what: &str) -> Result<()> {
        if p.nrows() != self.dim(m) {
            return Err(CkdError::size(format!(
                "{what} has {} rows, modality has {} features",
                p.nrows(),
                self.dim(m)
            )));
        }
        Ok(())
    }
}

/// `Qv = β (Xvᵀ H Xw Pw Pwᵀ Xwᵀ H Xv + Xvᵀ H Y Yᵀ H Xv) - αv Xvᵀ L Xv - αv λv Dv`.
pub fn assemble_q(
    m: Modality,
    problem: &Problem,
    p_other: &Matrix,
    reweight: &Matrix,
    cfg: &SolverConfig,
) -> Result<Matrix> {
    problem.check_projection(m.other(), p_other, "P_other")?;
    let dv = problem.dim(m);
    if reweight.nrows() != dv || reweight.ncols() != dv {
        return Err(CkdError::size(format!(
            "D is {}x{}, expected {dv}x{dv}",
            reweight.nrows(),
            reweight.ncols()
        )));
    }
    let mut q = Matrix::zeros(dv, dv);
    if cfg.beta != 0.0 {
        let coupled = problem.cross_from(m) * p_other;
        let lc = problem.label_cross(m);
        q += (&coupled * coupled.transpose() + lc * lc.transpose()) * cfg.beta;
    }
    let alpha = cfg.alpha(m);
    if alpha != 0.0 {
        q -= problem.structure(m) * alpha;
        q -= reweight * (alpha * cfg.lambda(m));
    }
    Ok(numerics::symmetrize(&q))
}

/// Objective value with its additive breakdown.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveTerms {
    /// Raw traces `tr(H K1 H K2)`, `tr(H K1 H KY)`, `tr(H K2 H KY)`.
    pub trace_12: f64,
    pub trace_1y: f64,
    pub trace_2y: f64,
    /// `-β (trace_12 + trace_1y + trace_2y)`
    pub hsic_term: f64,
    /// `αv tr(Pvᵀ Xvᵀ L Xv Pv)`
    pub laplacian1: f64,
    pub laplacian2: f64,
    /// `αv λv ‖Pv‖₂,₁`
    pub l21_1: f64,
    pub l21_2: f64,
    pub total: f64,
}

/// Evaluates `T` with the true `l2,1` norm (not the reweighted surrogate).
pub fn objective(problem: &Problem, p1: &Matrix, p2: &Matrix, cfg: &SolverConfig) -> Result<ObjectiveTerms> {
    problem.check_projection(Modality::First, p1, "P1")?;
    problem.check_projection(Modality::Second, p2, "P2")?;
    // tr(H K1 H K2) = ‖P1ᵀ X1ᵀ H X2 P2‖²_F, tr(H Kv H KY) = ‖Pvᵀ Xvᵀ H Y‖²_F
    let trace_12 = (p1.transpose() * &problem.cross * p2).norm_squared();
    let trace_1y = (p1.transpose() * &problem.label_cross1).norm_squared();
    let trace_2y = (p2.transpose() * &problem.label_cross2).norm_squared();
    let hsic_term = if cfg.beta == 0.0 {
        0.0
    } else {
        -cfg.beta * (trace_12 + trace_1y + trace_2y)
    };
    let structure = |m: Modality, p: &Matrix| -> (f64, f64) {
        let alpha = cfg.alpha(m);
        if alpha == 0.0 {
            return (0.0, 0.0);
        }
        let lap = numerics::frobenius_inner(p, &(problem.structure(m) * p));
        (alpha * lap, alpha * cfg.lambda(m) * numerics::l21_norm(p))
    };
    let (laplacian1, l21_1) = structure(Modality::First, p1);
    let (laplacian2, l21_2) = structure(Modality::Second, p2);
    Ok(ObjectiveTerms {
        trace_12,
        trace_1y,
        trace_2y,
        hsic_term,
        laplacian1,
        laplacian2,
        l21_1,
        l21_2,
        total: hsic_term + laplacian1 + laplacian2 + l21_1 + l21_2,
    })
}

/// `λ (tr(Fᵀ D F) - ‖F‖₂,₁) - λ (tr(Gᵀ D G) - ‖G‖₂,₁)` for the previous
/// iterate `G`, the new iterate `F` and `D` built from `G`. Non-negative up
/// to roundoff whenever `D` comes from [`reweight_matrix`] on `G`.
pub fn majorizer_gap(prev: &Matrix, next: &Matrix, reweight: &Matrix, lambda: f64) -> f64 {
    let surrogate = |p: &Matrix| numerics::frobenius_inner(p, &(reweight * p)) - numerics::l21_norm(p);
    lambda * (surrogate(next) - surrogate(prev))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    /// 0 is the initialization.
    pub iteration: usize,
    pub terms: ObjectiveTerms,
    /// max over v of `‖Pvᵀ Pv - I‖_F`
    pub ortho_residual: f64,
    pub majorizer_gap1: f64,
    pub majorizer_gap2: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TraceLog {
    pub records: Vec<IterationRecord>,
    pub converged: bool,
}

impl TraceLog {
    pub fn objectives(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.terms.total).collect()
    }

    /// Largest `T_{k+1} - T_k - slack max(1, |T_k|)`; non-positive means the
    /// sequence is monotone within `slack`.
    pub fn worst_ascent(&self, slack: f64) -> f64 {
        self.records
            .windows(2)
            .map(|w| {
                let (a, b) = (w[0].terms.total, w[1].terms.total);
                b - a - slack * a.abs().max(1.0)
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "iteration,objective,hsic_term,laplacian1,laplacian2,l21_1,l21_2,ortho_residual,majorizer_gap1,majorizer_gap2\n",
        );
        for r in &self.records {
            let t = &r.terms;
            out.push_str(&format!(
                "{},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e}\n",
                r.iteration,
                t.total,
                t.hsic_term,
                t.laplacian1,
                t.laplacian2,
                t.l21_1,
                t.l21_2,
                r.ortho_residual,
                r.majorizer_gap1,
                r.majorizer_gap2
            ));
        }
        out
    }
}

/// Learned projections with the training-set centering offsets.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub method: Method,
    pub p1: Matrix,
    pub p2: Matrix,
    pub column_means_1: DVector<f64>,
    pub column_means_2: DVector<f64>,
    pub config: SolverConfig,
}

impl ModelParams {
    pub fn projection(&self, m: Modality) -> &Matrix {
        match m {
            Modality::First => &self.p1,
            Modality::Second => &self.p2,
        }
    }

    /// `(X - training means) Pv`.
    pub fn project(&self, x: &Matrix, m: Modality) -> Result<Matrix> {
        let means = match m {
            Modality::First => &self.column_means_1,
            Modality::Second => &self.column_means_2,
        };
        let centered = numerics::subtract_row(x, means)?;
        Ok(centered * self.projection(m))
    }
}

/// Stepwise driver for the alternating updates. [`fit`] runs it to
/// convergence; tests drive it one step at a time.
#[derive(Debug, Clone)]
pub struct Trainer {
    problem: Problem,
    cfg: SolverConfig,
    p1: Matrix,
    p2: Matrix,
    iteration: usize,
}

impl Trainer {
    pub fn new(problem: Problem, cfg: SolverConfig) -> Result<Self> {
        cfg.validate(problem.dim(Modality::First), problem.dim(Modality::Second))?;
        let (p1, p2) = match cfg.init {
            Init::Supervised => {
                let init = |m: Modality| {
                    let lc = problem.label_cross(m);
                    numerics::top_d_eigvecs(&(lc * lc.transpose()), cfg.d)
                };
                (init(Modality::First)?, init(Modality::Second)?)
            }
            Init::Random => {
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                let p1 = random_orthonormal(problem.dim(Modality::First), cfg.d, &mut rng);
                let p2 = random_orthonormal(problem.dim(Modality::Second), cfg.d, &mut rng);
                (p1, p2)
            }
        };
        Ok(Self {
            problem,
            cfg,
            p1,
            p2,
            iteration: 0,
        })
    }

    pub fn problem(&self) -> &Problem {
        &self.problem
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    pub fn projection(&self, m: Modality) -> &Matrix {
        match m {
            Modality::First => &self.p1,
            Modality::Second => &self.p2,
        }
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn reweight(&self, m: Modality) -> Matrix {
        reweight_matrix(self.projection(m), self.cfg.row_norm_eps)
    }

    /// `Qv` at the current state, with `Dv` built from the current `Pv`.
    pub fn q_matrix(&self, m: Modality) -> Result<Matrix> {
        assemble_q(m, &self.problem, self.projection(m.other()), &self.reweight(m), &self.cfg)
    }

    pub fn objective(&self) -> Result<ObjectiveTerms> {
        objective(&self.problem, &self.p1, &self.p2, &self.cfg)
    }

    pub fn initial_record(&self) -> Result<IterationRecord> {
        Ok(IterationRecord {
            iteration: self.iteration,
            terms: self.objective()?,
            ortho_residual: self.ortho_residual(),
            majorizer_gap1: 0.0,
            majorizer_gap2: 0.0,
        })
    }

    fn ortho_residual(&self) -> f64 {
        numerics::orthonormality_residual(&self.p1).max(numerics::orthonormality_residual(&self.p2))
    }

    /// One pass: `D1`, `D2`, then `P1` (using the current `P2`), then `P2`
    /// (using the new `P1`).
    pub fn step(&mut self) -> Result<IterationRecord> {
        let d1 = self.reweight(Modality::First);
        let d2 = self.reweight(Modality::Second);

        let q1 = assemble_q(Modality::First, &self.problem, &self.p2, &d1, &self.cfg)?;
        let p1 = numerics::top_d_eigvecs(&q1, self.cfg.d)?;
        let gap1 = majorizer_gap(&self.p1, &p1, &d1, self.cfg.lambda1);
        self.p1 = p1;

        let q2 = assemble_q(Modality::Second, &self.problem, &self.p1, &d2, &self.cfg)?;
        let p2 = numerics::top_d_eigvecs(&q2, self.cfg.d)?;
        let gap2 = majorizer_gap(&self.p2, &p2, &d2, self.cfg.lambda2);
        self.p2 = p2;

        self.iteration += 1;
        Ok(IterationRecord {
            iteration: self.iteration,
            terms: self.objective()?,
            ortho_residual: self.ortho_residual(),
            majorizer_gap1: gap1,
            majorizer_gap2: gap2,
        })
    }

    /// Steps until `|T_k - T_{k-1}| <= rel_tol max(1, |T_{k-1}|)` or
    /// `max_iters` steps have run.
    pub fn run(&mut self) -> Result<TraceLog> {
        let mut log = TraceLog {
            records: vec![self.initial_record()?],
            converged: false,
        };
        for _ in 0..self.cfg.max_iters {
            let prev = log.records.last().expect("initial record").terms.total;
            let rec = self.step()?;
            log.records.push(rec);
            if (rec.terms.total - prev).abs() <= self.cfg.rel_tol * prev.abs().max(1.0) {
                log.converged = true;
                break;
            }
        }
        Ok(log)
    }

    /// Final parameters; applies [`align_bases`] when the config asks for it.
    pub fn into_params(self, method: Method) -> Result<ModelParams> {
        let (p1, p2) = if self.cfg.align {
            align_bases(&self.problem.x1, &self.problem.x2, &self.p1, &self.p2)?
        } else {
            (self.p1, self.p2)
        };
        Ok(ModelParams {
            method,
            column_means_1: self.problem.means1.clone(),
            column_means_2: self.problem.means2.clone(),
            p1,
            p2,
            config: self.cfg,
        })
    }
}

/// Rotates each basis inside its own span so the training embeddings are
/// paired coordinate by coordinate: with `V1ᵀ V2 = U S Wᵀ`, returns
/// `(P1 U, P2 W)`. The objective depends on `Pv` only through `Pv Pvᵀ`, which
/// the rotation leaves unchanged, but nearest-neighbour scoring across
/// modalities needs the coordinates to correspond. Column pairs are ordered
/// by descending cross-covariance; each pair's sign makes the largest
/// magnitude entry of the `P1` column positive.
pub fn align_bases(x1: &Matrix, x2: &Matrix, p1: &Matrix, p2: &Matrix) -> Result<(Matrix, Matrix)> {
    let v1 = x1 * p1;
    let v2 = x2 * p2;
    let cross = v1.transpose() * v2;
    let d = cross.nrows();
    let svd = cross.svd(true, true);
    let u = svd.u.ok_or_else(|| CkdError::Numeric("alignment SVD failed".into()))?;
    let v_t = svd.v_t.ok_or_else(|| CkdError::Numeric("alignment SVD failed".into()))?;
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let mut r1 = Matrix::zeros(d, d);
    let mut r2 = Matrix::zeros(d, d);
    for (k, &src) in order.iter().enumerate() {
        r1.set_column(k, &u.column(src));
        r2.set_column(k, &v_t.row(src).transpose());
    }
    let mut a1 = p1 * r1;
    let mut a2 = p2 * r2;
    for k in 0..d {
        let col = a1.column(k);
        if col[col.iamax()] < 0.0 {
            a1.column_mut(k).neg_mut();
            a2.column_mut(k).neg_mut();
        }
    }
    Ok((a1, a2))
}

fn random_orthonormal(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Matrix {
    let g = Matrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng));
    g.qr().q().columns(0, cols).into_owned()
}

/// Method tag implied by a configuration.
pub fn method_for(cfg: &SolverConfig) -> Method {
    if cfg.beta == 0.0 {
        Method::CkdBeta0
    } else if cfg.alpha1 == 0.0 && cfg.alpha2 == 0.0 {
        Method::KdmLike
    } else {
        Method::Ckd
    }
}

/// Centers the data, builds the semantic graph and runs the alternating
/// updates to convergence.
pub fn fit(x1: &Matrix, x2: &Matrix, y: &LabelMatrix, cfg: &SolverConfig) -> Result<(ModelParams, TraceLog)> {
    cfg.validate(x1.ncols(), x2.ncols())?;
    let problem = Problem::new(x1, x2, y)?;
    let mut trainer = Trainer::new(problem, *cfg)?;
    let log = trainer.run()?;
    Ok((trainer.into_params(method_for(cfg))?, log))
}
