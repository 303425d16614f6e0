//! Command-line flags. Every flag group also deserializes from the JSON file
//! given with `--config`; flags given on the command line win.

use std::fs;
use std::path::{Path, PathBuf};

use ckd::data::SynthSpec;
use ckd::eval::{Similarity, Task, DEFAULT_CMC_DEPTHS};
use ckd::solver::{Init, Method, SolverConfig};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "ckd", version, args_override_self = true, about = "Cross-modal subspace learning with kernel dependence and semantic structure")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic paired dataset.
    Synth(SynthCmd),
    /// Train a model on the training split of a dataset.
    Train(TrainCmd),
    /// Evaluate cross-modal retrieval on the query split.
    Eval(EvalCmd),
    /// Compare methods and sweep hyperparameters.
    Ablate(AblateCmd),
    /// Describe a model file or dataset manifest.
    Info(InfoCmd),
}

/// Merges `other` into `self` field by field, keeping values already set.
pub trait Overlay {
    fn overlay(&mut self, other: Self);
}

macro_rules! overlay_fields {
    ($ty:ty { $($field:ident),* $(,)? }) => {
        impl Overlay for $ty {
            fn overlay(&mut self, other: Self) {
                $( if self.$field.is_none() { self.$field = other.$field; } )*
            }
        }
    };
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodArg {
    Ckd,
    CkdBeta0,
    Kdm,
    Cca,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Ckd => Method::Ckd,
            MethodArg::CkdBeta0 => Method::CkdBeta0,
            MethodArg::Kdm => Method::KdmLike,
            MethodArg::Cca => Method::Cca,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitArg {
    Supervised,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TaskArg {
    I2t,
    T2i,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SimilarityArg {
    Nc,
    Cosine,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverArgs {
    /// Method preset; `ckd-beta0` forces beta=0, `kdm` forces alpha1=alpha2=0.
    #[arg(long, value_enum)]
    pub method: Option<MethodArg>,
    /// Subspace dimension.
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub alpha1: Option<f64>,
    #[arg(long)]
    pub alpha2: Option<f64>,
    #[arg(long)]
    pub lambda1: Option<f64>,
    #[arg(long)]
    pub lambda2: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    #[arg(long)]
    pub rel_tol: Option<f64>,
    /// Floor on row norms when building the reweighting matrix.
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    pub init: Option<InitArg>,
    /// Align the two bases after training.
    #[arg(long)]
    pub align: Option<bool>,
    /// CCA ridge, relative to the mean covariance eigenvalue.
    #[arg(long)]
    pub ridge: Option<f64>,
}

overlay_fields!(SolverArgs { method, d, alpha1, alpha2, lambda1, lambda2, beta, max_iters, rel_tol, eps, seed, init, align, ridge });

impl SolverArgs {
    pub fn method(&self) -> Method {
        self.method.map(Method::from).unwrap_or(Method::Ckd)
    }

    pub fn ridge(&self) -> f64 {
        self.ridge.unwrap_or(ckd::baselines::DEFAULT_RIDGE)
    }

    /// Solver settings with the method preset applied last.
    pub fn solver_config(&self) -> SolverConfig {
        let def = SolverConfig::default();
        let cfg = SolverConfig {
            d: self.d.unwrap_or(def.d),
            alpha1: self.alpha1.unwrap_or(def.alpha1),
            alpha2: self.alpha2.unwrap_or(def.alpha2),
            lambda1: self.lambda1.unwrap_or(def.lambda1),
            lambda2: self.lambda2.unwrap_or(def.lambda2),
            beta: self.beta.unwrap_or(def.beta),
            max_iters: self.max_iters.unwrap_or(def.max_iters),
            rel_tol: self.rel_tol.unwrap_or(def.rel_tol),
            row_norm_eps: self.eps.unwrap_or(def.row_norm_eps),
            seed: self.seed.unwrap_or(def.seed),
            init: match self.init {
                Some(InitArg::Random) => Init::Random,
                Some(InitArg::Supervised) => Init::Supervised,
                None => def.init,
            },
            align: self.align.unwrap_or(def.align),
        };
        cfg.for_method(self.method())
    }
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalArgs {
    #[arg(long, value_enum)]
    pub task: Option<TaskArg>,
    /// Evaluation depth R; defaults to the whole database.
    #[arg(long)]
    pub r: Option<usize>,
    /// CMC candidate list sizes, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub ms: Option<Vec<usize>>,
    #[arg(long, value_enum)]
    pub similarity: Option<SimilarityArg>,
}

overlay_fields!(EvalArgs { task, r, ms, similarity });

impl EvalArgs {
    pub fn tasks(&self) -> Vec<Task> {
        match self.task.unwrap_or(TaskArg::Both) {
            TaskArg::I2t => vec![Task::I2T],
            TaskArg::T2i => vec![Task::T2I],
            TaskArg::Both => vec![Task::I2T, Task::T2I],
        }
    }

    pub fn cmc_depths(&self) -> Result<Vec<usize>, CliError> {
        let ms = self.ms.clone().unwrap_or_else(|| DEFAULT_CMC_DEPTHS.to_vec());
        if ms.is_empty() || ms.contains(&0) {
            return Err(CliError::Usage("--ms needs positive list sizes".into()));
        }
        Ok(ms)
    }

    pub fn depth(&self) -> Result<Option<usize>, CliError> {
        match self.r {
            Some(0) => Err(CliError::Usage("--r must be at least 1".into())),
            r => Ok(r),
        }
    }

    pub fn similarity(&self) -> Similarity {
        match self.similarity {
            Some(SimilarityArg::Cosine) => Similarity::Cosine,
            _ => Similarity::Nc,
        }
    }
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthArgs {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub d1: Option<usize>,
    #[arg(long)]
    pub d2: Option<usize>,
    /// Number of classes.
    #[arg(long)]
    pub c: Option<usize>,
    /// Latent dimension shared by both modalities.
    #[arg(long)]
    pub latent: Option<usize>,
    /// Standard deviation of the per-modality feature noise.
    #[arg(long)]
    pub noise: Option<f64>,
    #[arg(long)]
    pub labels_min: Option<usize>,
    #[arg(long)]
    pub labels_max: Option<usize>,
    #[arg(long)]
    pub jitter: Option<f64>,
    #[arg(long)]
    pub separation: Option<f64>,
    #[arg(long)]
    pub query_fraction: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

overlay_fields!(SynthArgs { n, d1, d2, c, latent, noise, labels_min, labels_max, jitter, separation, query_fraction, seed });

impl SynthArgs {
    pub fn spec(&self) -> SynthSpec {
        let def = SynthSpec::default();
        SynthSpec {
            n: self.n.unwrap_or(def.n),
            d1: self.d1.unwrap_or(def.d1),
            d2: self.d2.unwrap_or(def.d2),
            c: self.c.unwrap_or(def.c),
            latent_dim: self.latent.unwrap_or(def.latent_dim),
            noise_sigma: self.noise.unwrap_or(def.noise_sigma),
            labels_min: self.labels_min.unwrap_or(def.labels_min),
            labels_max: self.labels_max.unwrap_or(def.labels_max),
            jitter: self.jitter.unwrap_or(def.jitter),
            separation: self.separation.unwrap_or(def.separation),
            query_fraction: self.query_fraction.unwrap_or(def.query_fraction),
            seed: self.seed.unwrap_or(def.seed),
        }
    }
}

#[derive(Debug, Args)]
pub struct SynthCmd {
    /// Output directory for the CSV files and manifest.json.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub synth: SynthArgs,
    /// JSON file supplying any of the flags above.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainCmd {
    /// Dataset manifest.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Output model file.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Per-iteration trace CSV; defaults to the model path with a `.trace.csv` extension.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalCmd {
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Directory for report_<task>.json, cmc_<task>.csv and timings.json.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub eval: EvalArgs,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AblateCmd {
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Output CSV, one row per configuration.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Methods to compare at the base settings.
    #[arg(long, value_enum, value_delimiter = ',')]
    pub methods: Option<Vec<MethodArg>>,
    /// CKD grid over alpha1, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub alpha1_grid: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub alpha2_grid: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub d_grid: Option<Vec<usize>>,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub eval: EvalArgs,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct InfoCmd {
    /// Model file or dataset manifest.
    pub path: PathBuf,
}

/// Layout of a `--config` file. Which keys are accepted depends on the command.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthFile {
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub synth: SynthArgs,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainFile {
    pub data: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub trace: Option<PathBuf>,
    #[serde(default)]
    pub solver: SolverArgs,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalFile {
    pub model: Option<PathBuf>,
    pub data: Option<PathBuf>,
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub eval: EvalArgs,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AblateFile {
    pub data: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub methods: Option<Vec<MethodArg>>,
    pub alpha1_grid: Option<Vec<f64>>,
    pub alpha2_grid: Option<Vec<f64>>,
    pub d_grid: Option<Vec<usize>>,
    #[serde(default)]
    pub solver: SolverArgs,
    #[serde(default)]
    pub eval: EvalArgs,
}

pub fn read_config<T: DeserializeOwned + Default>(path: Option<&Path>) -> Result<T, CliError> {
    let Some(path) = path else {
        return Ok(T::default());
    };
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))
}

pub fn required<T>(value: Option<T>, flag: &str) -> Result<T, CliError> {
    value.ok_or_else(|| CliError::Usage(format!("missing required --{flag}")))
}

pub fn fill<T>(slot: &mut Option<T>, from: Option<T>) {
    if slot.is_none() {
        *slot = from;
    }
}
