//! Subcommand flags. Every field is optional so that unset flags fall back
//! to the config file and then to the documented default.

use std::path::PathBuf;

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointKind {
    Hypercube,
    Plus,
    Spiral,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CenteringArg {
    Mean,
    Median,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeArg {
    Exact,
    Sampled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Tmds,
    Smacof,
    Sammon,
    Fg12,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Tmds => "tmds",
            Method::Smacof => "smacof",
            Method::Sammon => "sammon",
            Method::Fg12 => "fg12",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitArg {
    Classical,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reference {
    /// Ground-truth distances of the bundle.
    True,
    /// The distances that were embedded.
    Observed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepKind {
    /// Embedding score and detection against outlier rate.
    Rate,
    /// Detection probability of one edge against log2 of its distortion.
    Deform,
    /// Embedding score against log-normal sigma.
    Sigma,
    /// Closed-form break probability against Monte-Carlo, per dimension.
    Theory,
    /// Filter and solver wall-clock time against N.
    Timing,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenerateArgs {
    /// Point source [default: hypercube].
    #[arg(long, value_enum)]
    pub kind: Option<PointKind>,
    /// Number of elements [default: 70].
    #[arg(long)]
    pub n: Option<usize>,
    /// Hypercube dimension; shapes are always 2D [default: 2].
    #[arg(long)]
    pub dim: Option<usize>,
    /// Gaussian jitter for shapes [default: 0].
    #[arg(long)]
    pub jitter: Option<f64>,
    /// Coordinate scale factor [default: 1].
    #[arg(long)]
    pub scale: Option<f64>,
    /// Outlier rate: floor(rate * N(N-1)/2) pairs are replaced.
    #[arg(long, conflicts_with = "outlier_count")]
    pub outliers: Option<f64>,
    /// Exact number of replaced pairs.
    #[arg(long)]
    pub outlier_count: Option<usize>,
    /// Log-normal sigma; multiplies every pair instead of injecting outliers.
    #[arg(long, conflicts_with_all = ["outliers", "outlier_count"])]
    pub sigma: Option<f64>,
    /// Which statistic of the log-normal factor equals 1 [default: mean].
    #[arg(long, value_enum)]
    pub centering: Option<CenteringArg>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Bundle directory [default: <out_root>/generate].
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterArgs {
    /// Distance matrix CSV.
    #[arg(long, conflicts_with = "bundle")]
    pub input: Option<PathBuf>,
    /// Scenario bundle; its observed_d.csv is filtered.
    #[arg(long)]
    pub bundle: Option<PathBuf>,
    /// Triangle counting [default: exact].
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    /// Triangles sampled per edge in sampled mode [default: min(N-2, 45)].
    #[arg(long)]
    pub per_edge: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Relative tolerance of the broken-triangle test [default: 1e-9].
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmbedArgs {
    #[arg(long, conflicts_with = "bundle")]
    pub input: Option<PathBuf>,
    /// Scenario bundle; its observed_d.csv is embedded.
    #[arg(long)]
    pub bundle: Option<PathBuf>,
    /// [default: tmds]
    #[arg(long, value_enum)]
    pub method: Option<Method>,
    /// Target dimension [default: 2].
    #[arg(long)]
    pub dim: Option<usize>,
    /// Outlier penalty, required for fg12.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// [default: classical]
    #[arg(long, value_enum)]
    pub init: Option<InitArg>,
    /// [default: 300]
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// Relative stress decrease that stops the solver [default: 1e-6].
    #[arg(long)]
    pub rel_tol: Option<f64>,
    /// Triangle counting for tmds [default: exact].
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    #[arg(long)]
    pub per_edge: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvaluateArgs {
    /// Scenario bundle with ground truth.
    #[arg(long)]
    pub bundle: Option<PathBuf>,
    /// Distance matrix CSV, used when no bundle is given.
    #[arg(long, conflicts_with = "bundle")]
    pub distances: Option<PathBuf>,
    /// Outlier pair list (JSON `[[i, j], ...]`) [default: the bundle's].
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// Embedding CSV.
    #[arg(long)]
    pub embedding: Option<PathBuf>,
    /// Mask CSV [default: mask.csv next to the embedding, if present].
    #[arg(long)]
    pub mask: Option<PathBuf>,
    /// Distances the score compares against [default: true with a bundle].
    #[arg(long, value_enum)]
    pub reference: Option<Reference>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub kind: Option<SweepKind>,
    /// Comma-separated grid: rates, log2 factors, sigmas, dimensions or N.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub grid: Option<Vec<f64>>,
    /// Instances per grid point [default: 10, 50 for deform, 1 for timing].
    #[arg(long)]
    pub repeats: Option<usize>,
    /// Elements per instance [default: 100].
    #[arg(long)]
    pub n: Option<usize>,
    /// Point dimension [default: 2].
    #[arg(long)]
    pub dim: Option<usize>,
    /// Comma-separated methods for rate and sigma sweeps [default: tmds,smacof].
    #[arg(long, value_enum, value_delimiter = ',')]
    pub methods: Option<Vec<Method>>,
    /// Monte-Carlo trials per dimension for the theory sweep [default: 1000000].
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    #[arg(long)]
    pub per_edge: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
    /// Outlier penalty when fg12 is among the methods.
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long, value_enum)]
    pub centering: Option<CenteringArg>,
    #[arg(long, value_enum)]
    pub init: Option<InitArg>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
