//! Command-line grammar.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use regime_core::{ClustererKind, Covariance, DegeneratePolicy, Representative, SweepGrid};
use serde::Serialize;

use crate::bench::BenchFamily;
use crate::store::Format;

#[derive(Debug, Parser)]
#[command(name = "regime", version, about = "Find dominant-balance regimes in equation-term data")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate an example dataset.
    #[command(subcommand)]
    Gen(GenCommand),
    /// Simulate the tumor-angiogenesis model and export its equation terms.
    SimAngio(SimAngioArgs),
    /// Sweep clustering and selection settings for the best global score.
    Fit(FitArgs),
    /// Score user-supplied hypotheses or labels.
    Score(ScoreArgs),
    /// Time one framework pass across problem sizes.
    Bench(BenchArgs),
}

#[derive(Debug, Subcommand)]
pub enum GenCommand {
    /// Two-regime synthetic field on the unit square.
    Synthetic(SyntheticArgs),
    /// Munk western-boundary-current vorticity balance.
    Munk(MunkArgs),
}

/// Options shared by every command.
#[derive(Debug, Clone, Args, Serialize)]
pub struct CommonArgs {
    /// Output directory (created if missing).
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
    /// Seed for every stochastic component.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; 0 uses one per core. Results do not depend on it.
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
    /// Suppress the summary printed on success.
    #[arg(long, short)]
    pub quiet: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModulationArg {
    Perturbed,
    Sine,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SyntheticArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Number of terms (even, at least 4).
    #[arg(long, default_value_t = 8)]
    pub d: usize,
    #[arg(long, default_value_t = 128)]
    pub nx: usize,
    #[arg(long, default_value_t = 128)]
    pub ny: usize,
    /// Amplitude of the dominant terms.
    #[arg(long, default_value_t = 10.0)]
    pub lambda: f64,
    /// Amplitude of the inactive terms.
    #[arg(long, default_value_t = 0.1)]
    pub beta: f64,
    #[arg(long, default_value_t = 0.1)]
    pub eta0: f64,
    #[arg(long, default_value_t = 10.0 * std::f64::consts::PI)]
    pub omega: f64,
    #[arg(long, value_enum, default_value_t = ModulationArg::Perturbed)]
    pub modulation: ModulationArg,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct MunkArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Boundary-layer width.
    #[arg(long, default_value_t = 0.01)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 1001)]
    pub nx: usize,
    #[arg(long, default_value_t = 51)]
    pub ny: usize,
    /// Latitude of the exported score curves.
    #[arg(long, default_value_t = 0.5)]
    pub y_slice: f64,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SimAngioArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, default_value_t = 0.91)]
    pub t_end: f64,
    /// Amplitude of the red noise added to the initial factor and fibronectin,
    /// relative to each field's maximum.
    #[arg(long, default_value_t = 0.01)]
    pub noise: f64,
    /// Lag-one correlation of the initial noise.
    #[arg(long, default_value_t = 0.9)]
    pub noise_ar: f64,
    /// Cells per side.
    #[arg(long, default_value_t = 256)]
    pub resolution: usize,
    /// Times at which to save the (n, c, f) fields, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub snapshots: Vec<f64>,
    /// Local error tolerance of the time integrator.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ClustererArg {
    Kmeans,
    Gmm,
}

impl From<ClustererArg> for ClustererKind {
    fn from(c: ClustererArg) -> Self {
        match c {
            ClustererArg::Kmeans => ClustererKind::KMeans,
            ClustererArg::Gmm => ClustererKind::Gmm,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SelectorArg {
    Chs,
    Spca,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DegenerateArg {
    Penalize,
    Exclude,
}

impl From<DegenerateArg> for DegeneratePolicy {
    fn from(d: DegenerateArg) -> Self {
        match d {
            DegenerateArg::Penalize => DegeneratePolicy::Penalize,
            DegenerateArg::Exclude => DegeneratePolicy::Exclude,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CovarianceArg {
    Full,
    Diagonal,
}

impl From<CovarianceArg> for Covariance {
    fn from(c: CovarianceArg) -> Self {
        match c {
            CovarianceArg::Full => Covariance::Full,
            CovarianceArg::Diagonal => Covariance::Diagonal,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RepresentativeArg {
    MeanScore,
    MeanAbsVector,
}

impl From<RepresentativeArg> for Representative {
    fn from(r: RepresentativeArg) -> Self {
        match r {
            RepresentativeArg::MeanScore => Representative::MeanScore,
            RepresentativeArg::MeanAbsVector => Representative::MeanAbsVector,
        }
    }
}

/// Options that control how one cluster's hypothesis is chosen.
#[derive(Debug, Clone, Args, Serialize)]
pub struct SelectorArgs {
    #[arg(long, value_enum, default_value_t = SelectorArg::Chs)]
    pub selector: SelectorArg,
    /// Objective of the exhaustive selector.
    #[arg(long, value_enum, default_value_t = RepresentativeArg::MeanScore)]
    pub representative: RepresentativeArg,
    /// Scale each cluster's term columns to unit variance before sparse PCA.
    #[arg(long)]
    pub spca_normalize: bool,
    /// Largest term count the exhaustive selector accepts.
    #[arg(long, default_value_t = 16)]
    pub chs_ceiling: usize,
    #[arg(long, value_enum, default_value_t = DegenerateArg::Penalize)]
    pub degenerate: DegenerateArg,
    /// Recompute weights as cell areas from the x and y coordinates.
    #[arg(long)]
    pub area_weights: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FitArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Dataset file (text or binary).
    #[arg(long, value_name = "PATH")]
    pub data: PathBuf,
    #[arg(long, value_enum, default_value_t = ClustererArg::Kmeans)]
    pub clusterer: ClustererArg,
    #[command(flatten)]
    pub selection: SelectorArgs,
    /// Cluster counts as `k`, `lo:hi` or `lo:hi:step`.
    #[arg(long, default_value = "2:10")]
    pub k: KRange,
    /// Sparse-PCA thresholds as `a`, `lo:hi` or `lo:hi:count`, log-spaced.
    #[arg(long, default_value = "1e-2:1e2:20")]
    pub alpha: AlphaRange,
    /// Cluster the raw terms instead of z-scored ones.
    #[arg(long)]
    pub no_standardize: bool,
    /// Mixture covariance structure.
    #[arg(long, value_enum, default_value_t = CovarianceArg::Full)]
    pub covariance: CovarianceArg,
    /// Clusterer restarts per grid point.
    #[arg(long, default_value_t = 10)]
    pub n_init: usize,
    #[arg(long, default_value_t = 300)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
}

/// Exactly one source of hypotheses.
#[derive(Debug, Clone, Args, Serialize)]
#[group(required = true, multiple = false)]
pub struct HypothesisSource {
    /// File with one mask per observation (or a single mask for all), as
    /// `0`/`1` strings; a `mask` column of a CSV is also accepted.
    #[arg(long, value_name = "PATH")]
    pub masks: Option<PathBuf>,
    /// File with one integer cluster label per observation; a `label`
    /// column of a CSV is also accepted.
    #[arg(long, value_name = "PATH")]
    pub labels: Option<PathBuf>,
    /// One balance for every observation: comma-separated term names or `all`.
    #[arg(long, value_name = "TERMS")]
    pub balance: Option<String>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ScoreArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, value_name = "PATH")]
    pub data: PathBuf,
    #[command(flatten)]
    pub source: HypothesisSource,
    #[command(flatten)]
    pub selection: SelectorArgs,
    /// Sparse-PCA threshold used with `--labels --selector spca`.
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BenchArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, value_enum)]
    pub family: BenchFamily,
    /// Term counts (`chs-terms`) or sample counts (`spca-samples`).
    #[arg(long, value_delimiter = ',')]
    pub sizes: Vec<usize>,
    #[arg(long, default_value_t = 3)]
    pub repeats: usize,
    /// Sample count held fixed by `chs-terms`.
    #[arg(long, default_value_t = 4096)]
    pub n: usize,
    /// Term count held fixed by `spca-samples`.
    #[arg(long, default_value_t = 8)]
    pub d: usize,
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
}

/// Alpha values used when a range omits its count.
pub const DEFAULT_ALPHA_COUNT: usize = 20;

/// Cluster counts: `k`, `lo:hi` (step 1) or `lo:hi:step`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct KRange(pub Vec<usize>);

impl FromStr for KRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<usize> = s
            .split(':')
            .map(|p| p.trim().parse::<usize>().map_err(|_| format!("`{p}` is not a non-negative integer")))
            .collect::<Result<_, _>>()?;
        let (lo, hi, step) = match parts[..] {
            [k] => (k, k, 1),
            [lo, hi] => (lo, hi, 1),
            [lo, hi, step] => (lo, hi, step),
            _ => return Err("expected k, lo:hi or lo:hi:step".into()),
        };
        if lo == 0 || hi < lo || step == 0 {
            return Err(format!("`{s}` needs 1 <= lo <= hi and a positive step"));
        }
        Ok(KRange((lo..=hi).step_by(step).collect()))
    }
}

impl fmt::Display for KRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(ToString::to_string).collect();
        f.write_str(&parts.join(","))
    }
}

/// Positive thresholds: `a`, `lo:hi` or `lo:hi:count`, spaced evenly in log10.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct AlphaRange(pub Vec<f64>);

impl FromStr for AlphaRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let fields: Vec<&str> = s.split(':').map(str::trim).collect();
        let number = |p: &str| -> Result<f64, String> {
            match p.parse::<f64>() {
                Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
                _ => Err(format!("`{p}` is not a positive number")),
            }
        };
        let (lo, hi, count) = match fields[..] {
            [a] => (number(a)?, number(a)?, 1),
            [lo, hi] => (number(lo)?, number(hi)?, DEFAULT_ALPHA_COUNT),
            [lo, hi, count] => {
                let count = count.parse::<usize>().map_err(|_| format!("`{count}` is not a count"))?;
                (number(lo)?, number(hi)?, count)
            }
            _ => return Err("expected a, lo:hi or lo:hi:count".into()),
        };
        if hi < lo || count == 0 || (count > 1 && hi == lo) {
            return Err(format!("`{s}` needs lo < hi and a positive count"));
        }
        Ok(AlphaRange(SweepGrid::log_spaced(lo, hi, count)))
    }
}
