//! Wall-clock scaling of one framework pass.

use std::fmt::Write as _;
use std::time::Instant;

use regime_core::generators::{gen_synthetic, SyntheticConfig};
use regime_core::{run_sweep, ClustererKind, SelectorConfig, SweepGrid, TermDataset};
use serde::Serialize;

use crate::error::{CliError, Result};

/// Which axis a benchmark varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum BenchFamily {
    /// K-means + exhaustive selection on the synthetic field, varying the
    /// number of terms at a fixed sample count.
    ChsTerms,
    /// K-means + sparse PCA on the synthetic field, varying the sample count.
    SpcaSamples,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub n: usize,
    pub d: usize,
    pub seconds: f64,
    /// Time relative to the first (smallest) size.
    pub t_over_t0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchConfig {
    pub family: BenchFamily,
    /// Term counts for `chs-terms`, sample counts for `spca-samples`.
    pub sizes: Vec<usize>,
    pub repeats: usize,
    /// Sample count held fixed by `chs-terms`.
    pub n: usize,
    /// Term count held fixed by `spca-samples`.
    pub d: usize,
    pub k: usize,
    pub alpha: f64,
    pub seed: u64,
}

impl BenchConfig {
    pub fn new(family: BenchFamily, sizes: Vec<usize>) -> Self {
        Self { family, sizes, repeats: 3, n: 4096, d: 8, k: 2, alpha: 1.0, seed: 0 }
    }
}

/// Synthetic field with about `n` samples on a 32-column grid.
fn synthetic(d: usize, n: usize) -> Result<TermDataset> {
    let nx = 32.min(n.max(2));
    let ny = n.div_ceil(nx).max(2);
    Ok(gen_synthetic(&SyntheticConfig { d, nx, ny, ..Default::default() }, 0)?)
}

pub fn run_benchmark(config: &BenchConfig) -> Result<Vec<BenchRow>> {
    if config.sizes.is_empty() || config.repeats == 0 {
        return Err(CliError::Argument("benchmarks need at least one size and one repeat".into()));
    }
    let mut rows: Vec<BenchRow> = Vec::with_capacity(config.sizes.len());
    for &size in &config.sizes {
        let (ds, grid) = match config.family {
            BenchFamily::ChsTerms => (
                synthetic(size, config.n)?,
                SweepGrid::new(ClustererKind::KMeans, vec![config.k], SelectorConfig::chs()),
            ),
            BenchFamily::SpcaSamples => (
                synthetic(config.d, size)?,
                SweepGrid::new(ClustererKind::KMeans, vec![config.k], SelectorConfig::sparse_pca(config.alpha))
                    .with_alphas(vec![config.alpha]),
            ),
        };
        let grid = grid.with_seed(config.seed);
        let mut total = 0.0;
        for _ in 0..config.repeats {
            let start = Instant::now();
            run_sweep(&ds, grid.clone())?;
            total += start.elapsed().as_secs_f64();
        }
        let seconds = total / config.repeats as f64;
        let t0 = rows.first().map_or(seconds, |r| r.seconds);
        rows.push(BenchRow { n: ds.n_rows(), d: ds.n_terms(), seconds, t_over_t0: seconds / t0 });
    }
    Ok(rows)
}

pub fn bench_csv(rows: &[BenchRow]) -> String {
    let mut out = String::from("n,d,seconds,t_over_t0\n");
    for r in rows {
        writeln!(out, "{},{},{},{}", r.n, r.d, r.seconds, r.t_over_t0).unwrap();
    }
    out
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 || points.iter().any(|(x, y)| *x <= 0.0 || *y <= 0.0) {
        return None;
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|(x, y)| (x.ln(), y.ln())).collect();
    let n = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_a_power_law() {
        let pts: Vec<(f64, f64)> = [1.0, 2.0, 4.0, 8.0].iter().map(|&x: &f64| (x, 3.0 * x.powf(1.5))).collect();
        assert!((loglog_slope(&pts).unwrap() - 1.5).abs() < 1e-12);
        assert_eq!(loglog_slope(&[(1.0, 1.0)]), None);
    }

    #[test]
    fn first_size_is_the_reference() {
        let mut config = BenchConfig::new(BenchFamily::SpcaSamples, vec![64, 128]);
        config.repeats = 1;
        let rows = run_benchmark(&config).unwrap();
        assert_eq!(rows[0].t_over_t0, 1.0);
        assert_eq!(rows[0].n, 64);
        assert_eq!(rows[1].n, 128);
        assert!(bench_csv(&rows).starts_with("n,d,seconds,t_over_t0\n"));
    }
}
