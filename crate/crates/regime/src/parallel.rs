use rayon::prelude::*;
use regime_core::{Sweep, SweepGrid, SweepResult, TermDataset};

use crate::error::{CliError, Result};

/// Thread pool with `threads` workers; 0 picks one per available core.
pub fn thread_pool(threads: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Config(format!("cannot start {threads} worker threads: {e}")))
}

/// Evaluates the grid rows on `pool`. The result does not depend on the
/// number of threads.
pub fn run_sweep_parallel(ds: &TermDataset, grid: SweepGrid, pool: &rayon::ThreadPool) -> Result<SweepResult> {
    let sweep = Sweep::new(ds, grid)?;
    let rows = pool.install(|| (0..sweep.n_rows()).into_par_iter().map(|r| sweep.evaluate_row(r)).collect());
    Ok(sweep.finish(rows)?)
}
