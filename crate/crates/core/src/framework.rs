//! The regime search: cluster, select a hypothesis per cluster, score, and
//! keep the best hyperparameters over a grid.
//!
//! [`Sweep`] splits a grid search into independent rows (one per `k`) so a
//! caller can evaluate rows on any number of threads and still obtain the
//! same [`SweepResult`] as the sequential [`run_sweep`].

use alloc::vec;
use alloc::vec::Vec;

use crate::cluster::{ClusterAssignment, ClustererConfig, ClustererKind, Covariance};
use crate::dataset::{standardize, DegeneratePolicy, TermDataset};
use crate::error::{Error, Result};
use crate::rng::derive_seed;
use crate::score::{global_score, Hypothesis, HypothesisArray, ScoreReport};
use crate::select::{broadcast, group_members, select_for_cluster, ClusterHypothesis, Label, SelectorConfig, SelectorKind};

/// Scores within this distance of the grid maximum count as ties.
pub const TIE_TOLERANCE: f64 = 5e-13;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    pub clusterer: ClustererKind,
    pub covariance: Covariance,
    pub k_values: Vec<usize>,
    /// Sparsity levels; ignored by the exhaustive selector.
    pub alpha_values: Vec<f64>,
    pub selector: SelectorConfig,
    pub seed: u64,
    pub degenerate_policy: DegeneratePolicy,
    /// Cluster on z-scored terms (the default) or on raw terms.
    pub standardize: bool,
    pub n_init: usize,
    pub max_iter: usize,
    pub tol: f64,
}

impl SweepGrid {
    pub fn new(clusterer: ClustererKind, k_values: Vec<usize>, selector: SelectorConfig) -> Self {
        Self {
            clusterer,
            covariance: Covariance::Full,
            k_values,
            alpha_values: Vec::new(),
            selector,
            seed: 0,
            degenerate_policy: DegeneratePolicy::Penalize,
            standardize: true,
            n_init: 10,
            max_iter: 300,
            tol: 1e-6,
        }
    }

    pub fn with_alphas(mut self, alphas: Vec<f64>) -> Self {
        self.alpha_values = alphas;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// `count` values spaced evenly in log10 between `lo` and `hi` inclusive.
    pub fn log_spaced(lo: f64, hi: f64, count: usize) -> Vec<f64> {
        #[allow(unused_imports)]
        use num_traits::Float;
        match count {
            0 => Vec::new(),
            1 => vec![lo],
            _ => {
                let (a, b) = (lo.log10(), hi.log10());
                (0..count).map(|i| 10f64.powf(a + (b - a) * i as f64 / (count - 1) as f64)).collect()
            }
        }
    }

    /// Sorted, de-duplicated copy; `None` columns stand for "no alpha".
    fn normalized(&self) -> Result<(Vec<usize>, Vec<Option<f64>>)> {
        let mut ks = self.k_values.clone();
        ks.sort_unstable();
        ks.dedup();
        if ks.is_empty() || ks[0] == 0 {
            return Err(Error::Config("k values must be non-empty and positive".into()));
        }
        let alphas = match self.selector.kind {
            SelectorKind::Chs => vec![None],
            SelectorKind::SparsePca => {
                let mut a = self.alpha_values.clone();
                if a.is_empty() {
                    return Err(Error::Config("the sparse-pca selector needs at least one alpha".into()));
                }
                if let Some(bad) = a.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
                    return Err(Error::Config(alloc::format!("alpha values must be positive, got {bad}")));
                }
                a.sort_by(f64::total_cmp);
                a.dedup();
                a.into_iter().map(Some).collect()
            }
        };
        Ok((ks, alphas))
    }
}

/// Location of a grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub k: usize,
    pub alpha: Option<f64>,
    /// Seed handed to the clusterer.
    pub seed: u64,
}

/// Selection, broadcast and scoring for one labeling.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelingOutcome {
    pub hypotheses: HypothesisArray,
    pub report: ScoreReport,
    pub clusters: Vec<ClusterHypothesis>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub k_values: Vec<usize>,
    pub alpha_values: Vec<Option<f64>>,
    /// `grid_scores[i][j]` is the global score at `(k_values[i], alpha_values[j])`,
    /// `None` where the point failed.
    pub grid_scores: Vec<Vec<Option<f64>>>,
    pub best_point: GridPoint,
    pub best_assignment: ClusterAssignment,
    pub best_hypotheses: Vec<ClusterHypothesis>,
    pub best_global_score: f64,
    pub full_set_score: f64,
    pub fell_back_to_full_set: bool,
    /// Per-observation hypotheses actually reported: all-true after a fallback.
    pub hypotheses: HypothesisArray,
    pub report: ScoreReport,
    /// Grid points that failed, with the reason.
    pub failures: Vec<(GridPoint, Error)>,
}

impl SweepResult {
    /// The score that goes with `hypotheses`: never below the full-set score.
    pub fn reported_score(&self) -> f64 {
        self.report.global_score
    }
}

/// Scores an externally supplied partition. Negative labels are noise and
/// keep the all-true hypothesis.
pub fn evaluate_labeling(
    ds: &TermDataset,
    labels: &[Label],
    selector: &SelectorConfig,
    policy: DegeneratePolicy,
) -> Result<LabelingOutcome> {
    if labels.len() != ds.n_rows() {
        return Err(Error::Shape(alloc::format!("{} labels for {} observations", labels.len(), ds.n_rows())));
    }
    let weights = ds.effective_weights(policy);
    let mut clusters = Vec::new();
    for (id, members) in group_members(labels) {
        let w: Vec<f64> = members.iter().map(|&i| weights[i]).collect();
        clusters.push(select_for_cluster(ds, id, &members, &w, selector)?);
    }
    let hypotheses = broadcast(&clusters, labels, ds.n_terms())?;
    let report = global_score(ds, &hypotheses, policy)?;
    Ok(LabelingOutcome { hypotheses, report, clusters })
}

/// A prepared grid search.
#[derive(Debug, Clone)]
pub struct Sweep<'a> {
    ds: &'a TermDataset,
    grid: SweepGrid,
    k_values: Vec<usize>,
    alpha_values: Vec<Option<f64>>,
    cluster_input: Vec<f64>,
    full_set_score: f64,
}

/// Everything one `k` row produced.
#[derive(Debug, Clone)]
pub struct RowOutcome {
    pub row: usize,
    pub scores: Vec<Option<f64>>,
    best: Option<(usize, ClusterAssignment, LabelingOutcome)>,
    failures: Vec<(GridPoint, Error)>,
}

impl<'a> Sweep<'a> {
    pub fn new(ds: &'a TermDataset, grid: SweepGrid) -> Result<Self> {
        grid.selector.validate()?;
        let (k_values, alpha_values) = grid.normalized()?;
        if grid.selector.kind == SelectorKind::Chs && ds.n_terms() > grid.selector.chs_ceiling {
            return Err(Error::ChsCeiling { terms: ds.n_terms(), ceiling: grid.selector.chs_ceiling });
        }
        let probe = ClustererConfig {
            kind: grid.clusterer,
            k: 1,
            seed: grid.seed,
            n_init: grid.n_init,
            max_iter: grid.max_iter,
            tol: grid.tol,
            covariance: grid.covariance,
        };
        probe.validate()?;
        let cluster_input = if grid.standardize { standardize(ds)?.z } else { ds.terms().to_vec() };
        let all = vec![Hypothesis::all_true(ds.n_terms()); ds.n_rows()];
        let full_set_score = global_score(ds, &all, grid.degenerate_policy)?.global_score;
        Ok(Self { ds, grid, k_values, alpha_values, cluster_input, full_set_score })
    }

    pub fn n_rows(&self) -> usize {
        self.k_values.len()
    }

    pub fn k_values(&self) -> &[usize] {
        &self.k_values
    }

    pub fn alpha_values(&self) -> &[Option<f64>] {
        &self.alpha_values
    }

    pub fn full_set_score(&self) -> f64 {
        self.full_set_score
    }

    /// Clusters once for `k_values[row]` and scores every alpha column.
    pub fn evaluate_row(&self, row: usize) -> RowOutcome {
        let k = self.k_values[row];
        let seed = derive_seed(self.grid.seed, &[k as u64]);
        let point = |alpha| GridPoint { k, alpha, seed };
        let config = ClustererConfig {
            kind: self.grid.clusterer,
            k,
            seed,
            n_init: self.grid.n_init,
            max_iter: self.grid.max_iter,
            tol: self.grid.tol,
            covariance: self.grid.covariance,
        };
        let mut scores = vec![None; self.alpha_values.len()];
        let mut failures = Vec::new();
        let assignment = match config.fit(&self.cluster_input, self.ds.n_terms()) {
            Ok(a) => a,
            Err(e) => {
                failures.extend(self.alpha_values.iter().map(|&a| (point(a), e.clone())));
                return RowOutcome { row, scores, best: None, failures };
            }
        };

        let mut candidates: Vec<Option<LabelingOutcome>> = Vec::with_capacity(self.alpha_values.len());
        for (j, &alpha) in self.alpha_values.iter().enumerate() {
            let mut selector = self.grid.selector;
            if let Some(a) = alpha {
                selector.alpha = a;
            }
            match evaluate_labeling(self.ds, &assignment.labels, &selector, self.grid.degenerate_policy) {
                Ok(outcome) => {
                    scores[j] = Some(outcome.report.global_score);
                    candidates.push(Some(outcome));
                }
                Err(e) => {
                    failures.push((point(alpha), e));
                    candidates.push(None);
                }
            }
        }
        let best = first_near_max(&scores).map(|j| {
            let outcome = candidates[j].take().expect("scored column has an outcome");
            (j, assignment, outcome)
        });
        RowOutcome { row, scores, best, failures }
    }

    /// Assembles row outcomes (in any order) into the final result.
    pub fn finish(&self, mut rows: Vec<RowOutcome>) -> Result<SweepResult> {
        rows.sort_by_key(|r| r.row);
        if rows.len() != self.k_values.len() || rows.iter().enumerate().any(|(i, r)| r.row != i) {
            return Err(Error::Shape("sweep rows are missing or duplicated".into()));
        }
        let grid_scores: Vec<Vec<Option<f64>>> = rows.iter().map(|r| r.scores.clone()).collect();
        let failures: Vec<(GridPoint, Error)> = rows.iter().flat_map(|r| r.failures.iter().cloned()).collect();
        let row_best: Vec<Option<f64>> =
            rows.iter().map(|r| r.best.as_ref().map(|(j, _, _)| r.scores[*j].expect("best is scored"))).collect();
        let winner = first_near_max(&row_best).ok_or(Error::SweepFailed)?;
        let (j, best_assignment, outcome) = rows.swap_remove(winner).best.expect("winning row has a candidate");
        let k = self.k_values[winner];
        let best_point = GridPoint { k, alpha: self.alpha_values[j], seed: derive_seed(self.grid.seed, &[k as u64]) };
        let best_global_score = outcome.report.global_score;
        let fell_back_to_full_set = best_global_score <= self.full_set_score;
        let (hypotheses, report) = if fell_back_to_full_set {
            let all = vec![Hypothesis::all_true(self.ds.n_terms()); self.ds.n_rows()];
            let report = global_score(self.ds, &all, self.grid.degenerate_policy)?;
            (all, report)
        } else {
            (outcome.hypotheses, outcome.report)
        };
        Ok(SweepResult {
            k_values: self.k_values.clone(),
            alpha_values: self.alpha_values.clone(),
            grid_scores,
            best_point,
            best_assignment,
            best_hypotheses: outcome.clusters,
            best_global_score,
            full_set_score: self.full_set_score,
            fell_back_to_full_set,
            hypotheses,
            report,
            failures,
        })
    }
}

/// Index of the first entry within [`TIE_TOLERANCE`] of the maximum.
fn first_near_max(values: &[Option<f64>]) -> Option<usize> {
    let max = values.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max);
    values.iter().position(|v| v.is_some_and(|v| v >= max - TIE_TOLERANCE))
}

/// Evaluates the whole grid sequentially.
pub fn run_sweep(ds: &TermDataset, grid: SweepGrid) -> Result<SweepResult> {
    let sweep = Sweep::new(ds, grid)?;
    let rows = (0..sweep.n_rows()).map(|r| sweep.evaluate_row(r)).collect();
    sweep.finish(rows)
}
