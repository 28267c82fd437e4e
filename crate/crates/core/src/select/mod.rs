//! Hypothesis selection: one dominance mask per cluster.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::dataset::TermDataset;
use crate::error::{Error, Result};
use crate::score::{Hypothesis, HypothesisArray};

mod chs;
mod spca;

pub use chs::{chs_select, DEFAULT_CHS_CEILING};
pub use spca::{sparse_pca_select, SpcaOutcome};

/// Cluster label; negative labels mark noise / unassigned samples.
pub type Label = i64;
pub const NOISE: Label = -1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SelectorKind {
    #[default]
    Chs,
    SparsePca,
}

/// Objective the exhaustive search maximizes for a cluster.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Representative {
    /// Weighted mean of the members' local scores.
    #[default]
    MeanScore,
    /// Local score of the weighted-mean absolute term vector.
    MeanAbsVector,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectorConfig {
    pub kind: SelectorKind,
    /// Soft-threshold level for sparse PCA.
    pub alpha: f64,
    pub n_components: usize,
    pub representative: Representative,
    /// Scale centred cluster columns to unit variance before sparse PCA.
    pub spca_normalize: bool,
    pub chs_ceiling: usize,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for SelectorConfig {
    fn default() -> Self {
        Self {
            kind: SelectorKind::Chs,
            alpha: 1.0,
            n_components: 1,
            representative: Representative::MeanScore,
            spca_normalize: false,
            chs_ceiling: DEFAULT_CHS_CEILING,
            max_iter: 500,
            tol: 1e-6,
        }
    }
}

impl SelectorConfig {
    pub fn chs() -> Self {
        Self::default()
    }

    pub fn sparse_pca(alpha: f64) -> Self {
        Self { kind: SelectorKind::SparsePca, alpha, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.kind == SelectorKind::SparsePca && !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::Config(alloc::format!("sparse-pca alpha must be positive, got {}", self.alpha)));
        }
        if self.n_components == 0 {
            return Err(Error::Config("n_components must be at least 1".into()));
        }
        Ok(())
    }
}

/// Hypothesis chosen for one cluster.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterHypothesis {
    pub cluster_id: Label,
    pub hypothesis: Hypothesis,
    /// Weighted mean local score of the members under `hypothesis`.
    pub cluster_score: f64,
    pub size: usize,
    /// False when an iterative selector stopped at its iteration cap.
    pub converged: bool,
}

/// Runs the configured selector on one cluster.
pub fn select_for_cluster(
    ds: &TermDataset,
    cluster_id: Label,
    members: &[usize],
    weights: &[f64],
    config: &SelectorConfig,
) -> Result<ClusterHypothesis> {
    config.validate()?;
    let mut out = match config.kind {
        SelectorKind::Chs => chs_select(ds, members, weights, config)?,
        SelectorKind::SparsePca => sparse_pca_select(ds, members, weights, config)?.hypothesis,
    };
    out.cluster_id = cluster_id;
    Ok(out)
}

/// Expands per-cluster hypotheses to one hypothesis per observation. Noise
/// labels get the all-true mask.
pub fn broadcast(cluster_hyps: &[ClusterHypothesis], labels: &[Label], n_terms: usize) -> Result<HypothesisArray> {
    let by_id: BTreeMap<Label, Hypothesis> = cluster_hyps.iter().map(|c| (c.cluster_id, c.hypothesis)).collect();
    let all = Hypothesis::all_true(n_terms);
    labels
        .iter()
        .map(|&l| {
            if l < 0 {
                Ok(all)
            } else {
                by_id.get(&l).copied().ok_or(Error::MissingHypothesis(l))
            }
        })
        .collect()
}

/// Member indices of each non-negative label, in ascending label order.
pub fn group_members(labels: &[Label]) -> BTreeMap<Label, Vec<usize>> {
    let mut groups: BTreeMap<Label, Vec<usize>> = BTreeMap::new();
    for (i, &l) in labels.iter().enumerate() {
        if l >= 0 {
            groups.entry(l).or_default().push(i);
        }
    }
    groups
}
