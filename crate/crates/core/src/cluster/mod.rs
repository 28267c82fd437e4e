//! Partitioning of (standardized) observations into candidate regimes.
//!
//! Both clusterers take row-major `N x D` data and return hard labels in
//! `0..n_clusters`, numbered in order of first appearance so that identical
//! partitions always carry identical labels. Another clusterer only needs to
//! produce a [`ClusterAssignment`]; everything downstream works from labels.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::select::Label;

mod gmm;
mod kmeans;

pub use gmm::gmm_fit;
pub use kmeans::kmeans_fit;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ClustererKind {
    #[default]
    KMeans,
    Gmm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Covariance {
    #[default]
    Full,
    Diagonal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClustererConfig {
    pub kind: ClustererKind,
    pub k: usize,
    pub seed: u64,
    /// Independent restarts; the best objective wins.
    pub n_init: usize,
    pub max_iter: usize,
    pub tol: f64,
    /// Mixture covariance structure (ignored by k-means).
    pub covariance: Covariance,
}

impl ClustererConfig {
    pub fn kmeans(k: usize, seed: u64) -> Self {
        Self { kind: ClustererKind::KMeans, k, seed, n_init: 10, max_iter: 300, tol: 1e-6, covariance: Covariance::Full }
    }

    pub fn gmm(k: usize, seed: u64) -> Self {
        Self { kind: ClustererKind::Gmm, ..Self::kmeans(k, seed) }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Config("k must be at least 1".into()));
        }
        if self.n_init == 0 || self.max_iter == 0 {
            return Err(Error::Config("n_init and max_iter must be at least 1".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::Config(alloc::format!("tolerance must be positive, got {}", self.tol)));
        }
        Ok(())
    }

    /// Runs the configured clusterer.
    pub fn fit(&self, data: &[f64], d: usize) -> Result<ClusterAssignment> {
        match self.kind {
            ClustererKind::KMeans => kmeans_fit(data, d, self),
            ClustererKind::Gmm => gmm_fit(data, d, self),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterAssignment {
    pub labels: Vec<Label>,
    /// Inertia for k-means, total log-likelihood for mixtures.
    pub objective: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Objective after every iteration of the winning restart.
    pub trace: Vec<f64>,
    /// Number of distinct labels; below `k` only when clusters collapsed.
    pub n_clusters: usize,
    pub warnings: Vec<String>,
}

pub(crate) fn check_input(data: &[f64], d: usize, config: &ClustererConfig) -> Result<usize> {
    config.validate()?;
    if d == 0 || data.len() % d != 0 {
        return Err(Error::Shape(alloc::format!("{} values do not form rows of {d}", data.len())));
    }
    let n = data.len() / d;
    if n < config.k {
        return Err(Error::InsufficientSamples { needed: config.k, found: n });
    }
    if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { row: pos / d, col: pos % d });
    }
    Ok(n)
}

pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Renumbers labels by order of first appearance. Returns the number of
/// distinct labels.
pub(crate) fn relabel_compact(labels: &mut [Label]) -> usize {
    let mut map: Vec<(Label, Label)> = Vec::new();
    for l in labels.iter_mut() {
        let next = map.len() as Label;
        let new = match map.iter().find(|(old, _)| old == l) {
            Some(&(_, new)) => new,
            None => {
                map.push((*l, next));
                next
            }
        };
        *l = new;
    }
    map.len()
}
