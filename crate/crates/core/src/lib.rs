//! Dominant-balance regime discovery over equation-term data.
//!
//! Observations are vectors of governing-equation terms. A *hypothesis* marks
//! which terms dominate an observation; the magnitude-gap score rates how
//! cleanly the selected terms dominate the rest. Regimes are found by
//! clustering the observations, selecting one hypothesis per cluster, and
//! keeping the clustering/selection hyperparameters that maximize the
//! domain-weighted global score (falling back to the all-terms hypothesis when
//! nothing beats it).
//!
//! The crate is `no_std` and needs only `alloc`; file formats, timing and the
//! command line live in the `regime` crate.

#![no_std]

extern crate alloc;

pub mod cluster;
pub mod dataset;
pub mod error;
pub mod framework;
pub mod generators;
mod linalg;
pub mod rng;
pub mod score;
pub mod select;

pub use cluster::{gmm_fit, kmeans_fit, ClusterAssignment, ClustererConfig, ClustererKind, Covariance};
pub use dataset::{compute_area_weights, standardize, DegeneratePolicy, StandardizedView, TermDataset};
pub use error::{Error, Result};
pub use framework::{evaluate_labeling, run_sweep, GridPoint, LabelingOutcome, RowOutcome, Sweep, SweepGrid, SweepResult};
pub use score::{
    gamma, global_score, local_score, normalize_split, omega, Hypothesis, HypothesisArray,
    LocalScoreBreakdown, ScoreReport,
};
pub use select::{
    broadcast, chs_select, select_for_cluster, sparse_pca_select, ClusterHypothesis, Label,
    Representative, SelectorConfig, SelectorKind, NOISE,
};
