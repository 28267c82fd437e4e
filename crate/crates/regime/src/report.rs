//! Plot-ready outputs: score grids, summaries and per-observation tables.

use std::fmt::Write as _;

use regime_core::{ClusterHypothesis, GridPoint, Hypothesis, ScoreReport, SweepResult, TermDataset};
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointSummary {
    pub k: usize,
    pub alpha: Option<f64>,
    pub seed: u64,
}

impl From<&GridPoint> for PointSummary {
    fn from(p: &GridPoint) -> Self {
        Self { k: p.k, alpha: p.alpha, seed: p.seed }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterSummary {
    pub id: i64,
    pub size: usize,
    pub mask: String,
    pub names: Vec<String>,
    pub cluster_score: f64,
}

impl ClusterSummary {
    pub fn new(c: &ClusterHypothesis, term_names: &[String]) -> Self {
        Self {
            id: c.cluster_id,
            size: c.size,
            mask: c.hypothesis.to_string(),
            names: selected_names(&c.hypothesis, term_names),
            cluster_score: c.cluster_score,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FailureSummary {
    pub k: usize,
    pub alpha: Option<f64>,
    pub error: String,
}

/// The `fit` summary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitSummary {
    pub best_point: PointSummary,
    /// Score of the reported hypotheses (the full-set score after a fallback).
    pub global_score: f64,
    /// Highest score on the grid.
    pub best_grid_score: f64,
    pub full_set_score: f64,
    pub fell_back: bool,
    pub clusters: Vec<ClusterSummary>,
    pub failures: Vec<FailureSummary>,
    pub warnings: Vec<String>,
}

impl FitSummary {
    pub fn new(result: &SweepResult, ds: &TermDataset) -> Self {
        Self {
            best_point: (&result.best_point).into(),
            global_score: result.reported_score(),
            best_grid_score: result.best_global_score,
            full_set_score: result.full_set_score,
            fell_back: result.fell_back_to_full_set,
            clusters: result.best_hypotheses.iter().map(|c| ClusterSummary::new(c, ds.term_names())).collect(),
            failures: result
                .failures
                .iter()
                .map(|(p, e)| FailureSummary { k: p.k, alpha: p.alpha, error: e.to_string() })
                .collect(),
            warnings: result.best_assignment.warnings.clone(),
        }
    }
}

/// The `score` summary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreSummary {
    pub global_score: f64,
    pub full_set_score: f64,
    pub observations: usize,
    pub degenerate_observations: usize,
    /// Present when the hypotheses came from a labeling.
    pub clusters: Vec<ClusterSummary>,
}

pub fn selected_names(h: &Hypothesis, names: &[String]) -> Vec<String> {
    names.iter().enumerate().filter(|(i, _)| h.is_selected(*i)).map(|(_, n)| n.clone()).collect()
}

/// Rows are `k`, columns alpha (`none` for the exhaustive selector); empty
/// cells mark failed grid points.
pub fn grid_csv(result: &SweepResult) -> String {
    let mut out = String::from("k");
    for a in &result.alpha_values {
        match a {
            Some(v) => write!(out, ",{v}").unwrap(),
            None => out.push_str(",none"),
        }
    }
    out.push('\n');
    for (k, row) in result.k_values.iter().zip(&result.grid_scores) {
        write!(out, "{k}").unwrap();
        for cell in row {
            match cell {
                Some(v) => write!(out, ",{v}").unwrap(),
                None => out.push(','),
            }
        }
        out.push('\n');
    }
    out
}

fn coord_header(ds: &TermDataset) -> String {
    ds.coord_names().iter().map(|n| format!(",{n}")).collect()
}

fn coord_cells(ds: &TermDataset, row: usize) -> String {
    ds.coord(row).unwrap_or(&[]).iter().map(|v| format!(",{v}")).collect()
}

/// One line per observation: coordinates, cluster label and reported mask.
pub fn labels_csv(ds: &TermDataset, labels: &[i64], hypotheses: &[Hypothesis]) -> String {
    let mut out = format!("row{},label,mask\n", coord_header(ds));
    for (i, (l, h)) in labels.iter().zip(hypotheses).enumerate() {
        writeln!(out, "{i}{},{l},{h}", coord_cells(ds, i)).unwrap();
    }
    out
}

/// One line per observation: local score components and the mask scored.
pub fn local_scores_csv(ds: &TermDataset, report: &ScoreReport, hypotheses: &[Hypothesis]) -> String {
    let mut out = format!("row{},m,gamma,omega,mask\n", coord_header(ds));
    for (i, (l, h)) in report.local.iter().zip(hypotheses).enumerate() {
        writeln!(out, "{i}{},{},{},{},{h}", coord_cells(ds, i), l.m, l.gamma, l.omega).unwrap();
    }
    out
}
