//! The magnitude-gap objective.
//!
//! For one observation `e` and a hypothesis selecting the dominant terms, the
//! magnitudes are normalized by the smallest (non-zero) magnitude in `e` and
//! split into a selected set `s` and a remainder `r`:
//!
//! * gap `Γ = log10(min s − max r) / log10(min s + max r)`, floored at 0 and
//!   0 whenever `min s <= max r`;
//! * spread `Ω = log10(max s) − log10(min s)`;
//! * local score `M = Γ / (1 + Ω)`, in `[0, 1]`.
//!
//! The global score is the domain-weighted mean of local scores.

use alloc::format;
use alloc::string::ToString;
use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::dataset::{DegeneratePolicy, TermDataset};
use crate::error::{Error, Result};

/// Binary dominance mask over `dim` equation terms; bit `i` set means term `i`
/// is selected as dominant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Hypothesis {
    bits: u64,
    dim: usize,
}

pub type HypothesisArray = Vec<Hypothesis>;

impl Hypothesis {
    /// A legal mask selects at least two terms.
    pub fn new(bits: u64, dim: usize) -> Result<Self> {
        if !(2..=64).contains(&dim) {
            return Err(Error::Dimensionality { found: dim, min: 2 });
        }
        if dim < 64 && bits >> dim != 0 {
            return Err(Error::IllegalHypothesis { row: 0, reason: format!("bits beyond {dim} terms") });
        }
        if bits.count_ones() < 2 {
            return Err(Error::IllegalHypothesis {
                row: 0,
                reason: "a dominant balance needs at least two selected terms".to_string(),
            });
        }
        Ok(Self { bits, dim })
    }

    pub fn all_true(dim: usize) -> Self {
        assert!((2..=64).contains(&dim), "hypotheses cover 2..=64 terms");
        let bits = if dim == 64 { u64::MAX } else { (1u64 << dim) - 1 };
        Self { bits, dim }
    }

    pub fn from_bools(mask: &[bool]) -> Result<Self> {
        if mask.len() > 64 {
            return Err(Error::TooManyTerms { found: mask.len(), max: 64 });
        }
        let bits = mask.iter().enumerate().fold(0u64, |acc, (i, &b)| acc | ((b as u64) << i));
        Self::new(bits, mask.len())
    }

    /// Selects the named term indices.
    pub fn from_indices(indices: &[usize], dim: usize) -> Result<Self> {
        let mut bits = 0u64;
        for &i in indices {
            if i >= dim {
                return Err(Error::IllegalHypothesis { row: 0, reason: format!("term index {i} out of range") });
            }
            bits |= 1 << i;
        }
        Self::new(bits, dim)
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_selected(&self, term: usize) -> bool {
        self.bits >> term & 1 == 1
    }

    pub fn cardinality(&self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn is_all_true(&self) -> bool {
        self.cardinality() == self.dim
    }

    pub fn to_bools(&self) -> Vec<bool> {
        (0..self.dim).map(|i| self.is_selected(i)).collect()
    }

    /// Compares masks as `[bool]` sequences (term 0 first, `false < true`).
    pub fn lex_cmp(&self, other: &Self) -> core::cmp::Ordering {
        let diff = self.bits ^ other.bits;
        if diff == 0 {
            return self.dim.cmp(&other.dim);
        }
        let first = diff.trailing_zeros();
        if self.bits >> first & 1 == 0 {
            core::cmp::Ordering::Less
        } else {
            core::cmp::Ordering::Greater
        }
    }
}

impl core::fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        for i in 0..self.dim {
            f.write_str(if self.is_selected(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Components of one observation's local score.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LocalScoreBreakdown {
    pub gamma: f64,
    pub omega: f64,
    pub m: f64,
    pub normalized_min_selected: f64,
    /// Zero when the remainder is empty.
    pub normalized_max_remainder: f64,
}

/// Outcome of [`normalize_split`].
#[derive(Debug, Clone, PartialEq)]
pub enum Split {
    Normalized { selected: Vec<f64>, remainder: Vec<f64> },
    /// Every term is exactly zero.
    Degenerate,
}

/// Smallest magnitude of `e`, or the smallest non-zero magnitude when some
/// term is zero. `None` when every term is zero.
fn normalizer(e: &[f64]) -> Option<f64> {
    let m = e.iter().map(|v| v.abs()).filter(|&a| a > 0.0).fold(f64::INFINITY, f64::min);
    (m < f64::INFINITY).then_some(m)
}

/// Splits `|e|` into selected and remainder magnitudes, normalized by the
/// smallest (non-zero) magnitude.
pub fn normalize_split(e: &[f64], h: &Hypothesis) -> Split {
    let Some(scale) = normalizer(e) else {
        return Split::Degenerate;
    };
    let mut selected = Vec::new();
    let mut remainder = Vec::new();
    for (i, v) in e.iter().enumerate() {
        let a = v.abs() / scale;
        if h.is_selected(i) {
            selected.push(a);
        } else {
            remainder.push(a);
        }
    }
    Split::Normalized { selected, remainder }
}

/// Magnitude gap between normalized selected and remainder magnitudes.
///
/// An empty remainder (or one that is entirely zero) is an exact balance and
/// scores 1.
pub fn gamma(s: &[f64], r: &[f64]) -> f64 {
    assert!(!s.is_empty(), "gap needs a selected term");
    let min_s = s.iter().copied().fold(f64::INFINITY, f64::min);
    let max_r = r.iter().copied().fold(0.0, f64::max);
    if max_r == 0.0 {
        return 1.0;
    }
    if min_s <= max_r {
        return 0.0;
    }
    let den = (min_s + max_r).log10();
    assert!(den > 0.0, "gap denominator must be positive in the active branch");
    ((min_s - max_r).log10() / den).max(0.0)
}

/// Decades of spread within the selected magnitudes. `None` when a selected
/// magnitude is zero (a zero term cannot dominate).
pub fn omega(s: &[f64]) -> Option<f64> {
    assert!(!s.is_empty(), "spread needs a selected term");
    let min_s = s.iter().copied().fold(f64::INFINITY, f64::min);
    let max_s = s.iter().copied().fold(0.0, f64::max);
    (min_s > 0.0).then(|| max_s.log10() - min_s.log10())
}

/// Local score of observation `e` under hypothesis `h`.
///
/// Degenerate observations and hypotheses selecting a zero-valued term score 0.
pub fn local_score(e: &[f64], h: &Hypothesis) -> LocalScoreBreakdown {
    match normalizer(e) {
        Some(scale) => scaled_local_score(e, h, scale),
        None => LocalScoreBreakdown::default(),
    }
}

/// [`local_score`] with a precomputed normalizer.
///
/// Works on raw magnitudes and subtracts `log10(scale)` instead of dividing,
/// so tiny normalizers cannot overflow the normalized values.
fn scaled_local_score(e: &[f64], h: &Hypothesis, scale: f64) -> LocalScoreBreakdown {
    let mut min_sel = f64::INFINITY;
    let mut max_sel = 0.0f64;
    let mut max_rem = 0.0f64;
    for (i, v) in e.iter().enumerate() {
        let a = v.abs();
        if h.is_selected(i) {
            min_sel = min_sel.min(a);
            max_sel = max_sel.max(a);
        } else {
            max_rem = max_rem.max(a);
        }
    }
    let normalized_min_selected = min_sel / scale;
    let normalized_max_remainder = max_rem / scale;
    if min_sel == 0.0 {
        return LocalScoreBreakdown { normalized_min_selected, normalized_max_remainder, ..Default::default() };
    }
    let log_scale = scale.log10();
    let gamma = if max_rem == 0.0 {
        1.0
    } else if min_sel <= max_rem {
        0.0
    } else {
        let den = (min_sel + max_rem).log10() - log_scale;
        assert!(den > 0.0, "gap denominator must be positive in the active branch");
        (((min_sel - max_rem).log10() - log_scale) / den).max(0.0)
    };
    let omega = max_sel.log10() - min_sel.log10();
    LocalScoreBreakdown { gamma, omega, m: gamma / (1.0 + omega), normalized_min_selected, normalized_max_remainder }
}

/// Per-observation breakdowns plus the weighted global and full-set scores.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreReport {
    pub local: Vec<LocalScoreBreakdown>,
    pub global_score: f64,
    pub full_set_score: f64,
}

/// Weighted mean of `values` with a fixed left-to-right summation order.
pub(crate) fn weighted_mean(values: impl Iterator<Item = f64>, weights: &[f64]) -> Option<f64> {
    let mut num = 0.0;
    let mut den = 0.0;
    for (v, &w) in values.zip(weights) {
        num += w * v;
        den += w;
    }
    (den > 0.0).then(|| num / den)
}

/// Domain-weighted global score of `hyps` (one per observation) on `ds`.
pub fn global_score(ds: &TermDataset, hyps: &[Hypothesis], policy: DegeneratePolicy) -> Result<ScoreReport> {
    if hyps.len() != ds.n_rows() {
        return Err(Error::Shape(format!("{} hypotheses for {} observations", hyps.len(), ds.n_rows())));
    }
    if let Some(row) = hyps.iter().position(|h| h.dim() != ds.n_terms()) {
        return Err(Error::IllegalHypothesis {
            row,
            reason: format!("mask covers {} terms, data has {}", hyps[row].dim(), ds.n_terms()),
        });
    }
    let weights = ds.effective_weights(policy);
    let all = Hypothesis::all_true(ds.n_terms());
    let local: Vec<_> = ds.rows().zip(hyps).map(|(e, h)| local_score(e, h)).collect();
    let global_score = weighted_mean(local.iter().map(|l| l.m), &weights)
        .ok_or_else(|| Error::Weights("effective weights sum to zero".to_string()))?;
    let full_set_score = weighted_mean(ds.rows().map(|e| local_score(e, &all).m), &weights)
        .ok_or_else(|| Error::Weights("effective weights sum to zero".to_string()))?;
    Ok(ScoreReport { local, global_score, full_set_score })
}
