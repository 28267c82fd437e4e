//! Combinatorial hypothesis selection: score every legal mask, keep the best.

use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::dataset::TermDataset;
use crate::error::{Error, Result};
use crate::score::{local_score, weighted_mean, Hypothesis};
use crate::select::{ClusterHypothesis, Representative, SelectorConfig};

/// 2^16 masks per cluster.
pub const DEFAULT_CHS_CEILING: usize = 16;

/// Exhaustive search over every mask with at least two selected terms.
///
/// Ties go to the mask with more selected terms, then to the
/// lexicographically smallest mask.
pub fn chs_select(
    ds: &TermDataset,
    members: &[usize],
    weights: &[f64],
    config: &SelectorConfig,
) -> Result<ClusterHypothesis> {
    let d = ds.n_terms();
    if d > config.chs_ceiling {
        return Err(Error::ChsCeiling { terms: d, ceiling: config.chs_ceiling });
    }
    if members.is_empty() {
        return Err(Error::InsufficientSamples { needed: 1, found: 0 });
    }
    if weights.len() != members.len() {
        return Err(Error::Shape(alloc::format!("{} weights for {} members", weights.len(), members.len())));
    }

    let representative = match config.representative {
        Representative::MeanScore => None,
        Representative::MeanAbsVector => Some(mean_abs_vector(ds, members, weights)),
    };
    let objective = |h: &Hypothesis| match &representative {
        None => cluster_mean_score(ds, members, weights, h),
        Some(rep) => local_score(rep, h).m,
    };

    let mut best: Option<(Hypothesis, f64)> = None;
    for bits in 3u64..(1u64 << d) {
        if bits.count_ones() < 2 {
            continue;
        }
        let h = Hypothesis::new(bits, d)?;
        let score = objective(&h);
        let better = match &best {
            None => true,
            Some((bh, bs)) => prefer(score, &h, *bs, bh) == Ordering::Greater,
        };
        if better {
            best = Some((h, score));
        }
    }
    let (hypothesis, objective_score) = best.expect("d >= 2 always admits the all-true mask");
    let cluster_score = match config.representative {
        Representative::MeanScore => objective_score,
        Representative::MeanAbsVector => cluster_mean_score(ds, members, weights, &hypothesis),
    };
    Ok(ClusterHypothesis { cluster_id: 0, hypothesis, cluster_score, size: members.len(), converged: true })
}

/// Total order used to pick the winning mask.
fn prefer(score: f64, h: &Hypothesis, other_score: f64, other: &Hypothesis) -> Ordering {
    score
        .partial_cmp(&other_score)
        .unwrap_or(Ordering::Equal)
        .then(h.cardinality().cmp(&other.cardinality()))
        .then(other.lex_cmp(h))
}

/// Weighted mean local score of `members` under `h`; 0 when the members
/// carry no weight.
pub(crate) fn cluster_mean_score(ds: &TermDataset, members: &[usize], weights: &[f64], h: &Hypothesis) -> f64 {
    let scores = members.iter().map(|&i| local_score(ds.row(i), h).m);
    weighted_mean(scores, weights).unwrap_or(0.0)
}

fn mean_abs_vector(ds: &TermDataset, members: &[usize], weights: &[f64]) -> Vec<f64> {
    let d = ds.n_terms();
    let mut acc = alloc::vec![0.0; d];
    let mut wsum = 0.0;
    for (&i, &w) in members.iter().zip(weights) {
        for (a, v) in acc.iter_mut().zip(ds.row(i)) {
            *a += w * v.abs();
        }
        wsum += w;
    }
    if wsum > 0.0 {
        acc.iter_mut().for_each(|a| *a /= wsum);
    }
    acc
}
