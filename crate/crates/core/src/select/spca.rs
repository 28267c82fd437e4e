//! Sparse-principal-component selection.
//!
//! Each component solves the L1-penalized rank-one approximation
//! `min ||X - u vᵀ||² + 2α||v||₁` with `||u|| = 1` by alternating
//! `u = Xv / ||Xv||` and `v = soft(Xᵀu, α)`. Everything runs on the Gram
//! matrix `XᵀX`, so the per-iteration cost is independent of cluster size.
//! Further components come from rank-one deflation. A term is active when any
//! component loads on it.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::dataset::TermDataset;
use crate::error::{Error, Result};
use crate::linalg::{dot, leading_eigenvector, mat_vec};
use crate::score::Hypothesis;
use crate::select::chs::{chs_select, cluster_mean_score};
use crate::select::{ClusterHypothesis, SelectorConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct SpcaOutcome {
    pub hypothesis: ClusterHypothesis,
    /// Loadings per component (`n_components x D`), empty when the selector
    /// fell back to another rule.
    pub loadings: Vec<Vec<f64>>,
    /// Fewer than two loadings survived and the two highest-variance terms were used.
    pub used_variance_fallback: bool,
    /// The cluster was too small for PCA and exhaustive selection ran instead.
    pub used_chs_fallback: bool,
}

pub fn sparse_pca_select(
    ds: &TermDataset,
    members: &[usize],
    weights: &[f64],
    config: &SelectorConfig,
) -> Result<SpcaOutcome> {
    config.validate()?;
    let d = ds.n_terms();
    if members.is_empty() {
        return Err(Error::InsufficientSamples { needed: 1, found: 0 });
    }
    if weights.len() != members.len() {
        return Err(Error::Shape(alloc::format!("{} weights for {} members", weights.len(), members.len())));
    }
    let variances = column_variances(ds, members);

    if members.len() < d + 1 {
        if d <= config.chs_ceiling {
            let hypothesis = chs_select(ds, members, weights, config)?;
            return Ok(SpcaOutcome {
                hypothesis,
                loadings: Vec::new(),
                used_variance_fallback: false,
                used_chs_fallback: true,
            });
        }
        let h = top_two_variance(&variances, d);
        return Ok(finish(ds, members, weights, h, Vec::new(), true));
    }

    let gram = centered_gram(ds, members, &variances, config.spca_normalize);
    let mut g = gram;
    let mut loadings = Vec::with_capacity(config.n_components);
    let mut converged = true;
    for _ in 0..config.n_components {
        let Some((v, ok)) = sparse_component(&g, d, config) else {
            break;
        };
        converged &= ok;
        if v.iter().all(|&x| x == 0.0) {
            loadings.push(v);
            break;
        }
        deflate(&mut g, d, &v);
        loadings.push(v);
    }

    let active = (0..d).filter(|&j| loadings.iter().any(|v| v[j] != 0.0));
    let bits = active.fold(0u64, |acc, j| acc | 1 << j);
    let (h, fallback) = if bits.count_ones() >= 2 {
        (Hypothesis::new(bits, d)?, false)
    } else {
        (top_two_variance(&variances, d), true)
    };
    let mut out = finish(ds, members, weights, h, loadings, fallback);
    out.hypothesis.converged = converged;
    Ok(out)
}

fn finish(
    ds: &TermDataset,
    members: &[usize],
    weights: &[f64],
    hypothesis: Hypothesis,
    loadings: Vec<Vec<f64>>,
    used_variance_fallback: bool,
) -> SpcaOutcome {
    let cluster_score = cluster_mean_score(ds, members, weights, &hypothesis);
    SpcaOutcome {
        hypothesis: ClusterHypothesis { cluster_id: 0, hypothesis, cluster_score, size: members.len(), converged: true },
        loadings,
        used_variance_fallback,
        used_chs_fallback: false,
    }
}

fn soft_threshold(x: f64, level: f64) -> f64 {
    if x > level {
        x - level
    } else if x < -level {
        x + level
    } else {
        0.0
    }
}

/// One sparse loading vector from Gram matrix `g`. Returns the loadings and
/// whether the alternation converged. `None` when `g` is zero.
fn sparse_component(g: &[f64], d: usize, config: &SelectorConfig) -> Option<(Vec<f64>, bool)> {
    let mut v = leading_eigenvector(g, d, 1000, 1e-12)?;
    let mut best = vec![0.0; d];
    for _ in 0..config.max_iter {
        let gv = mat_vec(g, d, &v);
        let norm_sq = dot(&v, &gv);
        if !(norm_sq > 0.0) {
            return Some((vec![0.0; d], true));
        }
        // Xᵀu with u = Xv / ||Xv||.
        let norm = norm_sq.sqrt();
        let next: Vec<f64> = gv.iter().map(|x| soft_threshold(x / norm, config.alpha)).collect();
        let scale = next.iter().fold(1.0f64, |m, x| m.max(x.abs()));
        let change = next.iter().zip(&v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let all_zero = next.iter().all(|&x| x == 0.0);
        best.clone_from(&next);
        if all_zero || change <= config.tol * scale {
            return Some((next, true));
        }
        v = next;
    }
    Some((best, false))
}

/// `G <- (X - u vᵀ)ᵀ (X - u vᵀ)` with `u = Xv / ||Xv||`.
fn deflate(g: &mut [f64], d: usize, v: &[f64]) {
    let gv = mat_vec(g, d, v);
    let norm_sq = dot(v, &gv);
    if !(norm_sq > 0.0) {
        return;
    }
    let p: Vec<f64> = gv.iter().map(|x| x / norm_sq.sqrt()).collect();
    for i in 0..d {
        for j in 0..d {
            g[i * d + j] += v[i] * v[j] - v[i] * p[j] - p[i] * v[j];
        }
    }
}

fn column_variances(ds: &TermDataset, members: &[usize]) -> Vec<f64> {
    let d = ds.n_terms();
    let n = members.len() as f64;
    let mut mean = vec![0.0; d];
    for &i in members {
        mean.iter_mut().zip(ds.row(i)).for_each(|(m, v)| *m += v);
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut var = vec![0.0; d];
    for &i in members {
        for ((s, v), m) in var.iter_mut().zip(ds.row(i)).zip(&mean) {
            *s += (v - m) * (v - m);
        }
    }
    var.iter_mut().for_each(|s| *s /= n);
    var
}

fn centered_gram(ds: &TermDataset, members: &[usize], variances: &[f64], normalize: bool) -> Vec<f64> {
    let d = ds.n_terms();
    let n = members.len() as f64;
    let mut mean = vec![0.0; d];
    for &i in members {
        mean.iter_mut().zip(ds.row(i)).for_each(|(m, v)| *m += v);
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let scale: Vec<f64> = variances
        .iter()
        .map(|&v| if normalize && v > 0.0 { 1.0 / v.sqrt() } else { 1.0 })
        .collect();
    let mut g = vec![0.0; d * d];
    let mut x = vec![0.0; d];
    for &i in members {
        for (j, v) in ds.row(i).iter().enumerate() {
            x[j] = (v - mean[j]) * scale[j];
        }
        for a in 0..d {
            for b in a..d {
                g[a * d + b] += x[a] * x[b];
            }
        }
    }
    for a in 0..d {
        for b in 0..a {
            g[a * d + b] = g[b * d + a];
        }
    }
    g
}

fn top_two_variance(variances: &[f64], d: usize) -> Hypothesis {
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| variances[b].total_cmp(&variances[a]).then(a.cmp(&b)));
    Hypothesis::from_indices(&order[..2], d).expect("two distinct indices")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use rand_distr::{Distribution, StandardNormal};

    /// 4 strongly correlated columns with variance ~1 around magnitude 5 and
    /// 4 independent columns with variance ~1e-4 around zero.
    fn mixed_variance_cluster(n: usize) -> TermDataset {
        let mut rng = rng_from_seed(11);
        let mut terms = Vec::with_capacity(n * 8);
        for _ in 0..n {
            let f: f64 = StandardNormal.sample(&mut rng);
            for j in 0..4 {
                let noise: f64 = StandardNormal.sample(&mut rng);
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                terms.push(sign * (5.0 + f + 0.05 * noise));
            }
            for _ in 0..4 {
                let noise: f64 = StandardNormal.sample(&mut rng);
                terms.push(1e-2 * noise);
            }
        }
        TermDataset::new(terms, 8, None).unwrap()
    }

    fn run(ds: &TermDataset, alpha: f64) -> SpcaOutcome {
        let members: Vec<usize> = (0..ds.n_rows()).collect();
        let weights = vec![1.0; members.len()];
        sparse_pca_select(ds, &members, &weights, &SelectorConfig::sparse_pca(alpha)).unwrap()
    }

    #[test]
    fn keeps_exactly_the_high_variance_columns() {
        let ds = mixed_variance_cluster(400);
        let members: Vec<usize> = (0..ds.n_rows()).collect();
        let weights = vec![1.0; members.len()];
        let chs = chs_select(&ds, &members, &weights, &SelectorConfig::chs()).unwrap();
        assert_eq!(chs.hypothesis.bits(), 0b0000_1111);
        for alpha in [0.5, 1.0, 3.0, 10.0] {
            let out = run(&ds, alpha);
            assert_eq!(out.hypothesis.hypothesis, chs.hypothesis, "alpha = {alpha}");
            assert!(!out.used_variance_fallback);
        }
    }

    #[test]
    fn tiny_alpha_keeps_everything() {
        let out = run(&mixed_variance_cluster(400), 1e-9);
        assert!(out.hypothesis.hypothesis.is_all_true());
    }

    #[test]
    fn huge_alpha_falls_back_to_top_two_variance() {
        let ds = mixed_variance_cluster(400);
        let out = run(&ds, 1e6);
        assert!(out.used_variance_fallback);
        assert_eq!(out.hypothesis.hypothesis.cardinality(), 2);
        assert_eq!(out.hypothesis.hypothesis.bits() & 0b1111_0000, 0);
    }

    #[test]
    fn small_cluster_uses_exhaustive_search() {
        let ds = TermDataset::new(vec![10.0, -10.0, 0.1, -0.1], 4, None).unwrap();
        let out = sparse_pca_select(&ds, &[0], &[1.0], &SelectorConfig::sparse_pca(1.0)).unwrap();
        assert!(out.used_chs_fallback);
        assert_eq!(out.hypothesis.hypothesis.bits(), 0b0011);
    }

    #[test]
    fn soft_threshold_shrinks_toward_zero() {
        assert_eq!(soft_threshold(3.0, 1.0), 2.0);
        assert_eq!(soft_threshold(-3.0, 1.0), -2.0);
        assert_eq!(soft_threshold(0.5, 1.0), 0.0);
    }
}
