use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use super::kmeans::kmeans_plus_plus;
use super::{check_input, relabel_compact, ClusterAssignment, ClustererConfig, Covariance};
use crate::error::{Error, Result};
use crate::linalg::{cholesky, forward_substitute, log_det_from_cholesky};
use crate::rng::{derive_seed, rng_from_seed};
use crate::select::Label;

/// Covariance regularization. It enters as the log-prior
/// `-(c/2) tr(Σ⁻¹)` per component with `c = REG_COVAR * N / k`, whose
/// maximizer adds `c / N_k` (exactly `REG_COVAR` for a component holding
/// `N / k` samples) to the diagonal. EM then increases the penalized
/// log-likelihood monotonically.
const REG_COVAR: f64 = 1e-6;
const LN_2PI: f64 = 1.837_877_066_409_345_5;

struct Component {
    weight: f64,
    mean: Vec<f64>,
    chol: Vec<f64>,
    log_det: f64,
}

/// Gaussian mixture fitted by expectation-maximization, labels by maximum
/// responsibility. Restarts that hit a singular covariance are discarded.
/// The objective and trace are the penalized log-likelihood (see [`REG_COVAR`]).
pub fn gmm_fit(data: &[f64], d: usize, config: &ClustererConfig) -> Result<ClusterAssignment> {
    let n = check_input(data, d, config)?;
    let mut warnings = Vec::new();
    let mut covariance = config.covariance;
    if covariance == Covariance::Full && n < config.k * (d + 1) {
        covariance = Covariance::Diagonal;
        warnings.push(format!(
            "{n} samples are too few for {} full covariances in {d} dimensions; using diagonal covariances",
            config.k
        ));
    }

    let mut best: Option<ClusterAssignment> = None;
    let mut failures = 0;
    for restart in 0..config.n_init {
        let seed = derive_seed(config.seed, &[restart as u64]);
        match em(data, n, d, config, covariance, seed) {
            Some(run) => {
                if best.as_ref().map_or(true, |b| run.objective > b.objective) {
                    best = Some(run);
                }
            }
            None => failures += 1,
        }
    }
    let mut out = best.ok_or_else(|| {
        Error::Numerical(format!("covariance became singular in all {} mixture restarts", config.n_init))
    })?;
    if failures > 0 {
        warnings.push(format!("{failures} restarts discarded after a singular covariance"));
    }
    out.n_clusters = relabel_compact(&mut out.labels);
    if out.n_clusters < config.k {
        warnings.push(format!("only {} of {} components own samples", out.n_clusters, config.k));
    }
    out.warnings = warnings;
    Ok(out)
}

fn em(data: &[f64], n: usize, d: usize, config: &ClustererConfig, cov: Covariance, seed: u64) -> Option<ClusterAssignment> {
    let k = config.k;
    let mut rng = rng_from_seed(seed);
    let means = kmeans_plus_plus(data, n, d, k, &mut rng);

    // Every component starts from the pooled covariance.
    let pooled_mean: Vec<f64> = (0..d).map(|j| data.iter().skip(j).step_by(d).sum::<f64>() / n as f64).collect();
    let ones = vec![1.0; n];
    let pooled = weighted_covariance(data, d, &ones, &pooled_mean, cov, REG_COVAR * n as f64)?;
    let prior = REG_COVAR * n as f64 / k as f64;
    let mut comps: Vec<Component> = means
        .chunks_exact(d)
        .map(|m| Component {
            weight: 1.0 / k as f64,
            mean: m.to_vec(),
            chol: pooled.0.clone(),
            log_det: pooled.1,
        })
        .collect();

    let mut resp = vec![0.0; n * k];
    let mut trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    let mut ll = e_step(data, d, &comps, &mut resp) + log_prior(&comps, d, prior);
    trace.push(ll);
    for _ in 0..config.max_iter {
        iterations += 1;
        comps = m_step(data, n, d, k, &resp, cov, prior)?;
        let next = e_step(data, d, &comps, &mut resp) + log_prior(&comps, d, prior);
        if !next.is_finite() {
            return None;
        }
        trace.push(next);
        let delta = (next - ll).abs() / n as f64;
        ll = next;
        if delta < config.tol {
            converged = true;
            break;
        }
    }

    let labels = resp
        .chunks_exact(k)
        .map(|r| r.iter().enumerate().fold((0, f64::NEG_INFINITY), |a, (j, &v)| if v > a.1 { (j, v) } else { a }).0 as Label)
        .collect();
    Some(ClusterAssignment { labels, objective: ll, converged, iterations, trace, n_clusters: k, warnings: Vec::new() })
}

/// Fills `resp` with posterior responsibilities; returns the log-likelihood.
fn e_step(data: &[f64], d: usize, comps: &[Component], resp: &mut [f64]) -> f64 {
    let k = comps.len();
    let mut ll = 0.0;
    let mut work = vec![0.0; d];
    for (x, r) in data.chunks_exact(d).zip(resp.chunks_exact_mut(k)) {
        for (c, slot) in comps.iter().zip(r.iter_mut()) {
            work.iter_mut().zip(x).zip(&c.mean).for_each(|((w, v), m)| *w = v - m);
            forward_substitute(&c.chol, d, &mut work);
            let maha: f64 = work.iter().map(|v| v * v).sum();
            *slot = c.weight.ln() - 0.5 * (d as f64 * LN_2PI + c.log_det + maha);
        }
        let max = r.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let sum: f64 = r.iter().map(|v| (v - max).exp()).sum();
        let lse = max + sum.ln();
        r.iter_mut().for_each(|v| *v = (*v - lse).exp());
        ll += lse;
    }
    ll
}

/// `-(c/2) Σ_k tr(Σ_k⁻¹)`, with `tr(Σ⁻¹) = ||L⁻¹||²_F`.
fn log_prior(comps: &[Component], d: usize, c: f64) -> f64 {
    let mut col = vec![0.0; d];
    let mut trace = 0.0;
    for comp in comps {
        for j in 0..d {
            col.iter_mut().enumerate().for_each(|(i, v)| *v = if i == j { 1.0 } else { 0.0 });
            forward_substitute(&comp.chol, d, &mut col);
            trace += col.iter().map(|v| v * v).sum::<f64>();
        }
    }
    -0.5 * c * trace
}

fn m_step(
    data: &[f64],
    n: usize,
    d: usize,
    k: usize,
    resp: &[f64],
    cov: Covariance,
    prior: f64,
) -> Option<Vec<Component>> {
    let mut comps = Vec::with_capacity(k);
    let mut r = vec![0.0; n];
    for j in 0..k {
        r.iter_mut().zip(resp.iter().skip(j).step_by(k)).for_each(|(a, b)| *a = *b);
        let nk: f64 = r.iter().sum::<f64>() + 10.0 * f64::EPSILON;
        let mean: Vec<f64> = (0..d)
            .map(|c| data.iter().skip(c).step_by(d).zip(&r).map(|(v, w)| v * w).sum::<f64>() / nk)
            .collect();
        let (chol, log_det) = weighted_covariance(data, d, &r, &mean, cov, prior)?;
        comps.push(Component { weight: nk / n as f64, mean, chol, log_det });
    }
    Some(comps)
}

/// Cholesky factor and log-determinant of `(scatter + c I) / Σw`.
fn weighted_covariance(
    data: &[f64],
    d: usize,
    w: &[f64],
    mean: &[f64],
    cov: Covariance,
    c: f64,
) -> Option<(Vec<f64>, f64)> {
    let total: f64 = w.iter().sum::<f64>() + 10.0 * f64::EPSILON;
    let mut s = vec![0.0; d * d];
    let mut diff = vec![0.0; d];
    for (x, &wi) in data.chunks_exact(d).zip(w) {
        if wi == 0.0 {
            continue;
        }
        diff.iter_mut().zip(x).zip(mean).for_each(|((o, v), m)| *o = v - m);
        for a in 0..d {
            for b in 0..=a {
                s[a * d + b] += wi * diff[a] * diff[b];
            }
        }
    }
    for a in 0..d {
        for b in 0..=a {
            let v = if a == b || cov == Covariance::Full { s[a * d + b] / total } else { 0.0 };
            s[a * d + b] = v;
            s[b * d + a] = v;
        }
        s[a * d + a] += c / total;
    }
    let chol = cholesky(&s, d)?;
    let log_det = log_det_from_cholesky(&chol, d);
    Some((chol, log_det))
}
