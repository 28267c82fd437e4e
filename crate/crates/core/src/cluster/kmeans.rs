use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{check_input, relabel_compact, squared_distance, ClusterAssignment, ClustererConfig};
use crate::error::Result;
use crate::rng::{derive_seed, rng_from_seed};
use crate::select::Label;

/// Lloyd's algorithm from k-means++ seeds, best of `n_init` restarts by inertia.
pub fn kmeans_fit(data: &[f64], d: usize, config: &ClustererConfig) -> Result<ClusterAssignment> {
    let n = check_input(data, d, config)?;
    let mut best: Option<ClusterAssignment> = None;
    for restart in 0..config.n_init {
        let mut rng = rng_from_seed(derive_seed(config.seed, &[restart as u64]));
        let centers = kmeans_plus_plus(data, n, d, config.k, &mut rng);
        let run = lloyd(data, n, d, centers, config);
        if best.as_ref().map_or(true, |b| run.objective < b.objective) {
            best = Some(run);
        }
    }
    let mut out = best.expect("n_init >= 1");
    out.n_clusters = relabel_compact(&mut out.labels);
    if out.n_clusters < config.k {
        out.warnings.push(format!("only {} of {} clusters are non-empty", out.n_clusters, config.k));
    }
    Ok(out)
}

/// D²-weighted seeding. Falls back to uniform picks once every point
/// coincides with a chosen center.
pub(crate) fn kmeans_plus_plus(data: &[f64], n: usize, d: usize, k: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut centers = Vec::with_capacity(k * d);
    let first = rng.random_range(0..n);
    centers.extend_from_slice(&data[first * d..(first + 1) * d]);
    let mut dist: Vec<f64> = data.chunks_exact(d).map(|x| squared_distance(x, &centers[..d])).collect();
    for _ in 1..k {
        let total: f64 = dist.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut chosen = n - 1;
            for (i, &w) in dist.iter().enumerate() {
                acc += w;
                if acc > target && w > 0.0 {
                    chosen = i;
                    break;
                }
            }
            chosen
        } else {
            rng.random_range(0..n)
        };
        let c = &data[pick * d..(pick + 1) * d];
        for (dv, x) in dist.iter_mut().zip(data.chunks_exact(d)) {
            *dv = dv.min(squared_distance(x, c));
        }
        centers.extend_from_slice(c);
    }
    centers
}

/// Nearest-center labels and the resulting inertia.
fn assign(data: &[f64], d: usize, centers: &[f64], labels: &mut [Label], dist: &mut [f64]) -> f64 {
    let mut inertia = 0.0;
    for (i, x) in data.chunks_exact(d).enumerate() {
        let (label, best) = centers
            .chunks_exact(d)
            .map(|c| squared_distance(x, c))
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (j, v)| if v < acc.1 { (j, v) } else { acc });
        labels[i] = label as Label;
        dist[i] = best;
        inertia += best;
    }
    inertia
}

fn lloyd(data: &[f64], n: usize, d: usize, mut centers: Vec<f64>, config: &ClustererConfig) -> ClusterAssignment {
    let k = config.k;
    let mut labels = vec![0 as Label; n];
    let mut dist = vec![0.0; n];
    let mut trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    for _ in 0..config.max_iter {
        trace.push(assign(data, d, &centers, &mut labels, &mut dist));
        iterations += 1;
        let next = update_centers(data, d, k, &labels, &centers, &mut dist);
        let shift: f64 = squared_distance(&next, &centers);
        centers = next;
        if shift <= config.tol {
            converged = true;
            break;
        }
    }
    let objective = assign(data, d, &centers, &mut labels, &mut dist);
    trace.push(objective);
    ClusterAssignment { labels, objective, converged, iterations, trace, n_clusters: k, warnings: Vec::new() }
}

/// Cluster means. An empty cluster is moved onto the point farthest from its
/// current center; `dist` is updated so one point never seeds two clusters.
fn update_centers(data: &[f64], d: usize, k: usize, labels: &[Label], old: &[f64], dist: &mut [f64]) -> Vec<f64> {
    let mut sums = vec![0.0; k * d];
    let mut counts = vec![0usize; k];
    for (x, &l) in data.chunks_exact(d).zip(labels) {
        let l = l as usize;
        counts[l] += 1;
        sums[l * d..(l + 1) * d].iter_mut().zip(x).for_each(|(s, v)| *s += v);
    }
    let mut centers = old.to_vec();
    for j in 0..k {
        if counts[j] > 0 {
            let c = counts[j] as f64;
            centers[j * d..(j + 1) * d].iter_mut().zip(&sums[j * d..(j + 1) * d]).for_each(|(m, s)| *m = s / c);
        }
    }
    for j in (0..k).filter(|&j| counts[j] == 0) {
        let far = dist
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc })
            .0;
        centers[j * d..(j + 1) * d].copy_from_slice(&data[far * d..(far + 1) * d]);
        dist[far] = 0.0;
    }
    centers
}
