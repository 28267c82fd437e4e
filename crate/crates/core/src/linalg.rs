//! Small dense helpers for `D x D` matrices (row-major).

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

/// Lower Cholesky factor of a symmetric positive-definite matrix, or `None`
/// when a pivot is not strictly positive.
pub(crate) fn cholesky(a: &[f64], d: usize) -> Option<Vec<f64>> {
    let mut l = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..=i {
            let mut sum = a[i * d + j];
            for k in 0..j {
                sum -= l[i * d + k] * l[j * d + k];
            }
            if i == j {
                if !(sum > 0.0) || !sum.is_finite() {
                    return None;
                }
                l[i * d + i] = sum.sqrt();
            } else {
                l[i * d + j] = sum / l[j * d + j];
            }
        }
    }
    Some(l)
}

/// Solves `L y = b` in place for lower-triangular `L`.
pub(crate) fn forward_substitute(l: &[f64], d: usize, b: &mut [f64]) {
    for i in 0..d {
        let mut sum = b[i];
        for k in 0..i {
            sum -= l[i * d + k] * b[k];
        }
        b[i] = sum / l[i * d + i];
    }
}

pub(crate) fn log_det_from_cholesky(l: &[f64], d: usize) -> f64 {
    (0..d).map(|i| l[i * d + i].ln()).sum::<f64>() * 2.0
}

pub(crate) fn mat_vec(a: &[f64], d: usize, v: &[f64]) -> Vec<f64> {
    a.chunks_exact(d).map(|row| row.iter().zip(v).map(|(x, y)| x * y).sum()).collect()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Leading eigenvector of a symmetric positive semi-definite matrix by power
/// iteration. `None` for the zero matrix.
pub(crate) fn leading_eigenvector(a: &[f64], d: usize, max_iter: usize, tol: f64) -> Option<Vec<f64>> {
    // Start from the column with the largest diagonal entry plus a small
    // uniform component so the start is not orthogonal to the answer.
    let (start, &diag) = a.iter().step_by(d + 1).enumerate().max_by(|x, y| x.1.total_cmp(y.1))?;
    if diag <= 0.0 {
        return None;
    }
    let mut v: Vec<f64> = (0..d).map(|j| a[j * d + start] / diag + 1e-3).collect();
    normalize(&mut v)?;
    for _ in 0..max_iter {
        let mut next = mat_vec(a, d, &v);
        normalize(&mut next)?;
        let change = next.iter().zip(&v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        v = next;
        if change < tol {
            break;
        }
    }
    Some(v)
}

fn normalize(v: &mut [f64]) -> Option<()> {
    let norm = dot(v, v).sqrt();
    if !(norm > 0.0) || !norm.is_finite() {
        return None;
    }
    v.iter_mut().for_each(|x| *x /= norm);
    Some(())
}
