use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::dataset::TermDataset;
use crate::error::{Error, Result};
use crate::score::{local_score, Hypothesis};

use core::f64::consts::PI;

/// Advection of planetary vorticity balanced by diffusion.
pub const WESTERN_BOUNDARY: [bool; 3] = [true, true, false];
/// Advection of planetary vorticity balanced by the wind-stress curl.
pub const SVERDRUP: [bool; 3] = [true, false, true];

/// Node-centred grid on the closed unit square, including the walls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MunkConfig {
    pub epsilon: f64,
    pub nx: usize,
    pub ny: usize,
    /// Latitude of the score curves.
    pub y_slice: f64,
}

impl Default for MunkConfig {
    fn default() -> Self {
        Self { epsilon: 0.01, nx: 1001, ny: 51, y_slice: 0.5 }
    }
}

/// Local scores of the two named balances along `y = y_slice`.
#[derive(Debug, Clone, PartialEq)]
pub struct MunkCurves {
    pub x: Vec<f64>,
    pub western_boundary: Vec<f64>,
    pub sverdrup: Vec<f64>,
}

impl MunkCurves {
    /// Midpoint of the x range where both balances score below `threshold`.
    pub fn gap_center(&self, threshold: f64) -> Option<f64> {
        let inside: Vec<f64> = self
            .x
            .iter()
            .zip(self.western_boundary.iter().zip(&self.sverdrup))
            .filter(|(_, (w, s))| **w < threshold && **s < threshold)
            .map(|(x, _)| *x)
            .collect();
        Some(0.5 * (inside.first()? + inside.last()?))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MunkOutput {
    /// Columns: advection, diffusion, negated wind-stress curl.
    pub dataset: TermDataset,
    /// Sum of the three terms per row; `O(epsilon)` away from the western wall.
    pub residual: Vec<f64>,
    pub curves: MunkCurves,
}

/// `[dψ/dx, ε∇²ψ, -∇×τ]` for `ψ = (1 - x - e^{-x/ε}) π sin(πy)` and
/// `τ = -cos(πy) î`, differentiated analytically.
pub fn munk_terms(epsilon: f64, x: f64, y: f64) -> [f64; 3] {
    let s = (PI * y).sin();
    let decay = (-x / epsilon).exp();
    let advection = PI * (decay / epsilon - 1.0) * s;
    let diffusion = -PI * (decay / epsilon) * s - epsilon * PI.powi(3) * (1.0 - x - decay) * s;
    let curl = PI * s;
    [advection, diffusion, curl]
}

pub fn gen_munk(config: &MunkConfig) -> Result<MunkOutput> {
    let MunkConfig { epsilon, nx, ny, y_slice } = *config;
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Config(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    if nx < 2 || ny < 2 {
        return Err(Error::Config(format!("grid must be at least 2x2, got {nx}x{ny}")));
    }
    if !(y_slice > 0.0 && y_slice < 1.0) {
        return Err(Error::Config(format!("y slice must lie in (0, 1), got {y_slice}")));
    }
    let node = |i: usize, n: usize| i as f64 / (n - 1) as f64;
    let trapezoid = |i: usize, n: usize| if i == 0 || i == n - 1 { 0.5 } else { 1.0 } / (n - 1) as f64;

    let mut terms = Vec::with_capacity(nx * ny * 3);
    let mut weights = Vec::with_capacity(nx * ny);
    let mut coords = Vec::with_capacity(nx * ny * 2);
    let mut residual = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        let y = node(j, ny);
        for i in 0..nx {
            let x = node(i, nx);
            let e = munk_terms(epsilon, x, y);
            terms.extend_from_slice(&e);
            residual.push(e.iter().sum());
            weights.push(trapezoid(i, nx) * trapezoid(j, ny));
            coords.extend_from_slice(&[x, y]);
        }
    }
    let names: Vec<String> = ["advection", "diffusion", "wind_curl"].iter().map(|s| String::from(*s)).collect();
    let dataset = TermDataset::new(terms, 3, Some(weights))?
        .with_term_names(names)?
        .with_coords(coords, alloc::vec!["x".into(), "y".into()])?;

    let western = Hypothesis::from_bools(&WESTERN_BOUNDARY)?;
    let sverdrup = Hypothesis::from_bools(&SVERDRUP)?;
    let x: Vec<f64> = (0..nx).map(|i| node(i, nx)).collect();
    let slice: Vec<[f64; 3]> = x.iter().map(|&x| munk_terms(epsilon, x, y_slice)).collect();
    let curves = MunkCurves {
        western_boundary: slice.iter().map(|e| local_score(e, &western).m).collect(),
        sverdrup: slice.iter().map(|e| local_score(e, &sverdrup).m).collect(),
        x,
    };
    Ok(MunkOutput { dataset, residual, curves })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curves() -> MunkCurves {
        gen_munk(&MunkConfig { ny: 3, ..Default::default() }).unwrap().curves
    }

    #[test]
    fn balances_dominate_their_own_ends() {
        let c = curves();
        let last = c.x.len() - 1;
        assert!(c.western_boundary[0] > 0.9 && c.sverdrup[0] == 0.0);
        assert!(c.sverdrup[last] > 0.9 && c.western_boundary[last] == 0.0);
    }

    #[test]
    fn gap_sits_near_the_boundary_layer_edge() {
        let center = curves().gap_center(0.5).unwrap();
        let eps: f64 = 0.01;
        assert!((center - eps * (1.0 / eps).ln()).abs() < 0.02, "gap centre {center}");
    }

    #[test]
    fn residual_is_order_epsilon() {
        let out = gen_munk(&MunkConfig { nx: 101, ny: 11, ..Default::default() }).unwrap();
        let max = out.residual.iter().fold(0.0f64, |m, r| m.max(r.abs()));
        // |r| = ε π³ |1 - x - e^{-x/ε}| sin(πy) <= ε π³.
        assert!(max <= 0.01 * PI.powi(3) + 1e-12);
    }

    #[test]
    fn weights_integrate_to_unit_area() {
        let out = gen_munk(&MunkConfig { nx: 11, ny: 7, ..Default::default() }).unwrap();
        let total: f64 = out.dataset.weights().iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
    }
}
