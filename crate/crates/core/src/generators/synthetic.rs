use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::dataset::TermDataset;
use crate::error::{Error, Result};
use crate::score::{Hypothesis, HypothesisArray};

/// Shape of the multiplicative modulation `η(y)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Modulation {
    /// `η = 1 + η0 sin(ωy)`: a 10% ripple on unit amplitude, so dominant
    /// terms are O(10) and inactive ones O(0.1).
    #[default]
    Perturbed,
    /// `η = η0 sin(ωy)`: the ripple alone, which passes through zero and
    /// makes both regimes meet at a common point after standardization.
    Sine,
}

/// Two regimes on the unit square: the first `d/2` terms dominate for
/// `y >= 0.5`, the last `d/2` below. Terms alternate in sign and carry a
/// multiplicative sinusoid in `y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticConfig {
    pub d: usize,
    pub nx: usize,
    pub ny: usize,
    pub lambda: f64,
    pub beta: f64,
    pub eta0: f64,
    pub omega: f64,
    pub modulation: Modulation,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self { d: 8, nx: 128, ny: 128, lambda: 10.0, beta: 0.1, eta0: 0.1, omega: 10.0 * core::f64::consts::PI, modulation: Modulation::Perturbed }
    }
}

impl SyntheticConfig {
    /// Terms sum to exactly zero only when each half has an even number of terms.
    pub fn closes_exactly(&self) -> bool {
        self.d % 4 == 0
    }

    pub fn validate(&self) -> Result<()> {
        if self.d < 4 || self.d % 2 != 0 {
            return Err(Error::Config(format!("d must be even and at least 4, got {}", self.d)));
        }
        if self.nx < 2 || self.ny < 2 {
            return Err(Error::Config(format!("grid must be at least 2x2, got {}x{}", self.nx, self.ny)));
        }
        if [self.lambda, self.beta, self.eta0, self.omega].iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::Config("coefficients must be positive".into()));
        }
        Ok(())
    }
}

/// Term values at one point. `H(0) = 1`, so `y = 0.5` belongs to the upper regime.
pub fn synthetic_terms(config: &SyntheticConfig, y: f64, out: &mut [f64]) {
    let ripple = config.eta0 * (config.omega * y).sin();
    let eta = match config.modulation {
        Modulation::Perturbed => 1.0 + ripple,
        Modulation::Sine => ripple,
    };
    let half = config.d / 2;
    let upper = y - 0.5 >= 0.0;
    for (i, e) in out.iter_mut().enumerate().take(config.d) {
        let active = if i < half { upper } else { !upper };
        let heaviside = if active { 1.0 } else { 0.0 };
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        *e = sign * eta * (config.lambda * heaviside + config.beta);
    }
}

/// Cell-centred `nx x ny` grid, rows ordered with `x` varying fastest, uniform
/// cell-area weights and coordinates `x`, `y`. The seed is accepted for
/// interface symmetry; the field is deterministic.
pub fn gen_synthetic(config: &SyntheticConfig, _seed: u64) -> Result<TermDataset> {
    config.validate()?;
    let (nx, ny, d) = (config.nx, config.ny, config.d);
    let mut terms = Vec::with_capacity(nx * ny * d);
    let mut coords = Vec::with_capacity(nx * ny * 2);
    let mut row = alloc::vec![0.0; d];
    for j in 0..ny {
        let y = (j as f64 + 0.5) / ny as f64;
        synthetic_terms(config, y, &mut row);
        for i in 0..nx {
            let x = (i as f64 + 0.5) / nx as f64;
            terms.extend_from_slice(&row);
            coords.extend_from_slice(&[x, y]);
        }
    }
    let area = 1.0 / (nx * ny) as f64;
    let names: Vec<String> = (0..d).map(|i| format!("e{i}")).collect();
    let ds = TermDataset::new(terms, d, Some(alloc::vec![area; nx * ny]))?
        .with_term_names(names)?
        .with_coords(coords, alloc::vec!["x".into(), "y".into()])?;
    if let Some(row) = ds.degenerate_mask().iter().position(|&b| b) {
        return Err(Error::Numerical(format!(
            "row {row} sits on a zero of the modulation; choose ny so that no cell centre is a multiple of 1/10"
        )));
    }
    if config.closes_exactly() {
        debug_assert!(ds.rows().all(|r| r.iter().sum::<f64>() == 0.0));
    }
    Ok(ds)
}

/// The generating regimes as one hypothesis per row of [`gen_synthetic`]'s output.
pub fn true_synthetic_hypotheses(ds: &TermDataset) -> Result<HypothesisArray> {
    let d = ds.n_terms();
    let ys = ds.coord_column("y").ok_or_else(|| Error::Shape("dataset has no y coordinate".into()))?;
    let lower: Vec<usize> = (0..d / 2).collect();
    let upper: Vec<usize> = (d / 2..d).collect();
    let top = Hypothesis::from_indices(&lower, d)?;
    let bottom = Hypothesis::from_indices(&upper, d)?;
    Ok(ys.iter().map(|&y| if y >= 0.5 { top } else { bottom }).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{global_score, DegeneratePolicy};

    #[test]
    fn dominant_to_inactive_ratio_is_101() {
        let cfg = SyntheticConfig::default();
        let mut e = [0.0; 8];
        synthetic_terms(&cfg, 0.73, &mut e);
        for i in 0..4 {
            assert!((e[i].abs() / e[i + 4].abs() - 101.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rows_close_exactly() {
        let ds = gen_synthetic(&SyntheticConfig { nx: 4, ny: 64, ..Default::default() }, 0).unwrap();
        assert!(ds.rows().all(|r| r.iter().sum::<f64>() == 0.0));
    }

    #[test]
    fn boundary_belongs_to_upper_regime() {
        let cfg = SyntheticConfig::default();
        let mut e = [0.0; 8];
        synthetic_terms(&cfg, 0.5, &mut e);
        // sin(5 pi) is ~6e-16, so compare ratios rather than magnitudes.
        assert!((e[0].abs() / e[4].abs() - 101.0).abs() < 1e-9);
    }

    #[test]
    fn true_masks_score_the_closed_form_value() {
        let ds = gen_synthetic(&SyntheticConfig::default(), 0).unwrap();
        assert_eq!(ds.n_rows(), 128 * 128);
        let h = true_synthetic_hypotheses(&ds).unwrap();
        let report = global_score(&ds, &h, DegeneratePolicy::Penalize).unwrap();
        let expected = 100f64.log10() / 102f64.log10();
        assert!((report.global_score - expected).abs() < 1e-12, "{}", report.global_score);
    }

    #[test]
    fn sine_modulation_scores_the_same_under_true_masks() {
        let cfg = SyntheticConfig { modulation: Modulation::Sine, nx: 2, ..Default::default() };
        let ds = gen_synthetic(&cfg, 0).unwrap();
        let h = true_synthetic_hypotheses(&ds).unwrap();
        let report = global_score(&ds, &h, DegeneratePolicy::Penalize).unwrap();
        assert!((report.global_score - 100f64.log10() / 102f64.log10()).abs() < 1e-12);
        assert!(ds.rows().all(|r| r.iter().sum::<f64>() == 0.0));
    }

    #[test]
    fn perturbed_amplitudes_are_order_ten_and_one_tenth() {
        let ds = gen_synthetic(&SyntheticConfig { nx: 2, ..Default::default() }, 0).unwrap();
        for r in ds.rows() {
            let mut mags: Vec<f64> = r.iter().map(|v| v.abs()).collect();
            mags.sort_by(f64::total_cmp);
            assert!(mags[7] <= 10.1 * 1.1 + 1e-12 && mags[4] >= 10.1 * 0.9 - 1e-12);
            assert!(mags[3] <= 0.11 + 1e-12 && mags[0] >= 0.09 - 1e-12);
        }
    }

    #[test]
    fn six_terms_do_not_close() {
        let cfg = SyntheticConfig { d: 6, nx: 2, ny: 8, ..Default::default() };
        assert!(!cfg.closes_exactly());
        let ds = gen_synthetic(&cfg, 0).unwrap();
        assert!(ds.rows().any(|r| r.iter().sum::<f64>() != 0.0));
    }
}
