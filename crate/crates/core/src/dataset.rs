//! Equation-term data model: terms, domain weights, coordinates, standardization.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::error::{Error, Result};

/// Largest number of equation terms a dataset may carry (hypotheses are `u64` masks).
pub const MAX_TERMS: usize = 64;

/// How observations whose terms are all exactly zero enter the global score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DegeneratePolicy {
    /// Keep their weight; they score 0 under any hypothesis.
    #[default]
    Penalize,
    /// Drop their weight from every weighted mean.
    Exclude,
}

/// `N` observations of `D` equation terms with per-observation domain weights.
#[derive(Debug, Clone, PartialEq)]
pub struct TermDataset {
    terms: Vec<f64>,
    n_rows: usize,
    n_terms: usize,
    weights: Vec<f64>,
    coords: Option<Vec<f64>>,
    n_coords: usize,
    term_names: Vec<String>,
    coord_names: Vec<String>,
    degenerate: Vec<bool>,
}

impl TermDataset {
    /// Builds a dataset from row-major terms. Weights default to 1.
    pub fn new(terms: Vec<f64>, n_terms: usize, weights: Option<Vec<f64>>) -> Result<Self> {
        if n_terms < 2 {
            return Err(Error::Dimensionality { found: n_terms, min: 2 });
        }
        if n_terms > MAX_TERMS {
            return Err(Error::TooManyTerms { found: n_terms, max: MAX_TERMS });
        }
        if terms.len() % n_terms != 0 {
            return Err(Error::Shape(format!(
                "{} values do not fill rows of {} terms",
                terms.len(),
                n_terms
            )));
        }
        let n_rows = terms.len() / n_terms;
        if n_rows == 0 {
            return Err(Error::InsufficientSamples { needed: 1, found: 0 });
        }
        if let Some(pos) = terms.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { row: pos / n_terms, col: pos % n_terms });
        }
        let weights = match weights {
            Some(w) => {
                validate_weights(&w, n_rows)?;
                w
            }
            None => vec![1.0; n_rows],
        };
        let degenerate = terms.chunks_exact(n_terms).map(|r| r.iter().all(|&v| v == 0.0)).collect();
        let term_names = (0..n_terms).map(|i| format!("e{i}")).collect();
        Ok(Self {
            terms,
            n_rows,
            n_terms,
            weights,
            coords: None,
            n_coords: 0,
            term_names,
            coord_names: Vec::new(),
            degenerate,
        })
    }

    pub fn with_term_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.n_terms {
            return Err(Error::Shape(format!(
                "{} term names for {} terms",
                names.len(),
                self.n_terms
            )));
        }
        self.term_names = names;
        Ok(self)
    }

    /// Attaches row-major sample-space coordinates (`n_coords` per row).
    pub fn with_coords(mut self, coords: Vec<f64>, names: Vec<String>) -> Result<Self> {
        let c = names.len();
        if c == 0 || coords.len() != c * self.n_rows {
            return Err(Error::Shape(format!(
                "{} coordinate values for {} rows of {} coordinates",
                coords.len(),
                self.n_rows,
                c
            )));
        }
        if let Some(pos) = coords.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { row: pos / c, col: self.n_terms + pos % c });
        }
        self.coords = Some(coords);
        self.n_coords = c;
        self.coord_names = names;
        Ok(self)
    }

    pub fn with_weights(mut self, weights: Vec<f64>) -> Result<Self> {
        validate_weights(&weights, self.n_rows)?;
        self.weights = weights;
        Ok(self)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_terms(&self) -> usize {
        self.n_terms
    }

    pub fn row(&self, n: usize) -> &[f64] {
        &self.terms[n * self.n_terms..(n + 1) * self.n_terms]
    }

    pub fn rows(&self) -> core::slice::ChunksExact<'_, f64> {
        self.terms.chunks_exact(self.n_terms)
    }

    pub fn terms(&self) -> &[f64] {
        &self.terms
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn coords(&self) -> Option<&[f64]> {
        self.coords.as_deref()
    }

    pub fn n_coords(&self) -> usize {
        self.n_coords
    }

    pub fn coord(&self, n: usize) -> Option<&[f64]> {
        self.coords.as_ref().map(|c| &c[n * self.n_coords..(n + 1) * self.n_coords])
    }

    pub fn coord_names(&self) -> &[String] {
        &self.coord_names
    }

    /// Coordinate column by name (`x`, `y`, `t`).
    pub fn coord_column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.coord_names.iter().position(|c| c == name)?;
        let coords = self.coords.as_ref()?;
        Some(coords.iter().skip(idx).step_by(self.n_coords).copied().collect())
    }

    pub fn term_names(&self) -> &[String] {
        &self.term_names
    }

    pub fn degenerate_mask(&self) -> &[bool] {
        &self.degenerate
    }

    /// Weights as they enter weighted means under `policy`.
    pub fn effective_weights(&self, policy: DegeneratePolicy) -> Vec<f64> {
        match policy {
            DegeneratePolicy::Penalize => self.weights.clone(),
            DegeneratePolicy::Exclude => self
                .weights
                .iter()
                .zip(&self.degenerate)
                .map(|(&w, &d)| if d { 0.0 } else { w })
                .collect(),
        }
    }

    /// Copy with every term multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        let mut out = self.clone();
        out.terms.iter_mut().for_each(|v| *v *= factor);
        if let Some(pos) = out.terms.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { row: pos / self.n_terms, col: pos % self.n_terms });
        }
        out.degenerate = out.terms.chunks_exact(self.n_terms).map(|r| r.iter().all(|&v| v == 0.0)).collect();
        Ok(out)
    }

    /// Rows `indices` (in order) as a new dataset, carrying weights, coordinates and names.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        let mut terms = Vec::with_capacity(indices.len() * self.n_terms);
        let mut weights = Vec::with_capacity(indices.len());
        for &i in indices {
            terms.extend_from_slice(self.row(i));
            weights.push(self.weights[i]);
        }
        let mut out = Self::new(terms, self.n_terms, Some(weights))?.with_term_names(self.term_names.clone())?;
        if let Some(coords) = &self.coords {
            let c = self.n_coords;
            let sub = indices.iter().flat_map(|&i| coords[i * c..(i + 1) * c].iter().copied()).collect();
            out = out.with_coords(sub, self.coord_names.clone())?;
        }
        Ok(out)
    }
}

fn validate_weights(w: &[f64], n_rows: usize) -> Result<()> {
    if w.len() != n_rows {
        return Err(Error::Weights(format!("{} weights for {} rows", w.len(), n_rows)));
    }
    if let Some(i) = w.iter().position(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::Weights(format!("weight at row {i} is negative or non-finite")));
    }
    if w.iter().sum::<f64>() <= 0.0 {
        return Err(Error::Weights("weights sum to zero".to_string()));
    }
    Ok(())
}

/// Per-column z-scored copy of a dataset's terms.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardizedView {
    pub z: Vec<f64>,
    pub n_rows: usize,
    pub n_terms: usize,
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

/// Z-scores each term column with the population (divide-by-`N`) standard
/// deviation. Constant columns map to zero.
pub fn standardize(ds: &TermDataset) -> Result<StandardizedView> {
    standardize_columns(ds.terms(), ds.n_rows(), ds.n_terms())
}

pub(crate) fn standardize_columns(data: &[f64], n: usize, d: usize) -> Result<StandardizedView> {
    if n < 2 {
        return Err(Error::InsufficientSamples { needed: 2, found: n });
    }
    let nf = n as f64;
    let mut means = vec![0.0; d];
    for row in data.chunks_exact(d) {
        for (m, v) in means.iter_mut().zip(row) {
            *m += v;
        }
    }
    means.iter_mut().for_each(|m| *m /= nf);
    let mut stds = vec![0.0; d];
    for row in data.chunks_exact(d) {
        for ((s, v), m) in stds.iter_mut().zip(row).zip(&means) {
            *s += (v - m) * (v - m);
        }
    }
    for s in &mut stds {
        *s = (*s / nf).sqrt();
        if *s == 0.0 {
            *s = 1.0;
        }
    }
    let z = data
        .chunks_exact(d)
        .flat_map(|row| row.iter().zip(&means).zip(&stds).map(|((v, m), s)| (v - m) / s))
        .collect();
    Ok(StandardizedView { z, n_rows: n, n_terms: d, means, stds })
}

/// Cell areas for samples on a tensor-product rectilinear grid given as
/// row-major `(x, y)` pairs.
///
/// Each axis value owns the interval between the midpoints to its neighbours;
/// the end values extend half a spacing outward, so a uniform cell-centred grid
/// gets equal weights summing to the area it tiles.
pub fn compute_area_weights(coords: &[f64]) -> Result<Vec<f64>> {
    if coords.len() % 2 != 0 || coords.is_empty() {
        return Err(Error::Shape(format!("{} values are not (x, y) pairs", coords.len())));
    }
    let n = coords.len() / 2;
    let xs: Vec<f64> = coords.iter().step_by(2).copied().collect();
    let ys: Vec<f64> = coords.iter().skip(1).step_by(2).copied().collect();
    let ux = unique_sorted(&xs)?;
    let uy = unique_sorted(&ys)?;
    if ux.len() < 2 || uy.len() < 2 {
        return Err(Error::UnsupportedGeometry(format!(
            "need at least two distinct values per axis, found {} x and {} y",
            ux.len(),
            uy.len()
        )));
    }
    if ux.len() * uy.len() != n {
        return Err(Error::UnsupportedGeometry(format!(
            "{} samples do not fill a {}x{} grid",
            n,
            ux.len(),
            uy.len()
        )));
    }
    let wx = axis_widths(&ux);
    let wy = axis_widths(&uy);
    let mut seen = vec![false; n];
    let mut weights = Vec::with_capacity(n);
    for (x, y) in xs.iter().zip(&ys) {
        let i = ux.binary_search_by(|v| v.total_cmp(x)).expect("value drawn from axis");
        let j = uy.binary_search_by(|v| v.total_cmp(y)).expect("value drawn from axis");
        let cell = j * ux.len() + i;
        if seen[cell] {
            return Err(Error::UnsupportedGeometry(format!("duplicate sample at ({x}, {y})")));
        }
        seen[cell] = true;
        weights.push(wx[i] * wy[j]);
    }
    Ok(weights)
}

fn unique_sorted(values: &[f64]) -> Result<Vec<f64>> {
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::UnsupportedGeometry("non-finite coordinate".to_string()));
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v.dedup();
    Ok(v)
}

fn axis_widths(axis: &[f64]) -> Vec<f64> {
    let m = axis.len();
    (0..m)
        .map(|i| match i {
            0 => axis[1] - axis[0],
            _ if i == m - 1 => axis[m - 1] - axis[m - 2],
            _ => 0.5 * (axis[i + 1] - axis[i - 1]),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(xs: &[f64], ys: &[f64]) -> Vec<f64> {
        ys.iter().flat_map(|&y| xs.iter().flat_map(move |&x| [x, y])).collect()
    }

    #[test]
    fn defaults_to_uniform_weights() {
        let ds = TermDataset::new(vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0], 3, None).unwrap();
        assert_eq!(ds.n_rows(), 2);
        assert_eq!(ds.weights(), &[1.0, 1.0]);
    }

    #[test]
    fn flags_all_zero_rows() {
        let ds = TermDataset::new(vec![1.0, -1.0, 0.0, 0.0, 0.0, 2.0], 2, None).unwrap();
        assert_eq!(ds.degenerate_mask(), &[false, true, false]);
        assert_eq!(ds.effective_weights(DegeneratePolicy::Exclude), vec![1.0, 0.0, 1.0]);
    }

    #[test]
    fn rejects_bad_shapes_and_values() {
        assert!(matches!(TermDataset::new(vec![1.0, 2.0], 1, None), Err(Error::Dimensionality { .. })));
        assert!(matches!(
            TermDataset::new(vec![1.0, f64::NAN, 0.0, 1.0], 2, None),
            Err(Error::NonFinite { row: 0, col: 1 })
        ));
        assert!(matches!(TermDataset::new(vec![1.0, 2.0], 2, Some(vec![0.0])), Err(Error::Weights(_))));
        assert!(matches!(TermDataset::new(vec![1.0, 2.0], 2, Some(vec![-1.0])), Err(Error::Weights(_))));
    }

    #[test]
    fn standardizes_with_population_std() {
        let ds = TermDataset::new(vec![1.0, 5.0, 3.0, 5.0], 2, None).unwrap();
        let v = standardize(&ds).unwrap();
        assert_eq!(v.z, vec![-1.0, 0.0, 1.0, 0.0]);
        assert_eq!(v.stds, vec![1.0, 1.0]);
    }

    #[test]
    fn constant_column_maps_to_zero() {
        let ds = TermDataset::new(vec![5.0, 1.0, 5.0, 2.0, 5.0, 3.0], 2, None).unwrap();
        let v = standardize(&ds).unwrap();
        assert!(v.z.iter().step_by(2).all(|&z| z == 0.0));
    }

    #[test]
    fn standardizing_standardized_data_is_identity() {
        let raw = vec![0.3, 10.0, -1.2, 12.5, 4.4, 9.0, 2.0, 11.0];
        let ds = TermDataset::new(raw, 2, None).unwrap();
        let once = standardize(&ds).unwrap();
        let again = standardize(&TermDataset::new(once.z.clone(), 2, None).unwrap()).unwrap();
        for (a, b) in once.z.iter().zip(&again.z) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn standardize_needs_two_rows() {
        let ds = TermDataset::new(vec![1.0, 2.0], 2, None).unwrap();
        assert!(matches!(standardize(&ds), Err(Error::InsufficientSamples { .. })));
    }

    #[test]
    fn uniform_cell_centred_grid_has_equal_weights() {
        let axis = [0.125, 0.375, 0.625, 0.875];
        let w = compute_area_weights(&grid(&axis, &axis)).unwrap();
        assert!(w.iter().all(|&v| (v - 1.0 / 16.0).abs() < 1e-15));
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_row_of_y_is_not_a_grid() {
        let coords = grid(&[0.0, 0.5, 1.0], &[0.3]);
        assert!(matches!(compute_area_weights(&coords), Err(Error::UnsupportedGeometry(_))));
    }

    #[test]
    fn nonuniform_axis_uses_midpoint_cells() {
        let coords = grid(&[0.0, 0.1, 0.5, 1.0], &[0.0, 1.0]);
        let w = compute_area_weights(&coords).unwrap();
        // y widths are 1 at both ends, so weights equal the x widths.
        let expected = [0.1, 0.25, 0.45, 0.5];
        for (got, want) in w[..4].iter().zip(expected) {
            assert!((got - want).abs() < 1e-15, "{got} vs {want}");
        }
    }

    #[test]
    fn missing_cell_is_rejected() {
        let mut coords = grid(&[0.0, 1.0], &[0.0, 1.0]);
        coords.truncate(6);
        assert!(compute_area_weights(&coords).is_err());
    }
}
