//! Continuous tumor-angiogenesis model on the unit square.
//!
//! Endothelial-cell density `n` moves by random motility, chemotaxis up the
//! angiogenic factor `c`, and haptotaxis up the fibronectin `f`:
//!
//! ```text
//! ∂n/∂t = ∇·(D ∇n − χ(c) n ∇c − ρ n ∇f),   χ(c) = χ0 / (1 + α c)
//! ∂f/∂t = β n − γ n f
//! ∂c/∂t = −η c n
//! ```
//!
//! Space is a cell-centred finite-volume grid with the flux of `n` evaluated
//! on cell faces and set to zero on the walls, so total `n` is conserved to
//! rounding. Time stepping is classical RK4 with step-doubling error control.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;
use rand_distr::{Distribution, StandardNormal};

use crate::dataset::TermDataset;
use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from_seed};

pub const ANGIO_TERM_NAMES: [&str; 7] = [
    "dn_dt",
    "random_motility",
    "chemotaxis_curvature",
    "chemotaxis_gradient",
    "chemotaxis_sensitivity",
    "haptotaxis_curvature",
    "haptotaxis_gradient",
];

/// Values below this are rounding noise; anything more negative is clamped.
const NEGATIVE_SLACK: f64 = -1e-9;
/// A step that undershoots past [`NEGATIVE_SLACK`] is retried at half size
/// until it reaches this multiple of `dt_min`; only then are values clamped.
const POSITIVITY_RETRY_FLOOR: f64 = 1e3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngioCoefficients {
    pub d_a: f64,
    pub alpha_a: f64,
    pub chi0: f64,
    pub rho_a: f64,
    pub beta_f: f64,
    pub gamma: f64,
    pub eta_c: f64,
}

impl Default for AngioCoefficients {
    fn default() -> Self {
        Self { d_a: 0.00035, alpha_a: 0.6, chi0: 0.38, rho_a: 0.34, beta_f: 0.05, gamma: 0.1, eta_c: 0.1 }
    }
}

impl AngioCoefficients {
    pub fn chi(&self, c: f64) -> f64 {
        self.chi0 / (1.0 + self.alpha_a * c)
    }

    /// dχ/dc.
    pub fn chi_prime(&self, c: f64) -> f64 {
        let q = 1.0 + self.alpha_a * c;
        -self.chi0 * self.alpha_a / (q * q)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AngioConfig {
    /// Cells per side.
    pub resolution: usize,
    pub t_end: f64,
    /// Red-noise amplitude relative to each field's maximum, added to the
    /// initial `c` and `f`.
    pub noise_amp: f64,
    /// Lag-one autocorrelation of the noise along each axis.
    pub noise_ar: f64,
    pub seed: u64,
    /// Times (within `(0, t_end]`) at which to keep a copy of the state.
    pub snapshot_times: Vec<f64>,
    pub coefficients: AngioCoefficients,
    /// Local error tolerance, applied as `tol * (1 + |y|)` per component.
    pub tol: f64,
    pub safety: f64,
    pub dt_min: f64,
    pub dt_max: f64,
    /// Fraction of cells that may be clamped in one step before the run aborts.
    pub max_clamp_fraction: f64,
}

impl Default for AngioConfig {
    fn default() -> Self {
        Self {
            resolution: 256,
            t_end: 0.91,
            noise_amp: 0.01,
            noise_ar: 0.9,
            seed: 0,
            snapshot_times: Vec::new(),
            coefficients: AngioCoefficients::default(),
            tol: 1e-6,
            safety: 0.9,
            dt_min: 1e-12,
            dt_max: 1e-2,
            max_clamp_fraction: 1e-3,
        }
    }
}

impl AngioConfig {
    pub fn validate(&self) -> Result<()> {
        if self.resolution < 2 {
            return Err(Error::Config(format!("resolution must be at least 2, got {}", self.resolution)));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::Config(format!("t_end must be non-negative, got {}", self.t_end)));
        }
        if !(self.noise_amp >= 0.0) || !(self.noise_ar >= 0.0 && self.noise_ar < 1.0) {
            return Err(Error::Config("noise amplitude must be >= 0 and its correlation in [0, 1)".into()));
        }
        if !(self.tol > 0.0 && self.safety > 0.0 && self.dt_min > 0.0 && self.dt_max >= self.dt_min) {
            return Err(Error::Config("invalid step-size controller settings".into()));
        }
        if let Some(t) = self.snapshot_times.iter().find(|t| !(**t >= 0.0 && **t <= self.t_end)) {
            return Err(Error::Config(format!("snapshot time {t} lies outside [0, {}]", self.t_end)));
        }
        Ok(())
    }
}

/// Fields stored row-major with `x` varying fastest: index `j * res + i`.
#[derive(Debug, Clone, PartialEq)]
pub struct AngioState {
    pub resolution: usize,
    pub t: f64,
    pub n: Vec<f64>,
    pub c: Vec<f64>,
    pub f: Vec<f64>,
}

impl AngioState {
    pub fn h(&self) -> f64 {
        1.0 / self.resolution as f64
    }

    pub fn cell_center(&self, idx: usize) -> (f64, f64) {
        let h = self.h();
        ((idx % self.resolution) as f64 * h + 0.5 * h, (idx / self.resolution) as f64 * h + 0.5 * h)
    }

    /// `Σ n h²`.
    pub fn total_cells(&self) -> f64 {
        let h = self.h();
        self.n.iter().sum::<f64>() * h * h
    }

    /// Density-weighted mean `x`.
    pub fn center_of_mass_x(&self) -> f64 {
        let (num, den) = self
            .n
            .iter()
            .enumerate()
            .fold((0.0, 0.0), |(a, b), (i, &n)| (a + n * self.cell_center(i).0, b + n));
        num / den
    }

    fn pack(&self) -> Vec<f64> {
        let mut y = Vec::with_capacity(3 * self.n.len());
        y.extend_from_slice(&self.n);
        y.extend_from_slice(&self.c);
        y.extend_from_slice(&self.f);
        y
    }

    fn unpack(resolution: usize, t: f64, y: &[f64]) -> Self {
        let cells = resolution * resolution;
        Self { resolution, t, n: y[..cells].to_vec(), c: y[cells..2 * cells].to_vec(), f: y[2 * cells..].to_vec() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AngioStats {
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    /// Rejections caused by an undershoot rather than by the error estimate.
    pub positivity_rejections: usize,
    pub clamped_values: usize,
    /// Most negative value produced by an accepted step, before clamping.
    pub most_negative: f64,
    pub min_dt: f64,
    pub max_dt: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AngioRun {
    pub initial: AngioState,
    pub snapshots: Vec<AngioState>,
    pub final_state: AngioState,
    /// Seven expanded terms of the `n` equation at `t_end`, one row per cell.
    pub terms: TermDataset,
    pub stats: AngioStats,
}

/// Tumor-centred factor profile, tumor at `(1, 1/2)` with radius 0.1.
fn initial_c(x: f64, y: f64) -> f64 {
    let nu = (5f64.sqrt() - 0.1) / (5f64.sqrt() - 1.0);
    let r0 = 0.1;
    let r = ((x - 1.0).powi(2) + (y - 0.5).powi(2)).sqrt();
    if r <= r0 {
        1.0
    } else {
        (nu - r).powi(2) / (nu - r0)
    }
}

fn initial_f(x: f64) -> f64 {
    0.75 * (-x * x / 0.45).exp()
}

fn initial_n(x: f64, y: f64) -> f64 {
    (-x * x / 0.001).exp() * (6.0 * core::f64::consts::PI * y).sin().powi(2)
}

/// Noise-free initial condition sampled at cell centres.
pub fn initial_state(resolution: usize) -> AngioState {
    let cells = resolution * resolution;
    let mut state = AngioState { resolution, t: 0.0, n: vec![0.0; cells], c: vec![0.0; cells], f: vec![0.0; cells] };
    for idx in 0..cells {
        let (x, y) = state.cell_center(idx);
        state.n[idx] = initial_n(x, y);
        state.c[idx] = initial_c(x, y);
        state.f[idx] = initial_f(x);
    }
    state
}

/// Gaussian white noise smoothed by a first-order autoregressive filter
/// along each axis, scaled so that its largest magnitude is `amplitude`.
pub fn red_noise(resolution: usize, ar: f64, amplitude: f64, seed: u64) -> Vec<f64> {
    let mut rng = rng_from_seed(seed);
    let mut g: Vec<f64> = (0..resolution * resolution).map(|_| StandardNormal.sample(&mut rng)).collect();
    let innovation = (1.0 - ar * ar).sqrt();
    for j in 0..resolution {
        for i in 1..resolution {
            let idx = j * resolution + i;
            g[idx] = ar * g[idx - 1] + innovation * g[idx];
        }
    }
    for j in 1..resolution {
        for i in 0..resolution {
            let idx = j * resolution + i;
            g[idx] = ar * g[idx - resolution] + innovation * g[idx];
        }
    }
    let max = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if max > 0.0 {
        g.iter_mut().for_each(|v| *v *= amplitude / max);
    }
    g
}

/// Runs the model from the standard initial condition (plus red noise on
/// `c` and `f` when `noise_amp > 0`).
pub fn simulate_angiogenesis(config: &AngioConfig) -> Result<AngioRun> {
    config.validate()?;
    let mut state = initial_state(config.resolution);
    if config.noise_amp > 0.0 {
        let r = config.resolution;
        for (field, part) in [(&mut state.c, 0u64), (&mut state.f, 1u64)] {
            let max = field.iter().fold(0.0f64, |m, v| m.max(*v));
            let noise = red_noise(r, config.noise_ar, config.noise_amp * max, derive_seed(config.seed, &[part]));
            field.iter_mut().zip(&noise).for_each(|(v, e)| *v = (*v + e).max(0.0));
        }
    }
    simulate_from(state, config)
}

/// Integrates `initial` to `config.t_end`.
pub fn simulate_from(initial: AngioState, config: &AngioConfig) -> Result<AngioRun> {
    config.validate()?;
    let res = initial.resolution;
    let cells = res * res;
    if initial.n.len() != cells || initial.c.len() != cells || initial.f.len() != cells {
        return Err(Error::Shape(format!("fields do not match a {res}x{res} grid")));
    }
    let p = config.coefficients;
    let h = initial.h();
    let mut snap_times: Vec<f64> = config.snapshot_times.clone();
    snap_times.sort_by(f64::total_cmp);
    snap_times.dedup();

    let mut y = initial.pack();
    let mut t = initial.t;
    let t_end = initial.t + config.t_end;
    let mut stats = AngioStats { min_dt: f64::INFINITY, ..AngioStats::default() };
    let mut snapshots = Vec::with_capacity(snap_times.len());
    let mut next_snap = 0;
    while next_snap < snap_times.len() && snap_times[next_snap] <= 0.0 {
        snapshots.push(AngioState::unpack(res, t, &y));
        next_snap += 1;
    }

    let rhs = |y: &[f64], out: &mut [f64]| full_rhs(&p, res, h, y, out);
    let mut stepper = Rk4::new(y.len());
    let mut dt = config.dt_max.min(1e-4);
    let mut full = vec![0.0; y.len()];
    let mut half = vec![0.0; y.len()];
    while t < t_end {
        let target = snap_times.get(next_snap).map_or(t_end, |s| (initial.t + s).min(t_end));
        let landing = target - t <= dt;
        let step = if landing { target - t } else { dt };

        stepper.step(&rhs, &y, step, &mut full);
        stepper.step(&rhs, &y, 0.5 * step, &mut half);
        let mid = half.clone();
        stepper.step(&rhs, &mid, 0.5 * step, &mut half);

        let err = full
            .iter()
            .zip(&half)
            .map(|(a, b)| (a - b).abs() / (config.tol * (1.0 + b.abs())))
            .fold(0.0f64, f64::max);
        if !err.is_finite() {
            return Err(Error::Numerical(format!("non-finite state at t = {t}")));
        }
        let factor = if err == 0.0 { 5.0 } else { (config.safety * err.powf(-0.2)).clamp(0.2, 5.0) };
        if err > 1.0 {
            stats.rejected_steps += 1;
            if step <= config.dt_min {
                return Err(Error::Numerical(format!("step size fell below {} at t = {t}", config.dt_min)));
            }
            dt = (step * factor).max(config.dt_min);
            continue;
        }

        let lowest = half.iter().copied().fold(f64::INFINITY, f64::min);
        if lowest < NEGATIVE_SLACK && step > POSITIVITY_RETRY_FLOOR * config.dt_min {
            stats.rejected_steps += 1;
            stats.positivity_rejections += 1;
            dt = 0.5 * step;
            continue;
        }
        stats.most_negative = stats.most_negative.min(lowest);
        let clamped = clamp_negatives(&mut half);
        if clamped as f64 > config.max_clamp_fraction * cells as f64 {
            return Err(Error::Numerical(format!("{clamped} negative values clamped in one step at t = {t}")));
        }
        stats.clamped_values += clamped;
        stats.accepted_steps += 1;
        stats.min_dt = stats.min_dt.min(step);
        stats.max_dt = stats.max_dt.max(step);
        core::mem::swap(&mut y, &mut half);
        t = if landing { target } else { t + step };
        if !landing || step >= dt {
            dt = (step * factor).clamp(config.dt_min, config.dt_max);
        }
        while next_snap < snap_times.len() && initial.t + snap_times[next_snap] <= t {
            snapshots.push(AngioState::unpack(res, t, &y));
            next_snap += 1;
        }
    }
    if stats.accepted_steps == 0 {
        stats.min_dt = 0.0;
    }

    let final_state = AngioState::unpack(res, t, &y);
    let terms = emit_terms(&final_state, &p)?;
    Ok(AngioRun { initial, snapshots, final_state, terms, stats })
}

fn clamp_negatives(y: &mut [f64]) -> usize {
    let mut count = 0;
    for v in y.iter_mut().filter(|v| **v < NEGATIVE_SLACK) {
        *v = 0.0;
        count += 1;
    }
    count
}

/// One classical RK4 step of the pointwise `f` and `c` equations with `n`
/// held fixed.
pub fn fibronectin_factor_step(state: &AngioState, coefficients: &AngioCoefficients, dt: f64) -> AngioState {
    let cells = state.n.len();
    let mut y = Vec::with_capacity(2 * cells);
    y.extend_from_slice(&state.c);
    y.extend_from_slice(&state.f);
    let n = &state.n;
    let rhs = |y: &[f64], out: &mut [f64]| {
        let (c, f) = y.split_at(cells);
        let (dc, df) = out.split_at_mut(cells);
        reaction_rhs(coefficients, n, c, f, dc, df);
    };
    let mut out = vec![0.0; y.len()];
    Rk4::new(y.len()).step(&rhs, &y, dt, &mut out);
    let (c, f) = out.split_at(cells);
    AngioState { resolution: state.resolution, t: state.t + dt, n: state.n.clone(), c: c.to_vec(), f: f.to_vec() }
}

fn reaction_rhs(p: &AngioCoefficients, n: &[f64], c: &[f64], f: &[f64], dc: &mut [f64], df: &mut [f64]) {
    for i in 0..n.len() {
        dc[i] = -p.eta_c * c[i] * n[i];
        df[i] = p.beta_f * n[i] - p.gamma * n[i] * f[i];
    }
}

/// Time derivative of the packed state `[n, c, f]`.
///
/// The flux of `n` through a face is `−D ∂n/∂s + u n_face` with the drift
/// velocity `u = χ(c) ∂c/∂s + ρ ∂f/∂s` from centred face differences. `n_face` is
/// reconstructed upwind with a van Leer limited slope: second order where `n`
/// is smooth, and free of the undershoots that centred advection produces
/// when drift dominates diffusion across a cell.
fn full_rhs(p: &AngioCoefficients, res: usize, h: f64, y: &[f64], out: &mut [f64]) {
    let cells = res * res;
    let (n, rest) = y.split_at(cells);
    let (c, f) = rest.split_at(cells);
    let (dn, rest) = out.split_at_mut(cells);
    let (dc, df) = rest.split_at_mut(cells);
    dn.iter_mut().for_each(|v| *v = 0.0);
    let inv_h2 = 1.0 / (h * h);
    // Face between cells `a` and `b = a + stride`; `pos` is a's index along the axis.
    let mut face = |a: usize, stride: usize, pos: usize| {
        let b = a + stride;
        // Positive drift carries cells from `b` into `a`.
        let drift = -p.chi(0.5 * (c[a] + c[b])) * (c[b] - c[a]) - p.rho_a * (f[b] - f[a]);
        let n_face = if drift >= 0.0 {
            let ahead = if pos + 2 < res { n[b + stride] - n[b] } else { 0.0 };
            n[b] - 0.5 * van_leer(n[b] - n[a], ahead)
        } else {
            let behind = if pos > 0 { n[a] - n[a - stride] } else { 0.0 };
            n[a] + 0.5 * van_leer(behind, n[b] - n[a])
        };
        let flux = (p.d_a * (n[b] - n[a]) + drift * n_face) * inv_h2;
        dn[a] += flux;
        dn[b] -= flux;
    };
    for j in 0..res {
        for i in 0..res - 1 {
            face(j * res + i, 1, i);
        }
    }
    for j in 0..res - 1 {
        for i in 0..res {
            face(j * res + i, res, j);
        }
    }
    reaction_rhs(p, n, c, f, dc, df);
}

/// Harmonic-mean slope limiter; zero at extrema.
fn van_leer(a: f64, b: f64) -> f64 {
    if a * b > 0.0 {
        2.0 * a * b / (a + b)
    } else {
        0.0
    }
}

struct Rk4 {
    k: [Vec<f64>; 4],
    tmp: Vec<f64>,
}

impl Rk4 {
    fn new(len: usize) -> Self {
        Self { k: [vec![0.0; len], vec![0.0; len], vec![0.0; len], vec![0.0; len]], tmp: vec![0.0; len] }
    }

    fn step(&mut self, rhs: &impl Fn(&[f64], &mut [f64]), y: &[f64], dt: f64, out: &mut [f64]) {
        let [k1, k2, k3, k4] = &mut self.k;
        let tmp = &mut self.tmp;
        rhs(y, k1);
        axpy(tmp, y, 0.5 * dt, k1);
        rhs(tmp, k2);
        axpy(tmp, y, 0.5 * dt, k2);
        rhs(tmp, k3);
        axpy(tmp, y, dt, k3);
        rhs(tmp, k4);
        let w = dt / 6.0;
        for i in 0..y.len() {
            out[i] = y[i] + w * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]);
        }
    }
}

fn axpy(out: &mut [f64], y: &[f64], a: f64, x: &[f64]) {
    for ((o, y), x) in out.iter_mut().zip(y).zip(x) {
        *o = y + a * x;
    }
}

/// Central differences with mirrored ghost cells (zero normal gradient).
struct Stencil<'a> {
    field: &'a [f64],
    res: usize,
    h: f64,
}

impl Stencil<'_> {
    fn at(&self, i: isize, j: isize) -> f64 {
        let r = self.res as isize;
        let i = if i < 0 { -i - 1 } else if i >= r { 2 * r - i - 1 } else { i };
        let j = if j < 0 { -j - 1 } else if j >= r { 2 * r - j - 1 } else { j };
        self.field[j as usize * self.res + i as usize]
    }

    fn grad(&self, i: usize, j: usize) -> (f64, f64) {
        let (i, j) = (i as isize, j as isize);
        let s = 0.5 / self.h;
        ((self.at(i + 1, j) - self.at(i - 1, j)) * s, (self.at(i, j + 1) - self.at(i, j - 1)) * s)
    }

    fn laplacian(&self, i: usize, j: usize) -> f64 {
        let (i, j) = (i as isize, j as isize);
        (self.at(i + 1, j) + self.at(i - 1, j) + self.at(i, j + 1) + self.at(i, j - 1) - 4.0 * self.at(i, j))
            / (self.h * self.h)
    }
}

/// The expanded `n` equation evaluated pointwise; the first column is the
/// sum of the other six, so each row closes exactly.
fn emit_terms(state: &AngioState, p: &AngioCoefficients) -> Result<TermDataset> {
    let res = state.resolution;
    let h = state.h();
    let sn = Stencil { field: &state.n, res, h };
    let sc = Stencil { field: &state.c, res, h };
    let sf = Stencil { field: &state.f, res, h };
    let cells = res * res;
    let mut terms = Vec::with_capacity(cells * 7);
    let mut coords = Vec::with_capacity(cells * 2);
    for j in 0..res {
        for i in 0..res {
            let idx = j * res + i;
            let (n, c) = (state.n[idx], state.c[idx]);
            let (nx, ny) = sn.grad(i, j);
            let (cx, cy) = sc.grad(i, j);
            let (fx, fy) = sf.grad(i, j);
            let chi = p.chi(c);
            let grad_c_sq = cx * cx + cy * cy;
            let parts = [
                p.d_a * sn.laplacian(i, j),
                -chi * n * sc.laplacian(i, j),
                -chi * (nx * cx + ny * cy),
                -n * p.chi_prime(c) * grad_c_sq,
                -p.rho_a * n * sf.laplacian(i, j),
                -p.rho_a * (nx * fx + ny * fy),
            ];
            terms.push(parts.iter().sum());
            terms.extend_from_slice(&parts);
            let (x, y) = state.cell_center(idx);
            coords.extend_from_slice(&[x, y]);
        }
    }
    let names: Vec<String> = ANGIO_TERM_NAMES.iter().map(|s| String::from(*s)).collect();
    TermDataset::new(terms, 7, Some(vec![h * h; cells]))?
        .with_term_names(names)?
        .with_coords(coords, vec!["x".into(), "y".into()])
}
