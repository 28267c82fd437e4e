//! Reference datasets: a synthetic two-regime field, the Munk western
//! boundary problem, and a tumor-angiogenesis reaction-diffusion model.

mod angio;
mod munk;
mod synthetic;

pub use angio::{
    fibronectin_factor_step, initial_state, red_noise, simulate_angiogenesis, simulate_from, AngioCoefficients,
    AngioConfig, AngioRun, AngioState, AngioStats, ANGIO_TERM_NAMES,
};
pub use munk::{gen_munk, munk_terms, MunkConfig, MunkCurves, MunkOutput, SVERDRUP, WESTERN_BOUNDARY};
pub use synthetic::{gen_synthetic, synthetic_terms, true_synthetic_hypotheses, Modulation, SyntheticConfig};
