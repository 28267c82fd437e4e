//! File formats, reports, run manifests, parallel sweeps and benchmarks on
//! top of `regime-core`. The `regime` binary is a thin command line over
//! this crate.

pub mod bench;
pub mod cli;
pub mod error;
pub mod fsutil;
pub mod manifest;
pub mod parallel;
pub mod report;
pub mod store;

pub use error::{CliError, Result};
