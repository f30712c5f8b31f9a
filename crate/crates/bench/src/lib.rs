//! Benchmark harness for the `scsg` solvers.
//!
//! Loads a libsvm or CSV dataset, trims the rows with the largest
//! smoothness constants, sweeps every solver over the step grid
//! `η = 2^k / L`, estimates `F*` with long reference runs and writes one
//! trace per grid point plus a `summary.json`.

pub mod accuracy;
pub mod algorithm;
pub mod config;
pub mod dataset;
pub mod diagnostics;
pub mod error;
pub mod optimum;
pub mod pipeline;
pub mod sweep;
pub mod synthetic;
pub mod trace_io;

pub use algorithm::Algorithm;
pub use config::RunConfig;
pub use dataset::{load_dataset, DataFormat, Dataset};
pub use error::{BenchError, Result};

/// Path of the bundled 3-class dataset (n = 2000, p = 20, libsvm).
pub fn bundled_dataset_path() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("data/clusters3.libsvm")
}
