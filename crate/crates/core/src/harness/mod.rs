//! Experiment orchestration behind the `covreg` binary: configuration, CSV
//! ingestion and emission, and the simulation and MANOVA runners.
//!
//! All compute is pure; this module owns the I/O and produces outputs in a
//! deterministic order so runs are reproducible from `(config, seed)`.

pub mod config;
pub mod estimate;
pub mod io;
pub mod resample;
pub mod simulate;

use crate::error::{Error, Result};

/// Run `f` on a dedicated pool with `threads` workers, or the global pool.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    match threads {
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map_err(|e| Error::Config(e.to_string()))?
            .install(f),
        None => f(),
    }
}

pub use config::{ExperimentConfig, ManovaConfig};
pub use estimate::{estimate, EstimateReport};
pub use resample::{manova_csv, run_manova};
pub use simulate::{results_csv, run_simulation, summarize, summary_csv};
