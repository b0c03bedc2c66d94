//! The `collabspan` pipeline: generate synthetic events, analyze an event
//! stream into cohort tables and fits, and sweep the project-duration model.

pub mod config;
pub mod generate;
pub mod pipeline;
pub mod sensitivity;

pub use config::{GaussianPoint, RunConfig, SweepConfig};
pub use generate::cmd_generate;
pub use pipeline::{cmd_analyze, Analysis, Manifest};
pub use sensitivity::{cmd_sensitivity, SensitivityReport};

/// Runs `f` on `threads` worker threads. One thread takes the sequential
/// path; `None` uses the global pool.
pub fn with_threads<R: Send>(threads: Option<usize>, f: impl FnOnce() -> R + Send) -> anyhow::Result<R> {
    match threads {
        Some(1) => Ok(collabspan_core::exec::sequential(f)),
        #[cfg(feature = "parallel")]
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build()?;
            Ok(pool.install(f))
        }
        _ => Ok(f()),
    }
}
