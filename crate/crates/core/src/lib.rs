//! Temporal collaboration networks and their lifetime statistics.
//!
//! The crate turns project records (an identifier, a completion year and the
//! list of participants) into a temporal graph by clique expansion, groups
//! nodes and edges into entry-year cohorts, and fits Weibull and power-law
//! models to each cohort's lifetime histogram by linear regression on
//! transformed coordinates.
//!
//! Module map:
//!
//! * [`ingest`] reads delimited or JSON-lines event files and assigns project
//!   durations.
//! * [`tempgraph`] expands events into edge instances and merges them into
//!   per-pair activity intervals.
//! * [`cohorts`] computes lifetimes and per-cohort histograms.
//! * [`fitting`] holds the regressions, χ² and the parameter series.
//! * [`synth`] generates datasets with known lifetime laws.
//! * [`exec`] is the data-parallel layer (rayon, or plain loops without the
//!   `parallel` feature).

pub mod cohorts;
pub mod error;
pub mod exec;
pub mod fitting;
pub mod ingest;
pub mod synth;
pub mod tempgraph;

pub use error::{Error, Result};

/// Version string written into every output header.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
