//! Taxi demand forecasting experiments: synthetic cities, CSV ingestion,
//! dual tessellation, per-cell model selection and expert combination.

pub mod artifacts;
pub mod cli;
pub mod config;
pub mod error;
pub mod io;
pub mod pipeline;
pub mod report;
pub mod synth;

pub use config::ExperimentConfig;
pub use error::{Error, Result};
