//! Configuration, orchestration and artifact output for placement
//! experiments.

pub mod commands;
pub mod config;
pub mod instances;
pub mod output;
pub mod pipeline;

pub use config::ExperimentConfig;
