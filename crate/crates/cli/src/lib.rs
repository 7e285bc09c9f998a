//! Experiment runner for the MNIST autoencoder, quantum feature transform
//! and classifier pipeline.
//!
//! [`Runner`] executes individual stages or the whole pipeline for one
//! [`ExperimentConfig`], writing every artifact under the configured output
//! directory.

pub mod config;
pub mod error;
pub mod report;
pub mod stages;

pub use config::ExperimentConfig;
pub use error::{CliError, Result};
pub use report::EvalReport;
pub use stages::{FeatureSet, PipelineOutcome, Runner};
