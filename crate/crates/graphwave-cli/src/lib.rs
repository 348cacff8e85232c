//! Reproducible experiment orchestration for the junction library:
//! config ingestion, named experiments with structured outputs, and the
//! verification suite.

pub mod config;
pub mod experiments;
pub mod manifest;
pub mod suite;

pub use config::{Experiment, ExperimentConfig, Family, Subspace};
pub use experiments::run;
pub use manifest::{CheckRecord, RunManifest};
pub use suite::{run_suite, write_suite_outputs, SuiteReport};
