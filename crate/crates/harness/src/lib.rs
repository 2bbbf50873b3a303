//! Experiment harness: configuration, data preparation, training runs,
//! early-stop retraining, p and size sweeps, and the files they emit.

pub mod config;
pub mod confusion;
pub mod data;
pub mod error;
pub mod evaluation;
pub mod metrics;
pub mod output;
pub mod retrain;
pub mod runner;
pub mod sweep;

pub use config::ExperimentConfig;
pub use error::{HarnessError, Result};
pub use metrics::MetricsRecord;
pub use runner::{run_training, RunOutcome};
