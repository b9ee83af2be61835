//! Experiment harness for ensemble AIS: config files, presets, replicate
//! orchestration and result files.

pub mod compare;
pub mod config;
pub mod emit;
pub mod error;
pub mod experiment;
pub mod presets;

pub use config::{load_config, load_config_str, ExperimentConfig};
pub use emit::emit_results;
pub use error::{HarnessError, Result};
pub use experiment::{run_experiment, ExperimentResult};
