//! Configuration, artifact formats and experiment drivers behind the
//! `diracsim` binary.

pub mod config;
pub mod dump;
pub mod error;
pub mod manifest;
pub mod plot;
pub mod run;

pub use config::{parse_config, Experiment, ExperimentConfig};
pub use dump::{load_field, GridDump, Payload};
pub use error::{CliError, Result};
pub use manifest::Manifest;
pub use run::run_experiment;
