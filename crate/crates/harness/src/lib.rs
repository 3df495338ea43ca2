//! Experiment plumbing: configs, dataset manifests, splitting, the run,
//! sweep and metrics commands behind the `unifi` binary.

pub mod cli;
pub mod config;
pub mod data;
pub mod error;
pub mod har;
pub mod metrics;
pub mod run;
pub mod sweep;
pub mod synth_cmd;

pub use config::{DatasetSpec, ExperimentConfig, SplitMode, SweepSpec, TrainSpec, WindowSpec};
pub use error::{HarnessError, Result};
pub use har::HarSynthConfig;
pub use run::{cmd_run, run_on_streams, RunReport, SeedResult};
