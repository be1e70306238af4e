//! Staged command-line pipeline: raw trajectories → metrics → objectives → Pareto
//! frontier → plot-ready report, with a content-digest manifest per stage.

pub mod config;
pub mod error;
pub mod manifest;
pub mod report;
pub mod stages;

pub use config::RunConfig;
pub use error::CliError;
pub use manifest::{validate_chain, StageManifest};
pub use stages::{cmd_ingest, cmd_metrics, cmd_objectives, cmd_pareto, cmd_report, cmd_synth, run_all, Run};
