//! Experiment layer: configurations, presets, runs and their output files.

// `!(x > 0)` rejects NaN as well, which is the point
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod output;
pub mod presets;
pub mod runner;

pub use config::{apply_overrides, ExperimentConfig, ExperimentKind, LimitSettings, Seeds};
pub use presets::{preset, PRESET_NAMES};
pub use runner::{load_config, run_experiment, LabError, Manifest, RunStatus, RunSummary};
