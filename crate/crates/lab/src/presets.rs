//! Named configurations for the forward accuracy, synchronization,
//! stability, pullback and limit experiments.
//!
//! Filter parameters follow the published experiments. Grid, viscosity,
//! forcing, horizons, ensemble counts and pullback start times are not
//! given there and use the defaults below.

use nsda_core::assimilation::FilterParams;
use nsda_core::dynamics::NseParams;
use nsda_core::spectral::Cutoff;

use crate::config::{ExperimentConfig, ExperimentKind, LimitSettings, Seeds};

pub const PRESET_NAMES: [&str; 11] = [
    "beta0-sigma05",
    "beta0-sigma005",
    "beta1-sigma05",
    "beta1-sigma005",
    "omega10",
    "omega30",
    "machine-precision",
    "stability-alpha05",
    "stability-alpha1",
    "pullback-3starts",
    "limit-study",
];

/// Default horizon of forward runs.
pub const DEFAULT_HORIZON: f64 = 40.0;
pub const DEFAULT_SPIN_UP: f64 = 50.0;
pub const DEFAULT_ENSEMBLE_SIZE: usize = 5;
pub const DEFAULT_IC_SPREAD: f64 = 30.0;

fn base(name: &str, kind: ExperimentKind, filter: FilterParams<f64>) -> ExperimentConfig {
    ExperimentConfig {
        preset: Some(name.to_string()),
        kind,
        nse: NseParams::default(),
        filter,
        horizon: DEFAULT_HORIZON,
        spin_up: DEFAULT_SPIN_UP,
        ensemble_size: 1,
        ic_spread: DEFAULT_IC_SPREAD,
        start_times: Vec::new(),
        seeds: Seeds { signal: 1, noise: 2, ic: 3 },
        sample_every: 0.1,
        tracked_modes: vec![[1, 0], [1, 1], [2, -1], [4, 3], [8, 8], [12, 5]],
        checkpoint_every: None,
        limit: None,
        output_dir: None,
    }
}

fn filter(omega: f64, sigma0: f64, alpha: f64, beta: f64) -> FilterParams<f64> {
    FilterParams { omega, sigma0, alpha, beta, cutoff: Cutoff::Infinite, ..FilterParams::default() }
}

pub fn preset(name: &str) -> Option<ExperimentConfig> {
    use ExperimentKind::*;
    let cfg = match name {
        "beta0-sigma05" => base(name, ForwardAccuracy, filter(100.0, 0.05, 0.5, 0.0)),
        "beta0-sigma005" => base(name, ForwardAccuracy, filter(100.0, 0.005, 0.5, 0.0)),
        "beta1-sigma05" => base(name, ForwardAccuracy, filter(100.0, 0.05, 0.5, 1.0)),
        "beta1-sigma005" => base(name, ForwardAccuracy, filter(100.0, 0.005, 0.5, 1.0)),
        "omega10" => base(name, DeterministicSync, filter(10.0, 0.0, 0.5, 0.0)),
        "omega30" => base(name, DeterministicSync, filter(30.0, 0.0, 0.5, 0.0)),
        "machine-precision" => base(name, DeterministicSync, filter(100.0, 0.0, 0.5, 0.0)),
        "stability-alpha05" => ExperimentConfig {
            ensemble_size: DEFAULT_ENSEMBLE_SIZE,
            ..base(name, ForwardStabilityEnsemble, filter(100.0, 0.005, 0.5, 0.0))
        },
        "stability-alpha1" => ExperimentConfig {
            ensemble_size: DEFAULT_ENSEMBLE_SIZE,
            ..base(name, ForwardStabilityEnsemble, filter(100.0, 0.005, 1.0, 0.0))
        },
        "pullback-3starts" => ExperimentConfig {
            ensemble_size: DEFAULT_ENSEMBLE_SIZE,
            start_times: vec![0.0, 5.0, 10.0],
            ..base(name, PullbackEnsemble, filter(100.0, 0.005, 0.5, 0.0))
        },
        // h omega stays below 0.1 so the fitted range is asymptotic
        "limit-study" => ExperimentConfig {
            nse: NseParams { n: 32, ..NseParams::default() },
            horizon: 1.0,
            ic_spread: 3.0,
            sample_every: 0.005,
            tracked_modes: vec![[1, 0], [1, 1], [2, -1], [4, 3]],
            limit: Some(LimitSettings {
                h_list: vec![0.04, 0.02, 0.01, 0.005],
                substeps: 16,
                deterministic_companion: true,
            }),
            ..base(name, LimitStudy, filter(2.0, 0.05, 0.5, 0.0))
        },
        _ => return None,
    };
    Some(cfg)
}
