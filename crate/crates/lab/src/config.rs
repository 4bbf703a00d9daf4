use std::path::PathBuf;

use nsda_core::assimilation::FilterParams;
use nsda_core::dynamics::{whole_steps, NseParams};
use nsda_core::spectral::WaveIndex;
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    ForwardAccuracy,
    DeterministicSync,
    ForwardStabilityEnsemble,
    PullbackEnsemble,
    LimitStudy,
    BoundsReport,
}

impl ExperimentKind {
    pub fn is_ensemble(self) -> bool {
        matches!(self, Self::ForwardStabilityEnsemble | Self::PullbackEnsemble)
    }
}

/// Seeds of the independent random streams. The filter noise `W` is keyed
/// by `noise` alone, so every member of an ensemble sees the same path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Seeds {
    /// Random initial state that the spin-up starts from.
    pub signal: u64,
    pub noise: u64,
    /// Estimator initial conditions.
    pub ic: u64,
}

impl Seeds {
    pub fn all(seed: u64) -> Self {
        Self { signal: seed, noise: seed, ic: seed }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitSettings {
    /// Strictly decreasing observation intervals.
    pub h_list: Vec<f64>,
    /// Fine steps per `nse.dt` used by the continuous reference, the signal
    /// and every forecast.
    pub substeps: usize,
    /// Also run the study with `sigma0 = 0`.
    pub deterministic_companion: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub preset: Option<String>,
    pub kind: ExperimentKind,
    pub nse: NseParams<f64>,
    pub filter: FilterParams<f64>,
    /// Run length after spin-up.
    pub horizon: f64,
    /// Discarded transient before the signal starts.
    pub spin_up: f64,
    pub ensemble_size: usize,
    /// Estimator initial conditions are drawn from `N(0, ic_spread^2 C)`;
    /// limit studies perturb the signal by such a draw instead.
    pub ic_spread: f64,
    #[serde(default)]
    pub start_times: Vec<f64>,
    pub seeds: Seeds,
    /// Output sampling interval in time units.
    pub sample_every: f64,
    /// Modes written to modes.csv.
    pub tracked_modes: Vec<[i32; 2]>,
    /// Interval between full-field snapshots; none when absent.
    #[serde(default)]
    pub checkpoint_every: Option<f64>,
    #[serde(default)]
    pub limit: Option<LimitSettings>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

fn divides(span: f64, dt: f64) -> bool {
    whole_steps(span, dt).is_ok()
}

impl ExperimentConfig {
    pub fn tracked(&self) -> Vec<WaveIndex> {
        self.tracked_modes.iter().filter_map(|&[a, b]| WaveIndex::new(a, b)).collect()
    }

    /// Every violated requirement, worded after the inequality it breaks.
    pub fn validate(&self) -> Vec<String> {
        let mut out = self.filter.violations();
        if let Err(e) = self.nse.validate() {
            out.push(e.to_string());
        }
        let dt = self.nse.dt;
        if !(dt > 0.0) {
            return out;
        }
        if !(self.horizon > 0.0) {
            out.push(format!("horizon > 0 (got {})", self.horizon));
        } else if !divides(self.horizon, dt) {
            out.push(format!("dt = {dt} must divide horizon = {}", self.horizon));
        }
        if !(self.spin_up >= 0.0) || !divides(self.spin_up, dt) {
            out.push(format!("dt = {dt} must divide spin_up = {} >= 0", self.spin_up));
        }
        if !(self.sample_every > 0.0) || !divides(self.sample_every, dt) {
            out.push(format!("dt = {dt} must divide the sampling stride {}", self.sample_every));
        }
        if let Some(c) = self.checkpoint_every {
            if !(c > 0.0) || !divides(c, dt) {
                out.push(format!("dt = {dt} must divide checkpoint_every = {c}"));
            }
        }
        if !(self.ic_spread >= 0.0) {
            out.push(format!("ic_spread >= 0 (got {})", self.ic_spread));
        }
        let kmax = self.nse.n as i32 / 2 - 1;
        for &[a, b] in &self.tracked_modes {
            if WaveIndex::new(a, b).is_none() || a.abs() > kmax || b.abs() > kmax {
                out.push(format!("tracked mode ({a},{b}) is zero or not resolved at N = {}", self.nse.n));
            }
        }
        match self.kind {
            ExperimentKind::DeterministicSync if self.filter.sigma0 != 0.0 => {
                out.push(format!("deterministic-sync needs sigma0 = 0 (got {})", self.filter.sigma0));
            }
            ExperimentKind::ForwardStabilityEnsemble | ExperimentKind::PullbackEnsemble if self.ensemble_size < 1 => {
                out.push("ensemble_size >= 1".into());
            }
            ExperimentKind::PullbackEnsemble => {
                if self.start_times.is_empty() {
                    out.push("pullback runs need at least one start time".into());
                }
                if self.start_times.windows(2).any(|w| !(w[0] < w[1])) {
                    out.push("start_times must be strictly increasing".into());
                }
                for &t in &self.start_times {
                    if !(t >= 0.0 && t < self.horizon) || !divides(t, dt) {
                        out.push(format!("start time {t} must be a multiple of dt in [0, horizon)"));
                    }
                }
            }
            ExperimentKind::LimitStudy => match &self.limit {
                None => out.push("limit-study needs limit settings".into()),
                Some(l) => {
                    if l.h_list.is_empty() || l.h_list.windows(2).any(|w| !(w[1] < w[0])) {
                        out.push("h_list must be non-empty and strictly decreasing".into());
                    }
                    if l.substeps == 0 {
                        out.push("substeps >= 1".into());
                    }
                    let fine = dt / l.substeps.max(1) as f64;
                    if let Some(&finest) = l.h_list.last() {
                        for &h in &l.h_list {
                            if !(h > 0.0) || !divides(h, fine) || !divides(self.horizon, h) || !divides(h, finest) {
                                out.push(format!(
                                    "h = {h} must be a multiple of the fine step {fine} and of {finest}, and divide the horizon"
                                ));
                            }
                        }
                    }
                }
            },
            _ => {}
        }
        out
    }

    pub fn content_hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let json = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }
}

/// Applies `key=value` overrides, where `key` is a dotted path into the
/// JSON form of the config and `value` is JSON (bare words are strings).
pub fn apply_overrides(cfg: &ExperimentConfig, overrides: &[String]) -> anyhow::Result<ExperimentConfig> {
    let mut v = serde_json::to_value(cfg)?;
    for o in overrides {
        let (path, raw) = o.split_once('=').ok_or_else(|| anyhow::anyhow!("override {o:?} is not key=value"))?;
        let value: Value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
        let mut slot = &mut v;
        for part in path.split('.') {
            slot = match slot {
                Value::Object(map) => map
                    .get_mut(part)
                    .ok_or_else(|| anyhow::anyhow!("unknown config key {part:?} in {path:?}"))?,
                Value::Array(items) => {
                    let i: usize = part.parse().map_err(|_| anyhow::anyhow!("{part:?} is not an index in {path:?}"))?;
                    items.get_mut(i).ok_or_else(|| anyhow::anyhow!("index {i} out of range in {path:?}"))?
                }
                _ => anyhow::bail!("{path:?} descends into a scalar"),
            };
        }
        *slot = value;
    }
    Ok(serde_json::from_value(v)?)
}
