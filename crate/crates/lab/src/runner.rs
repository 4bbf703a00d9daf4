//! Experiment orchestration: spin-up, filter runs, metrics and output files.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use nsda_core::analysis::{bound_report, estimate_k_prime, r_double_prime_over_k, r_prime, BoundReport};
use nsda_core::assimilation::{draw_initial_condition, FilterEnsemble, FilterModel, SPLIT_ORDER};
use nsda_core::dynamics::{random_initial_condition, spin_up, whole_steps, NseParams};
use nsda_core::limit::{continuum_limit_study, LimitReport, LimitStudy};
use nsda_core::noise::{NoiseStream, StreamRole};
use nsda_core::spectral::Lattice;
use nsda_core::{Error as CoreError, SpectralField64};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::{ExperimentConfig, ExperimentKind, Seeds};
use crate::output::{
    csv_writer, modes_header, modes_row, num, snapshot, write_json, TrajectoryWriter, ENSEMBLE_HEADER, ERROR_HEADER,
    LIMIT_HEADER,
};
use crate::presets::preset;

/// Manifest layout version.
pub const MANIFEST_FORMAT: u32 = 1;

#[derive(Debug)]
pub enum LabError {
    /// The configuration violates the listed requirements.
    Invalid(Vec<String>),
    Other(anyhow::Error),
}

impl std::fmt::Display for LabError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LabError::Invalid(v) => write!(f, "invalid configuration: {}", v.join("; ")),
            LabError::Other(e) => write!(f, "{e:#}"),
        }
    }
}

impl std::error::Error for LabError {}

impl From<anyhow::Error> for LabError {
    fn from(e: anyhow::Error) -> Self {
        LabError::Other(e)
    }
}

impl From<std::io::Error> for LabError {
    fn from(e: std::io::Error) -> Self {
        LabError::Other(e.into())
    }
}

impl From<CoreError> for LabError {
    fn from(e: CoreError) -> Self {
        LabError::Other(e.into())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "state")]
pub enum RunStatus {
    Complete,
    /// Outputs stop at the last finite sample before `time`.
    Diverged { time: f64, message: String },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub format: u32,
    pub config: ExperimentConfig,
    pub config_hash: String,
    pub seeds: Seeds,
    pub split_order: String,
    pub crate_version: String,
    pub status: RunStatus,
    pub outputs: Vec<String>,
}

/// Headline metrics of a run, also written to summary.json.
#[derive(Debug, Clone, Default, Serialize)]
pub struct RunSummary {
    pub status: Option<RunStatus>,
    #[serde(skip)]
    pub out_dir: PathBuf,
    /// Spin-up estimate of `sup ||u||^2`.
    pub r_hat: Option<f64>,
    /// Time average of `|m - u|^2` over the second half of the horizon
    /// for the first estimator.
    pub second_half_mse: Option<f64>,
    /// Range of `|m - u| / |u|` over the second half.
    pub second_half_relative: Option<(f64, f64)>,
    pub final_relative_error: Option<f64>,
    /// Largest member distance `|m_i - m_1| / |m_1|` at the first sample
    /// with all members present, and at the end.
    pub initial_spread: Option<f64>,
    pub final_spread: Option<f64>,
    /// `final_spread / initial_spread`.
    pub envelope_decay: Option<f64>,
    pub limit: Option<LimitReport>,
    pub limit_deterministic: Option<LimitReport>,
    pub bounds: Option<BoundsFile>,
}

/// Contents of bounds.json: the static bounds plus trajectory diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct BoundsFile {
    #[serde(flatten)]
    pub report: BoundReport,
    pub r_hat: Option<f64>,
    pub r_prime: Option<f64>,
    pub r_double_prime_over_k: Option<f64>,
    /// Random-search lower estimate of `K'`.
    pub k_prime_estimate: f64,
    pub empirical_second_half_mse: Option<f64>,
}

/// Resolves a preset name, a config JSON file or a manifest JSON file.
pub fn load_config(source: &str) -> anyhow::Result<ExperimentConfig> {
    if let Some(cfg) = preset(source) {
        return Ok(cfg);
    }
    let text = std::fs::read_to_string(source)
        .map_err(|e| anyhow::anyhow!("{source:?} is neither a preset nor a readable file: {e}"))?;
    let value: Value = serde_json::from_str(&text)?;
    let config = match value.get("config") {
        Some(c) if value.get("config_hash").is_some() => c.clone(),
        _ => value,
    };
    Ok(serde_json::from_value(config)?)
}

fn first_estimator(cfg: &ExperimentConfig, lattice: &Arc<Lattice<f64>>, ic: &mut NoiseStream) -> SpectralField64 {
    draw_initial_condition(lattice, &cfg.filter, cfg.ic_spread, ic)
}

fn signal_start(cfg: &ExperimentConfig, nse: &NseParams<f64>) -> anyhow::Result<(SpectralField64, Option<f64>)> {
    if cfg.spin_up > 0.0 {
        let s = spin_up(nse, cfg.spin_up, cfg.seeds.signal)?;
        Ok((s.state, Some(s.r_hat)))
    } else {
        Ok((random_initial_condition(&nse.lattice()?, cfg.seeds.signal), None))
    }
}

/// Runs `cfg` and writes its outputs into `out_dir`. Divergence is not an
/// error: outputs up to the failure are kept and the status records it.
pub fn run_experiment(cfg: &ExperimentConfig, out_dir: &Path) -> Result<RunSummary, LabError> {
    let violations = cfg.validate();
    if !violations.is_empty() {
        return Err(LabError::Invalid(violations));
    }
    std::fs::create_dir_all(out_dir)?;
    let mut summary = RunSummary { out_dir: out_dir.to_path_buf(), ..RunSummary::default() };
    let mut outputs = Vec::new();
    let status = match cfg.kind {
        ExperimentKind::LimitStudy => run_limit(cfg, out_dir, &mut summary, &mut outputs)?,
        ExperimentKind::BoundsReport => {
            let lattice = cfg.nse.lattice()?;
            let bounds = bounds_file(cfg, &lattice, None, None, None)?;
            write_json(&out_dir.join("bounds.json"), &bounds)?;
            outputs.push("bounds.json".into());
            summary.bounds = Some(bounds);
            RunStatus::Complete
        }
        _ => run_trajectory(cfg, out_dir, &mut summary, &mut outputs)?,
    };
    summary.status = Some(status.clone());
    write_json(&out_dir.join("summary.json"), &summary)?;
    outputs.push("summary.json".into());
    let manifest = Manifest {
        format: MANIFEST_FORMAT,
        config: cfg.clone(),
        config_hash: cfg.content_hash(),
        seeds: cfg.seeds,
        split_order: SPLIT_ORDER.into(),
        crate_version: env!("CARGO_PKG_VERSION").into(),
        status,
        outputs,
    };
    write_json(&out_dir.join("manifest.json"), &manifest)?;
    Ok(summary)
}

fn bounds_file(
    cfg: &ExperimentConfig,
    lattice: &Arc<Lattice<f64>>,
    r_hat: Option<f64>,
    r_prime: Option<f64>,
    mse: Option<f64>,
) -> anyhow::Result<BoundsFile> {
    let delta = cfg.nse.delta();
    let report = bound_report(&cfg.filter, delta, lattice)?;
    let mut s = NoiseStream::new(cfg.seeds.noise, StreamRole::Stationary, lattice.len());
    let k_prime_estimate = estimate_k_prime(lattice, 20, &mut s)?;
    Ok(BoundsFile {
        r_double_prime_over_k: r_prime.map(|r| r_double_prime_over_k(r, report.trace, &cfg.filter, delta)),
        report,
        r_hat,
        r_prime,
        k_prime_estimate,
        empirical_second_half_mse: mse,
    })
}

/// Member bookkeeping for ensemble.csv.
struct Member {
    start: f64,
    index: usize,
}

fn run_trajectory(
    cfg: &ExperimentConfig,
    out: &Path,
    summary: &mut RunSummary,
    outputs: &mut Vec<String>,
) -> anyhow::Result<RunStatus> {
    let (u0, r_hat) = signal_start(cfg, &cfg.nse)?;
    summary.r_hat = r_hat;
    let lattice = Arc::clone(u0.lattice());
    let tracked = cfg.tracked();
    let dt = cfg.nse.dt;
    let steps = whole_steps(cfg.horizon, dt)?;
    let every = whole_steps(cfg.sample_every, dt)?.max(1);
    let checkpoint = cfg.checkpoint_every.map(|c| whole_steps(c, dt)).transpose()?;
    let (launches, per_launch): (Vec<usize>, usize) = match cfg.kind {
        ExperimentKind::PullbackEnsemble => {
            (cfg.start_times.iter().map(|&t| whole_steps(t, dt)).collect::<Result<_, _>>()?, cfg.ensemble_size)
        }
        ExperimentKind::ForwardStabilityEnsemble => (vec![0], cfg.ensemble_size),
        _ => (vec![0], 1),
    };
    let all_present = *launches.last().expect("at least one launch");
    let ensemble = cfg.kind.is_ensemble();

    let mut ic = NoiseStream::new(cfg.seeds.ic, StreamRole::InitialCondition, lattice.len());
    let stream = NoiseStream::new(cfg.seeds.noise, StreamRole::Filter, lattice.len());
    let mut ens = FilterEnsemble::new(&cfg.nse, &cfg.filter, u0, Vec::new(), stream)?;
    let model = FilterModel::new(&cfg.filter, &lattice)?;
    let forcing = cfg.nse.forcing.field(&lattice)?;

    let mut modes = csv_writer(&out.join("modes.csv"), &modes_header(&tracked))?;
    let mut errors = csv_writer(&out.join("error.csv"), &ERROR_HEADER)?;
    let mut ens_csv = if ensemble { Some(csv_writer(&out.join("ensemble.csv"), &ENSEMBLE_HEADER)?) } else { None };
    let mut traj = TrajectoryWriter::create(&out.join("signal.ndjson"))?;
    outputs.extend(["modes.csv", "error.csv", "signal.ndjson"].map(String::from));
    if ensemble {
        outputs.push("ensemble.csv".into());
    }

    let mut members: Vec<Member> = Vec::new();
    let mut r_prime_sup = 0.0f64;
    let (mut mse_sum, mut mse_n) = (0.0, 0usize);
    let mut rel_range: Option<(f64, f64)> = None;
    let mut last_rel = None;
    let mut spreads: Vec<f64> = Vec::new();
    let mut status = RunStatus::Complete;

    for n in 0..=steps {
        let t = n as f64 * dt;
        for _ in 0..launches.iter().filter(|&&s| s == n).count() * per_launch {
            ens.add_member(first_estimator(cfg, &lattice, &mut ic))?;
            members.push(Member { start: t, index: members.len() + 1 });
        }
        if n % every == 0 || n == steps {
            let u = ens.signal();
            traj.write(t, &tracked, u)?;
            r_prime_sup = r_prime_sup.max(r_prime(&forcing, &model, std::slice::from_ref(u)));
            if let Some(m) = ens.members().first() {
                let e = m - u;
                let (eh, uh) = (e.norm_h(), u.norm_h());
                let rel = eh / uh;
                modes.write_record(modes_row(t, &tracked, u, m))?;
                errors.write_record([t, eh, e.norm_v(), uh, m.norm_h(), rel].map(num))?;
                if 2 * n >= steps {
                    mse_sum += eh * eh;
                    mse_n += 1;
                    rel_range = Some(rel_range.map_or((rel, rel), |(a, b)| (a.min(rel), b.max(rel))));
                }
                last_rel = Some(rel);
                if let Some(w) = ens_csv.as_mut() {
                    let mh = m.norm_h();
                    let mut spread = 0.0f64;
                    for (info, mi) in members.iter().zip(ens.members()) {
                        let d = (mi - m).norm_h() / mh;
                        spread = spread.max(d);
                        let r = (mi - u).norm_h() / uh;
                        w.write_record([num(t), num(info.start), info.index.to_string(), num(d), num(r), num(mi.norm_h())])?;
                    }
                    if n >= all_present {
                        spreads.push(spread);
                    }
                }
            }
        }
        if let Some(c) = checkpoint {
            if n % c == 0 {
                checkpoint_fields(out, &format!("{n:08}"), &ens)?;
            }
        }
        if n == steps {
            break;
        }
        match ens.advance() {
            Ok(()) => {}
            Err(CoreError::Diverged { time, what }) => {
                status = RunStatus::Diverged { time, message: what };
                break;
            }
            Err(e) => return Err(e.into()),
        }
    }
    checkpoint_fields(out, "final", &ens)?;
    outputs.push("snapshots/".into());
    modes.flush()?;
    errors.flush()?;
    if let Some(mut w) = ens_csv {
        w.flush()?;
    }
    traj.finish()?;

    summary.second_half_mse = (mse_n > 0).then(|| mse_sum / mse_n as f64);
    summary.second_half_relative = rel_range;
    summary.final_relative_error = last_rel;
    if ensemble && !spreads.is_empty() {
        let (first, last) = (spreads[0], *spreads.last().unwrap());
        summary.initial_spread = Some(first);
        summary.final_spread = Some(last);
        summary.envelope_decay = Some(last / first);
    }
    let bounds = bounds_file(cfg, &lattice, r_hat, Some(r_prime_sup), summary.second_half_mse)?;
    write_json(&out.join("bounds.json"), &bounds)?;
    outputs.push("bounds.json".into());
    summary.bounds = Some(bounds);
    Ok(status)
}

fn checkpoint_fields(out: &Path, tag: &str, ens: &FilterEnsemble<f64>) -> anyhow::Result<()> {
    let dir = out.join("snapshots");
    snapshot(&dir, &format!("signal_{tag}"), ens.signal())?;
    if let Some(m) = ens.members().first() {
        snapshot(&dir, &format!("estimate_{tag}"), m)?;
    }
    Ok(())
}

fn run_limit(
    cfg: &ExperimentConfig,
    out: &Path,
    summary: &mut RunSummary,
    outputs: &mut Vec<String>,
) -> anyhow::Result<RunStatus> {
    let settings = cfg.limit.as_ref().expect("validated");
    let (u0, r_hat) = signal_start(cfg, &cfg.nse)?;
    summary.r_hat = r_hat;
    let lattice = Arc::clone(u0.lattice());
    let mut ic = NoiseStream::new(cfg.seeds.ic, StreamRole::InitialCondition, lattice.len());
    let m0 = &u0 + &first_estimator(cfg, &lattice, &mut ic);
    let fine = NseParams { dt: cfg.nse.dt / settings.substeps as f64, ..cfg.nse.clone() };
    let study = |filter| LimitStudy {
        filter,
        nse: fine.clone(),
        h_list: settings.h_list.clone(),
        horizon: cfg.horizon,
        noise_seed: cfg.seeds.noise,
    };
    let mut cases = vec![("stochastic", continuum_limit_study(&study(cfg.filter.clone()), &u0, &m0))];
    if settings.deterministic_companion {
        let det = nsda_core::assimilation::FilterParams { sigma0: 0.0, ..cfg.filter.clone() };
        cases.push(("deterministic", continuum_limit_study(&study(det), &u0, &m0)));
    }
    let mut w = csv_writer(&out.join("limit.csv"), &LIMIT_HEADER)?;
    let mut status = RunStatus::Complete;
    let mut reports = serde_json::Map::new();
    for (name, result) in cases {
        match result {
            Ok(r) => {
                for row in &r.rows {
                    w.write_record([name.to_string(), num(row.h), num(row.sup_error), num(row.terminal_error)])?;
                }
                reports.insert(name.into(), serde_json::to_value(&r)?);
                if name == "stochastic" {
                    summary.limit = Some(r);
                } else {
                    summary.limit_deterministic = Some(r);
                }
            }
            Err(CoreError::Diverged { time, what }) => {
                status = RunStatus::Diverged { time, message: format!("{name}: {what}") };
            }
            Err(e) => return Err(e.into()),
        }
    }
    w.flush()?;
    write_json(&out.join("limit.json"), &reports)?;
    outputs.extend(["limit.csv", "limit.json"].map(String::from));
    Ok(status)
}
