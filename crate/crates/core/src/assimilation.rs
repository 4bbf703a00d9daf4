//! The continuous-time 3DVAR filter
//!
//! ```text
//! dm/dt + delta A m + B(m, m) + omega A^(-2 alpha) P_lambda (m - u)
//!     = f + omega sigma0 A^(-2 alpha - beta) P_lambda dW/dt
//! ```
//!
//! integrated by splitting: a Navier-Stokes step for `m`, then an
//! Ornstein-Uhlenbeck substep that relaxes the observed modes towards the
//! signal and adds the observation noise. Also the stationary stochastic
//! convolution `Z_phi` solving `dZ + (delta A + phi) Z dt = dW_filter`.

use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::dynamics::{guard, whole_steps, NseParams, NseStepper};
use crate::error::{Error, Result};
use crate::noise::NoiseStream;
use crate::scalar::Real;
use crate::spectral::{Cutoff, Lattice, SpectralField, WaveIndex};

/// Composition order of the split step, recorded in run manifests.
pub const SPLIT_ORDER: &str = "nse-then-ou";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OuScheme {
    /// Euler-Maruyama on the nudging and noise terms.
    #[default]
    EulerMaruyama,
    /// Exact per-mode OU transition with the signal frozen over the step.
    Exact,
}

/// Covariance and noise parameters. `C = omega sigma0^2 A^(-2 zeta)`,
/// `Gamma_0 = sigma0^2 A^(-2 beta) P_lambda` with `zeta = alpha + beta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct FilterParams<T: Real> {
    /// Variance inflation ratio `omega`.
    pub omega: T,
    /// Observation noise scale `sigma0`.
    pub sigma0: T,
    pub alpha: T,
    pub beta: T,
    /// Observation cutoff `lambda`.
    pub cutoff: Cutoff<T>,
    /// Shift `phi` of the stationary convolution `Z_phi`.
    #[serde(default)]
    pub phi: T,
    #[serde(default)]
    pub ou_scheme: OuScheme,
}

impl Default for FilterParams<f64> {
    fn default() -> Self {
        Self {
            omega: 100.0,
            sigma0: 0.005,
            alpha: 0.5,
            beta: 0.0,
            cutoff: Cutoff::Infinite,
            phi: 0.0,
            ou_scheme: OuScheme::EulerMaruyama,
        }
    }
}

impl<T: Real> FilterParams<T> {
    /// Model covariance decay exponent `zeta = alpha + beta`.
    pub fn zeta(&self) -> T {
        self.alpha + self.beta
    }

    /// `epsilon = omega sigma0`, the noise amplitude of the filter.
    pub fn epsilon(&self) -> T {
        self.omega * self.sigma0
    }

    /// Exponent of the noise trace, `4 alpha + 2 beta`.
    pub fn trace_exponent(&self) -> T {
        T::lit(4.0) * self.alpha + T::lit(2.0) * self.beta
    }

    /// Every violated parameter constraint, as a human-readable inequality.
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if !(self.omega >= T::zero()) {
            v.push(format!("omega >= 0 (omega = {})", self.omega));
        }
        if !(self.sigma0 >= T::zero()) {
            v.push(format!("sigma0 >= 0 (sigma0 = {})", self.sigma0));
        }
        if !(self.phi >= T::zero()) {
            v.push(format!("phi >= 0 (phi = {})", self.phi));
        }
        if !self.alpha.is_finite() || !self.beta.is_finite() {
            v.push("alpha and beta finite".to_string());
        }
        if self.cutoff.is_infinite() {
            if !(self.trace_exponent() > T::one()) {
                v.push(format!("4α+2β>1 (4α+2β = {})", self.trace_exponent()));
            }
            if !(self.alpha > T::lit(-0.5)) {
                v.push(format!("α>-1/2 (α = {})", self.alpha));
            }
        }
        v
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidParameter(v.join("; ")))
        }
    }
}

/// Per-mode coefficients of the filter on a fixed lattice.
#[derive(Debug, Clone)]
pub struct FilterModel<T: Real> {
    lattice: Arc<Lattice<T>>,
    params: FilterParams<T>,
    retained: Vec<bool>,
    /// `omega mu^(-2 alpha)` on retained modes, zero elsewhere.
    relax: Vec<T>,
    /// `omega sigma0 mu^(-2 alpha - beta)` on retained modes, zero elsewhere.
    noise: Vec<T>,
}

impl<T: Real> FilterModel<T> {
    pub fn new(params: &FilterParams<T>, lattice: &Arc<Lattice<T>>) -> Result<Self> {
        params.validate()?;
        let retained = SpectralField::retained_mask(lattice, params.cutoff);
        let two = T::lit(2.0);
        let mut relax = Vec::with_capacity(lattice.len());
        let mut noise = Vec::with_capacity(lattice.len());
        for (&mu, &keep) in lattice.mu().iter().zip(&retained) {
            if keep {
                relax.push(params.omega * mu.powf(-two * params.alpha));
                noise.push(params.epsilon() * mu.powf(-two * params.alpha - params.beta));
            } else {
                relax.push(T::zero());
                noise.push(T::zero());
            }
        }
        Ok(Self { lattice: Arc::clone(lattice), params: params.clone(), retained, relax, noise })
    }

    pub fn lattice(&self) -> &Arc<Lattice<T>> {
        &self.lattice
    }

    pub fn params(&self) -> &FilterParams<T> {
        &self.params
    }

    pub fn retained(&self) -> &[bool] {
        &self.retained
    }

    pub fn relaxation_rates(&self) -> &[T] {
        &self.relax
    }

    pub fn noise_amplitudes(&self) -> &[T] {
        &self.noise
    }
}

fn increment_field<T: Real>(model: &FilterModel<T>, dw: &[Complex<T>]) -> SpectralField<T> {
    let coeffs = dw.iter().zip(&model.noise).map(|(w, &s)| *w * s).collect();
    SpectralField::from_coeffs(&model.lattice, coeffs)
}

/// Increment of `omega sigma0 A^(-2 alpha - beta) P_lambda W` over `dt`,
/// consuming one step of `stream`.
pub fn noise_increment<T: Real>(model: &FilterModel<T>, dt: T, stream: &mut NoiseStream) -> SpectralField<T> {
    increment_field(model, &stream.next_increment(dt))
}

/// Ornstein-Uhlenbeck substep for the observed modes given the Brownian
/// increments `dw` (one per lattice mode, `E|dw|^2 = dt`). Modes outside
/// the cutoff are returned unchanged.
pub fn ou_substep<T: Real>(
    m: &SpectralField<T>,
    u: &SpectralField<T>,
    model: &FilterModel<T>,
    dt: T,
    dw: &[Complex<T>],
) -> Result<SpectralField<T>> {
    m.check_compatible(u)?;
    let mut out = m.clone();
    let uc = u.coeffs();
    let scheme = model.params.ou_scheme;
    for (i, c) in out.coeffs_mut().iter_mut().enumerate() {
        if !model.retained[i] {
            continue;
        }
        let a = model.relax[i];
        let s = model.noise[i];
        match scheme {
            OuScheme::EulerMaruyama => {
                *c = *c - (*c - uc[i]) * (a * dt) + dw[i] * s;
            }
            OuScheme::Exact => {
                let decay = (-a * dt).exp();
                // exact variance of int_0^dt e^{-a(dt-s)} dW over dt
                let var_ratio = if a * dt > T::lit(1e-12) {
                    (T::one() - decay * decay) / (T::lit(2.0) * a * dt)
                } else {
                    T::one()
                };
                *c = uc[i] + (*c - uc[i]) * decay + dw[i] * (s * var_ratio.sqrt());
            }
        }
    }
    Ok(out)
}

/// One split step: Navier-Stokes for `m` over `dt`, then the OU substep
/// towards `u_next`, the signal at the end of the step.
pub fn filter_step<T: Real>(
    m: &SpectralField<T>,
    u_next: &SpectralField<T>,
    model: &FilterModel<T>,
    stepper: &NseStepper<T>,
    t: T,
    dw: &[Complex<T>],
) -> Result<SpectralField<T>> {
    let predicted = stepper.step(m, t)?;
    let out = ou_substep(&predicted, u_next, model, stepper.dt(), dw)?;
    guard(&out, t + stepper.dt())?;
    Ok(out)
}

/// Time series produced by a filter run. Mode values are sampled for the
/// tracked wavevectors; full estimator states are kept only on request.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord<T: Real> {
    pub times: Vec<T>,
    pub tracked: Vec<WaveIndex>,
    pub signal_modes: Vec<Vec<Complex<T>>>,
    pub estimate_modes: Vec<Vec<Complex<T>>>,
    /// `|m - u|`.
    pub error_h: Vec<T>,
    /// `||m - u||`.
    pub error_v: Vec<T>,
    /// `|u|`.
    pub signal_h: Vec<T>,
    /// `|m|`.
    pub estimate_h: Vec<T>,
    pub states: Option<Vec<SpectralField<T>>>,
    pub noise_seed: u64,
}

impl<T: Real> RunRecord<T> {
    pub(crate) fn new(tracked: &[WaveIndex], noise_seed: u64, keep_states: bool) -> Self {
        Self {
            times: Vec::new(),
            tracked: tracked.to_vec(),
            signal_modes: Vec::new(),
            estimate_modes: Vec::new(),
            error_h: Vec::new(),
            error_v: Vec::new(),
            signal_h: Vec::new(),
            estimate_h: Vec::new(),
            states: keep_states.then(Vec::new),
            noise_seed,
        }
    }

    pub(crate) fn push(&mut self, t: T, m: &SpectralField<T>, u: &SpectralField<T>) {
        let e = m - u;
        self.times.push(t);
        self.signal_modes.push(self.tracked.iter().map(|&k| u.get(k)).collect());
        self.estimate_modes.push(self.tracked.iter().map(|&k| m.get(k)).collect());
        self.error_h.push(e.norm_h());
        self.error_v.push(e.norm_v());
        self.signal_h.push(u.norm_h());
        self.estimate_h.push(m.norm_h());
        if let Some(s) = self.states.as_mut() {
            s.push(m.clone());
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Output sampling and tracking options for filter runs.
#[derive(Debug, Clone)]
pub struct Recording {
    /// Sample every this many steps (the final step is always sampled).
    pub every: usize,
    pub tracked: Vec<WaveIndex>,
    pub keep_states: bool,
}

impl Default for Recording {
    fn default() -> Self {
        Self { every: 1, tracked: Vec::new(), keep_states: false }
    }
}

/// Ensemble of estimators driven by one signal and one noise path.
///
/// All members receive the same Brownian increments each step. Member
/// updates run in parallel; each member owns its state.
pub struct FilterEnsemble<T: Real> {
    stepper: NseStepper<T>,
    model: FilterModel<T>,
    stream: NoiseStream,
    signal: SpectralField<T>,
    members: Vec<SpectralField<T>>,
    step: usize,
}

impl<T: Real> FilterEnsemble<T> {
    pub fn new(
        nse: &NseParams<T>,
        filter: &FilterParams<T>,
        signal: SpectralField<T>,
        members: Vec<SpectralField<T>>,
        stream: NoiseStream,
    ) -> Result<Self> {
        let lattice = Arc::clone(signal.lattice());
        let stepper = NseStepper::with_lattice(nse, &lattice, nse.dt)?;
        let model = FilterModel::new(filter, &lattice)?;
        for m in &members {
            m.check_compatible(&signal)?;
        }
        if stream.modes() != lattice.len() {
            return Err(Error::InvalidParameter(format!(
                "noise stream width {} does not match {} lattice modes",
                stream.modes(),
                lattice.len()
            )));
        }
        Ok(Self { stepper, model, stream, signal, members, step: 0 })
    }

    pub fn time(&self) -> T {
        T::lit(self.step as f64) * self.stepper.dt()
    }

    pub fn signal(&self) -> &SpectralField<T> {
        &self.signal
    }

    pub fn members(&self) -> &[SpectralField<T>] {
        &self.members
    }

    pub fn model(&self) -> &FilterModel<T> {
        &self.model
    }

    /// Adds an estimator at the current time (pullback launches).
    pub fn add_member(&mut self, m: SpectralField<T>) -> Result<()> {
        m.check_compatible(&self.signal)?;
        self.members.push(m);
        Ok(())
    }

    pub fn advance(&mut self) -> Result<()> {
        let t = self.time();
        let dw = self.stream.next_increment(self.stepper.dt());
        let u_next = self.stepper.step(&self.signal, t)?;
        let (stepper, model) = (&self.stepper, &self.model);
        let next: Result<Vec<_>> =
            self.members.par_iter().map(|m| filter_step(m, &u_next, model, stepper, t, &dw)).collect();
        self.members = next?;
        self.signal = u_next;
        self.step += 1;
        Ok(())
    }
}

/// Runs a single estimator from `m0` against the signal started at `u0`
/// over `[0, duration]`.
pub fn run_filter<T: Real>(
    m0: &SpectralField<T>,
    u0: &SpectralField<T>,
    filter: &FilterParams<T>,
    nse: &NseParams<T>,
    duration: T,
    stream: NoiseStream,
    recording: &Recording,
) -> Result<RunRecord<T>> {
    let seed = stream.seed();
    let mut ens = FilterEnsemble::new(nse, filter, u0.clone(), vec![m0.clone()], stream)?;
    let steps = whole_steps(duration, nse.dt)?;
    let every = recording.every.max(1);
    let mut rec = RunRecord::new(&recording.tracked, seed, recording.keep_states);
    rec.push(T::zero(), &ens.members[0], &ens.signal);
    for n in 0..steps {
        ens.advance()?;
        if (n + 1) % every == 0 || n + 1 == steps {
            rec.push(ens.time(), &ens.members[0], &ens.signal);
        }
    }
    Ok(rec)
}

/// Runs an ensemble sharing one signal and one noise path; returns one
/// record per member.
pub fn run_ensemble<T: Real>(
    members: &[SpectralField<T>],
    u0: &SpectralField<T>,
    filter: &FilterParams<T>,
    nse: &NseParams<T>,
    duration: T,
    stream: NoiseStream,
    recording: &Recording,
) -> Result<Vec<RunRecord<T>>> {
    let seed = stream.seed();
    let mut ens = FilterEnsemble::new(nse, filter, u0.clone(), members.to_vec(), stream)?;
    let steps = whole_steps(duration, nse.dt)?;
    let every = recording.every.max(1);
    let mut recs: Vec<RunRecord<T>> =
        members.iter().map(|_| RunRecord::new(&recording.tracked, seed, recording.keep_states)).collect();
    for (r, m) in recs.iter_mut().zip(&ens.members) {
        r.push(T::zero(), m, &ens.signal);
    }
    for n in 0..steps {
        ens.advance()?;
        if (n + 1) % every == 0 || n + 1 == steps {
            let t = ens.time();
            for (r, m) in recs.iter_mut().zip(&ens.members) {
                r.push(t, m, &ens.signal);
            }
        }
    }
    Ok(recs)
}

/// Draw from `N(0, spread^2 C)` with `C = omega sigma0^2 A^(-2 zeta)`,
/// restricted to dealiased modes.
pub fn draw_initial_condition<T: Real>(
    lattice: &Arc<Lattice<T>>,
    filter: &FilterParams<T>,
    spread: T,
    stream: &mut NoiseStream,
) -> SpectralField<T> {
    let xi = stream.next_normals::<T>();
    let scale = spread * filter.omega.sqrt() * filter.sigma0;
    let zeta = filter.zeta();
    let zero = Complex::new(T::zero(), T::zero());
    let coeffs = xi
        .iter()
        .zip(lattice.mu())
        .enumerate()
        .map(|(i, (x, &mu))| if lattice.is_dealiased(i) { *x * (scale * mu.powf(-zeta)) } else { zero })
        .collect();
    SpectralField::from_coeffs(lattice, coeffs)
}

/// Current value of the stationary convolution `Z_phi`.
#[derive(Debug, Clone)]
pub struct OuState<T: Real> {
    pub z: SpectralField<T>,
    pub phi: T,
    pub t: T,
}

/// Per-mode stationary variance `E|Z_k|^2 = s_k^2 / (2 (delta mu_k + phi))`.
pub fn stationary_variances<T: Real>(model: &FilterModel<T>, delta: T) -> Vec<T> {
    let phi = model.params.phi;
    model
        .noise
        .iter()
        .zip(model.lattice.mu())
        .map(|(&s, &mu)| s * s / (T::lit(2.0) * (delta * mu + phi)))
        .collect()
}

/// Sample of `Z_phi(0)` from its stationary Gaussian law.
pub fn stationary_z_sample<T: Real>(model: &FilterModel<T>, delta: T, stream: &mut NoiseStream) -> Result<OuState<T>> {
    if !(delta > T::zero()) {
        return Err(Error::InvalidParameter(format!("delta must be positive, got {delta}")));
    }
    let var = stationary_variances(model, delta);
    let xi = stream.next_normals::<T>();
    let coeffs = xi.iter().zip(&var).map(|(x, &v)| *x * v.sqrt()).collect();
    Ok(OuState { z: SpectralField::from_coeffs(&model.lattice, coeffs), phi: model.params.phi, t: T::zero() })
}

/// Exact transition of `dZ + (delta A + phi) Z dt = dW_filter` over `dt`.
pub fn evolve_z<T: Real>(
    state: &OuState<T>,
    model: &FilterModel<T>,
    delta: T,
    dt: T,
    stream: &mut NoiseStream,
) -> Result<OuState<T>> {
    if !(dt > T::zero()) {
        return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
    }
    let xi = stream.next_normals::<T>();
    let mut z = state.z.clone();
    let two = T::lit(2.0);
    for (i, c) in z.coeffs_mut().iter_mut().enumerate() {
        let rate = delta * model.lattice.mu()[i] + state.phi;
        let decay = (-rate * dt).exp();
        let s = model.noise[i];
        let sd = if rate > T::zero() {
            s * ((T::one() - decay * decay) / (two * rate)).sqrt()
        } else {
            s * dt.sqrt()
        };
        *c = *c * decay + xi[i] * sd;
    }
    Ok(OuState { z, phi: state.phi, t: state.t + dt })
}
