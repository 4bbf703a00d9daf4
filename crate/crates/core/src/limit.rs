//! The discrete-time 3DVAR filter with observations every `h`, and the
//! study of its approach to the continuous-time filter as `h -> 0`.
//!
//! Observations are `y_n = P_lambda u(nh) + eta_n` with
//! `eta_n ~ N(0, Gamma)`, `Gamma = Gamma_0 / h`. The noise is built from
//! the same Brownian increments that drive the continuous filter,
//! `eta_n = sigma0 A^(-beta) (W((n+1)h) - W(nh)) / h`, so discrete and
//! continuous runs can be compared path by path.

use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use serde::Serialize;

use crate::analysis::{empirical_order, LinearFit};
use crate::assimilation::{run_filter, FilterParams, Recording, RunRecord};
use crate::dynamics::{guard, whole_steps, NseParams, NseStepper};
use crate::error::{Error, Result};
use crate::noise::{NoiseStream, StreamRole};
use crate::scalar::Real;
use crate::spectral::{Lattice, SpectralField};

/// Scalar Kalman gain `c / (gamma + c)`; zero for uninformative data
/// (`gamma = inf`) or a trusted model (`c = 0`).
pub fn kalman_gain<T: Real>(c: T, gamma: T) -> T {
    if c == T::zero() || gamma.is_infinite() {
        return T::zero();
    }
    c / (gamma + c)
}

/// Diagonal discrete filter set-up. Covariances are `sigma0^2` times the
/// stored shapes; the gain only depends on the shapes, so `sigma0 = 0`
/// still gives a well-defined (deterministic) filter.
#[derive(Debug, Clone)]
pub struct DiscreteFilterConfig<T: Real> {
    pub h: T,
    pub params: FilterParams<T>,
    lattice: Arc<Lattice<T>>,
    retained: Vec<bool>,
    /// `omega mu^(-2 zeta)`.
    c_hat: Vec<T>,
    /// `mu^(-2 beta)` on observed modes.
    gamma0: Vec<T>,
}

impl<T: Real> DiscreteFilterConfig<T> {
    pub fn new(params: &FilterParams<T>, lattice: &Arc<Lattice<T>>, h: T) -> Result<Self> {
        params.validate()?;
        if !(h > T::zero()) {
            return Err(Error::InvalidParameter(format!("observation interval must be positive, got {h}")));
        }
        let two = T::lit(2.0);
        let retained = SpectralField::retained_mask(lattice, params.cutoff);
        let c_hat = lattice.mu().iter().map(|&mu| params.omega * mu.powf(-two * params.zeta())).collect();
        let gamma0 = lattice
            .mu()
            .iter()
            .zip(&retained)
            .map(|(&mu, &keep)| if keep { mu.powf(-two * params.beta) } else { T::infinity() })
            .collect();
        Ok(Self { h, params: params.clone(), lattice: Arc::clone(lattice), retained, c_hat, gamma0 })
    }

    pub fn lattice(&self) -> &Arc<Lattice<T>> {
        &self.lattice
    }

    /// Observation operator `H = P_lambda` as a mode mask.
    pub fn observed(&self) -> &[bool] {
        &self.retained
    }

    pub fn c_hat_shape(&self) -> &[T] {
        &self.c_hat
    }

    pub fn gamma0_shape(&self) -> &[T] {
        &self.gamma0
    }

    /// `Gamma = Gamma_0 / h`.
    pub fn gamma_shape(&self) -> Vec<T> {
        self.gamma0.iter().map(|&g| g / self.h).collect()
    }

    /// Per-mode gain `c_k / (gamma_k + c_k)` for background `c`.
    pub fn gain_for(&self, c: &[T]) -> Vec<T> {
        c.iter()
            .zip(&self.gamma0)
            .zip(&self.retained)
            .map(|((&c, &g), &keep)| if keep { kalman_gain(c, g / self.h) } else { T::zero() })
            .collect()
    }
}

/// Background covariance for each analysis step. 3DVAR keeps it fixed;
/// ensemble or extended Kalman variants would update it from the forecast.
pub trait CovarianceModel<T: Real> {
    /// Diagonal covariance shape used for the analysis at step `n`.
    fn background(&mut self, n: usize, forecast: &SpectralField<T>) -> &[T];
}

/// The constant `C_n = C` of 3DVAR.
#[derive(Debug, Clone)]
pub struct Fixed3dvar<T: Real> {
    c: Vec<T>,
}

impl<T: Real> Fixed3dvar<T> {
    pub fn new(cfg: &DiscreteFilterConfig<T>) -> Self {
        Self { c: cfg.c_hat.clone() }
    }
}

impl<T: Real> CovarianceModel<T> for Fixed3dvar<T> {
    fn background(&mut self, _n: usize, _forecast: &SpectralField<T>) -> &[T] {
        &self.c
    }
}

/// Observations of a twin experiment.
#[derive(Debug, Clone)]
pub struct ObservationLog<T: Real> {
    pub h: T,
    /// `t_n = n h` for `n = 0..=N`; no observation is taken at `t_0`.
    pub times: Vec<T>,
    /// `u(t_n)` for `n = 0..=N`.
    pub signal: Vec<SpectralField<T>>,
    /// `y_n` for `n = 1..=N` (index `n - 1`).
    pub y: Vec<SpectralField<T>>,
    /// `eta_n` for `n = 1..=N`.
    pub eta: Vec<SpectralField<T>>,
    /// `z_0 = 0`, `z_(n+1) = z_n + h y_(n+1)`.
    pub z: Vec<SpectralField<T>>,
    pub noise_seed: u64,
    /// Brownian increments summed into each `eta_n`.
    pub substeps: usize,
}

impl<T: Real> ObservationLog<T> {
    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }
}

/// Integrates the signal from `u0` with `np.dt` and observes it every
/// `cfg.h`. The stream supplies one increment per signal step, so `eta_n`
/// is driven by the Brownian path a continuous filter with step `np.dt`
/// would see.
pub fn generate_observations<T: Real>(
    u0: &SpectralField<T>,
    cfg: &DiscreteFilterConfig<T>,
    n_obs: usize,
    np: &NseParams<T>,
    stream: &mut NoiseStream,
) -> Result<ObservationLog<T>> {
    u0.check_compatible_lattice(&cfg.lattice)?;
    let substeps = whole_steps(cfg.h, np.dt)?;
    if substeps == 0 {
        return Err(Error::IncompatibleSteps(format!("h = {} is shorter than dt = {}", cfg.h, np.dt)));
    }
    let stepper = NseStepper::with_lattice(np, &cfg.lattice, np.dt)?;
    let amp: Vec<T> = cfg
        .lattice
        .mu()
        .iter()
        .zip(&cfg.retained)
        .map(|(&mu, &keep)| if keep { cfg.params.sigma0 * mu.powf(-cfg.params.beta) } else { T::zero() })
        .collect();
    let zero = Complex::new(T::zero(), T::zero());

    let mut u = u0.clone();
    let mut log = ObservationLog {
        h: cfg.h,
        times: vec![T::zero()],
        signal: vec![u0.clone()],
        y: Vec::with_capacity(n_obs),
        eta: Vec::with_capacity(n_obs),
        z: vec![SpectralField::zeros(&cfg.lattice)],
        noise_seed: stream.seed(),
        substeps,
    };
    let mut step = 0usize;
    for n in 0..n_obs {
        let mut dw = vec![zero; cfg.lattice.len()];
        for _ in 0..substeps {
            u = stepper.step(&u, T::lit(step as f64) * np.dt)?;
            for (acc, w) in dw.iter_mut().zip(stream.next_increment::<T>(np.dt)) {
                *acc += w;
            }
            step += 1;
        }
        let eta = SpectralField::from_coeffs(
            &cfg.lattice,
            dw.iter().zip(&amp).map(|(w, &a)| *w * (a / cfg.h)).collect(),
        );
        let mut y = u.project_modes(cfg.params.cutoff);
        y += &eta;
        let mut z = log.z[n].clone();
        z.axpy(cfg.h, &y);
        log.times.push(T::lit((n + 1) as f64) * cfg.h);
        log.signal.push(u.clone());
        log.y.push(y);
        log.eta.push(eta);
        log.z.push(z);
    }
    Ok(log)
}

/// `m + G (y - H m)` with the diagonal gain for background `c`; modes
/// outside the cutoff are left alone.
pub fn analysis_update_with<T: Real>(
    m_pred: &SpectralField<T>,
    y: &SpectralField<T>,
    cfg: &DiscreteFilterConfig<T>,
    c: &[T],
) -> Result<SpectralField<T>> {
    m_pred.check_compatible(y)?;
    let gain = cfg.gain_for(c);
    let mut out = m_pred.clone();
    let yc = y.coeffs();
    for (i, m) in out.coeffs_mut().iter_mut().enumerate() {
        if cfg.retained[i] && gain[i] != T::zero() {
            *m = *m + (yc[i] - *m) * gain[i];
        }
    }
    Ok(out)
}

/// 3DVAR analysis with the fixed background `C`.
pub fn analysis_update<T: Real>(
    m_pred: &SpectralField<T>,
    y: &SpectralField<T>,
    cfg: &DiscreteFilterConfig<T>,
) -> Result<SpectralField<T>> {
    analysis_update_with(m_pred, y, cfg, &cfg.c_hat)
}

/// Discrete filter with any covariance model; the forecast `Psi(m; h)`
/// integrates with `np.dt`.
pub fn run_discrete_filter<T: Real, C: CovarianceModel<T>>(
    m0: &SpectralField<T>,
    log: &ObservationLog<T>,
    cfg: &DiscreteFilterConfig<T>,
    np: &NseParams<T>,
    covariance: &mut C,
    recording: &Recording,
) -> Result<RunRecord<T>> {
    m0.check_compatible_lattice(&cfg.lattice)?;
    let substeps = whole_steps(log.h, np.dt)?;
    let stepper = NseStepper::with_lattice(np, &cfg.lattice, np.dt)?;
    let mut rec = RunRecord::new(&recording.tracked, log.noise_seed, recording.keep_states);
    let every = recording.every.max(1);
    let mut m = m0.clone();
    rec.push(T::zero(), &m, &log.signal[0]);
    for (n, y) in log.y.iter().enumerate() {
        let t0 = T::lit(n as f64) * log.h;
        for j in 0..substeps {
            m = stepper.step(&m, t0 + T::lit(j as f64) * np.dt)?;
        }
        let c = covariance.background(n, &m);
        m = analysis_update_with(&m, y, cfg, c)?;
        guard(&m, log.times[n + 1])?;
        if (n + 1) % every == 0 || n + 1 == log.len() {
            rec.push(log.times[n + 1], &m, &log.signal[n + 1]);
        }
    }
    Ok(rec)
}

pub fn run_discrete_3dvar<T: Real>(
    m0: &SpectralField<T>,
    log: &ObservationLog<T>,
    cfg: &DiscreteFilterConfig<T>,
    np: &NseParams<T>,
    recording: &Recording,
) -> Result<RunRecord<T>> {
    run_discrete_filter(m0, log, cfg, np, &mut Fixed3dvar::new(cfg), recording)
}

/// Discrete filters at several `h` against the continuous filter, all
/// driven by one Brownian path sampled at `nse.dt`.
#[derive(Debug, Clone)]
pub struct LimitStudy<T: Real> {
    pub filter: FilterParams<T>,
    /// `nse.dt` is the fine step shared by the signal, the continuous
    /// reference and every forecast.
    pub nse: NseParams<T>,
    pub h_list: Vec<T>,
    pub horizon: T,
    pub noise_seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct LimitRow {
    pub h: f64,
    /// `sup_n |m_discrete(nh) - m_continuous(nh)|`.
    pub sup_error: f64,
    pub terminal_error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct LimitReport {
    pub rows: Vec<LimitRow>,
    /// Slope of `log sup_error` against `log h`.
    pub order: Option<LinearFit>,
    pub fine_dt: f64,
    pub horizon: f64,
    pub noise_seed: u64,
    pub sigma0: f64,
    pub omega: f64,
}

impl LimitReport {
    pub fn errors_decrease(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].sup_error < w[0].sup_error)
    }
}

pub fn continuum_limit_study<T: Real>(
    study: &LimitStudy<T>,
    u0: &SpectralField<T>,
    m0: &SpectralField<T>,
) -> Result<LimitReport> {
    let lattice = Arc::clone(u0.lattice());
    let dt = study.nse.dt;
    if study.h_list.is_empty() {
        return Err(Error::EmptySeries);
    }
    if study.h_list.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidParameter("h_list must be strictly decreasing".into()));
    }
    let mut per_h = Vec::with_capacity(study.h_list.len());
    for &h in &study.h_list {
        let sub = whole_steps(h, dt)?;
        if sub == 0 {
            return Err(Error::IncompatibleSteps(format!("h = {h} is shorter than dt = {dt}")));
        }
        per_h.push((h, sub, whole_steps(study.horizon, h)?));
    }
    let finest = *study.h_list.last().unwrap();
    let stride = whole_steps(finest, dt)?;
    for &(h, sub, _) in &per_h {
        if sub % stride != 0 {
            return Err(Error::IncompatibleSteps(format!("{h} is not a multiple of the finest h {finest}")));
        }
    }

    let stream = NoiseStream::new(study.noise_seed, StreamRole::Filter, lattice.len());
    let recording = Recording { every: stride, tracked: Vec::new(), keep_states: true };
    let reference = run_filter(m0, u0, &study.filter, &study.nse, study.horizon, stream.clone(), &recording)?;
    let ref_states = reference.states.expect("states kept");

    let rows: Result<Vec<LimitRow>> = per_h
        .par_iter()
        .map(|&(h, sub, n_obs)| {
            let cfg = DiscreteFilterConfig::new(&study.filter, &lattice, h)?;
            let mut s = stream.clone();
            let log = generate_observations(u0, &cfg, n_obs, &study.nse, &mut s)?;
            let rec = run_discrete_3dvar(
                m0,
                &log,
                &cfg,
                &study.nse,
                &Recording { every: 1, tracked: Vec::new(), keep_states: true },
            )?;
            let ratio = sub / stride;
            let mut sup = 0.0f64;
            let mut last = 0.0;
            for (n, m) in rec.states.as_ref().expect("states kept").iter().enumerate() {
                last = (m - &ref_states[n * ratio]).norm_h().as_f64();
                sup = sup.max(last);
            }
            Ok(LimitRow { h: h.as_f64(), sup_error: sup, terminal_error: last })
        })
        .collect();
    let rows = rows?;
    let hs: Vec<f64> = rows.iter().map(|r| r.h).collect();
    let errs: Vec<f64> = rows.iter().map(|r| r.sup_error).collect();
    Ok(LimitReport {
        order: empirical_order(&hs, &errs),
        rows,
        fine_dt: dt.as_f64(),
        horizon: study.horizon.as_f64(),
        noise_seed: study.noise_seed,
        sigma0: study.filter.sigma0.as_f64(),
        omega: study.filter.omega.as_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{random_initial_condition, Forcing};
    use crate::spectral::{Cutoff, WaveIndex};
    use std::f64::consts::PI;

    fn small_nse() -> NseParams<f64> {
        NseParams { n: 16, dt: 0.005, forcing: Forcing::diagonal_pair(1.0), ..NseParams::default() }
    }

    #[test]
    fn gain_examples() {
        assert_eq!(kalman_gain(1.0, 1.0), 0.5);
        assert_eq!(kalman_gain(0.0, 1.0), 0.0);
        assert_eq!(kalman_gain(1.0, f64::INFINITY), 0.0);
        for &(c, g) in &[(1e-8, 3.0), (5.0, 1e-9), (2.0, 2.0)] {
            let k = kalman_gain(c, g);
            assert!((0.0..=1.0).contains(&k));
        }
    }

    #[test]
    fn scalar_mode_update() {
        let lat = Lattice::new(8, 2.0 * PI).unwrap();
        let p = FilterParams { cutoff: Cutoff::Finite(1.5), ..FilterParams::default() };
        let cfg = DiscreteFilterConfig::new(&p, &lat, 1.0).unwrap();
        let k = WaveIndex::new(1, 0).unwrap();
        let m = SpectralField::zeros(&lat);
        let y = SpectralField::single_mode(&lat, k, Complex::new(1.0, 0.0));
        let c: Vec<f64> = cfg.gamma0_shape().iter().map(|&g| if g.is_finite() { g } else { 0.0 }).collect();
        let out = analysis_update_with(&m, &y, &cfg, &c).unwrap();
        assert_eq!(out.get(k), Complex::new(0.5, 0.0));
    }

    #[test]
    fn analysis_leaves_unobserved_modes() {
        let lat = Lattice::new(16, 2.0 * PI).unwrap();
        let p = FilterParams { cutoff: Cutoff::Finite(5.0), ..FilterParams::default() };
        let cfg = DiscreteFilterConfig::new(&p, &lat, 0.1).unwrap();
        let m = random_initial_condition(&lat, 1);
        let y = random_initial_condition(&lat, 2);
        let out = analysis_update(&m, &y, &cfg).unwrap();
        assert_eq!(out.project_complement(p.cutoff), m.project_complement(p.cutoff));
        assert_ne!(out.project_modes(p.cutoff), m.project_modes(p.cutoff));
        // trusted model
        let z = FilterParams { omega: 0.0, ..p };
        let cz = DiscreteFilterConfig::new(&z, &lat, 0.1).unwrap();
        assert_eq!(analysis_update(&m, &y, &cz).unwrap(), m);
    }

    #[test]
    fn gamma_scales_inversely_with_h() {
        let lat = Lattice::new(16, 2.0 * PI).unwrap();
        let p = FilterParams { beta: 1.0, cutoff: Cutoff::Finite(20.0), ..FilterParams::default() };
        let a = DiscreteFilterConfig::new(&p, &lat, 0.02).unwrap();
        let b = DiscreteFilterConfig::new(&p, &lat, 0.01).unwrap();
        for (x, y) in a.gamma_shape().iter().zip(b.gamma_shape()) {
            if x.is_finite() {
                assert!((y / x - 2.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn noiseless_observations_are_projected_signal() {
        let np = small_nse();
        let lat = np.lattice().unwrap();
        let p = FilterParams { sigma0: 0.0, cutoff: Cutoff::Finite(6.0), ..FilterParams::default() };
        let cfg = DiscreteFilterConfig::new(&p, &lat, 0.02).unwrap();
        let u0 = random_initial_condition(&lat, 4);
        let mut s = NoiseStream::new(1, StreamRole::Filter, lat.len());
        let log = generate_observations(&u0, &cfg, 5, &np, &mut s).unwrap();
        for (y, u) in log.y.iter().zip(&log.signal[1..]) {
            assert_eq!(y, &u.project_modes(p.cutoff));
        }
        for n in 0..5 {
            let mut z = log.z[n].clone();
            z.axpy(0.02, &log.y[n]);
            assert_eq!(z, log.z[n + 1]);
        }
        assert_eq!(log.z[0], SpectralField::zeros(&lat));
    }

    #[test]
    fn noiseless_discrete_filter_started_on_truth_stays_there() {
        let np = small_nse();
        let lat = np.lattice().unwrap();
        let p = FilterParams { sigma0: 0.0, ..FilterParams::default() };
        let cfg = DiscreteFilterConfig::new(&p, &lat, 0.02).unwrap();
        let u0 = random_initial_condition(&lat, 4);
        let mut s = NoiseStream::new(1, StreamRole::Filter, lat.len());
        let log = generate_observations(&u0, &cfg, 10, &np, &mut s).unwrap();
        let rec = run_discrete_3dvar(&u0, &log, &cfg, &np, &Recording::default()).unwrap();
        assert!(rec.error_h.iter().all(|&e| e <= 1e-13));
        let again = run_discrete_3dvar(&u0, &log, &cfg, &np, &Recording::default()).unwrap();
        assert_eq!(rec, again);
    }

    #[test]
    fn study_rejects_incompatible_grids() {
        let np = small_nse();
        let lat = np.lattice().unwrap();
        let u0 = random_initial_condition(&lat, 4);
        let study = LimitStudy {
            filter: FilterParams::default(),
            nse: np,
            h_list: vec![0.02, 0.0125],
            horizon: 0.1,
            noise_seed: 3,
        };
        assert!(matches!(continuum_limit_study(&study, &u0, &u0), Err(Error::IncompatibleSteps(_))));
    }
}
