//! Deterministic signal dynamics `du/dt + delta A u + B(u, u) = f`.
//!
//! Time stepping treats the Stokes term exactly through the integrating
//! factor `exp(-delta A dt)` and the advection and forcing with Heun's
//! second-order Runge-Kutta method.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::noise::{NoiseStream, StreamRole};
use crate::scalar::Real;
use crate::spectral::{advect, Lattice, SpectralField, WaveIndex};

/// Shell of the default forcing `a (psi_(k,k) + psi_(k,-k))`.
pub const DEFAULT_FORCING_WAVENUMBER: i32 = 8;

/// One forced wavevector; the reality partner is implied.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ForcingMode<T: Real> {
    pub k1: i32,
    pub k2: i32,
    pub re: T,
    pub im: T,
}

/// Time-independent body force, given by its `psi_k` coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Forcing<T: Real> {
    pub modes: Vec<ForcingMode<T>>,
}

impl<T: Real> Forcing<T> {
    pub fn none() -> Self {
        Self { modes: Vec::new() }
    }

    /// `a (psi_(1,1) + psi_(1,-1))` plus reality partners.
    pub fn diagonal_pair(amplitude: T) -> Self {
        Self::diagonal_pair_at(amplitude, 1)
    }

    /// `a (psi_(k,k) + psi_(k,-k))` plus reality partners.
    pub fn diagonal_pair_at(amplitude: T, k: i32) -> Self {
        let m = |k1, k2| ForcingMode { k1, k2, re: amplitude, im: T::zero() };
        Self { modes: vec![m(k, k), m(k, -k)] }
    }

    pub fn field(&self, lattice: &Arc<Lattice<T>>) -> Result<SpectralField<T>> {
        let mut f = SpectralField::zeros(lattice);
        for m in &self.modes {
            let k = WaveIndex::new(m.k1, m.k2)
                .ok_or_else(|| Error::InvalidParameter("forcing on the zero mode".into()))?;
            if !f.set(k, Complex::new(m.re, m.im)) {
                return Err(Error::InvalidParameter(format!("forcing mode {k} not resolved at N={}", lattice.n())));
            }
        }
        Ok(f)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct NseParams<T: Real> {
    /// Torus side `L`.
    pub length: T,
    /// Kinematic viscosity `nu`.
    pub viscosity: T,
    pub forcing: Forcing<T>,
    /// Grid points per axis.
    pub n: usize,
    pub dt: T,
}

impl<T: Real> NseParams<T> {
    /// Rescaled dissipation `delta = 4 pi^2 nu / L^2`.
    pub fn delta(&self) -> T {
        let two_pi = T::lit(2.0) * T::PI();
        two_pi * two_pi * self.viscosity / (self.length * self.length)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.viscosity > T::zero()) {
            return Err(Error::InvalidParameter(format!("viscosity must be positive, got {}", self.viscosity)));
        }
        if !(self.dt > T::zero()) {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.length > T::zero()) {
            return Err(Error::InvalidParameter(format!("length must be positive, got {}", self.length)));
        }
        if self.n < 4 || !self.n.is_multiple_of(2) {
            return Err(Error::BadResolution(self.n));
        }
        Ok(())
    }

    pub fn lattice(&self) -> Result<Arc<Lattice<T>>> {
        self.validate()?;
        Lattice::new(self.n, self.length)
    }
}

impl Default for NseParams<f64> {
    fn default() -> Self {
        Self {
            length: 2.0 * std::f64::consts::PI,
            viscosity: 0.01,
            // at (1,1) the flow is too close to laminar for nudging to fail
            forcing: Forcing::diagonal_pair_at(1.0, DEFAULT_FORCING_WAVENUMBER),
            n: 64,
            dt: 0.005,
        }
    }
}

/// Integrating-factor Heun stepper for a fixed lattice, forcing and step.
#[derive(Debug, Clone)]
pub struct NseStepper<T: Real> {
    lattice: Arc<Lattice<T>>,
    forcing: SpectralField<T>,
    decay: Vec<T>,
    dt: T,
}

impl<T: Real> NseStepper<T> {
    pub fn new(params: &NseParams<T>) -> Result<Self> {
        let lattice = params.lattice()?;
        Self::with_lattice(params, &lattice, params.dt)
    }

    /// Stepper with step `dt` on an existing lattice.
    pub fn with_lattice(params: &NseParams<T>, lattice: &Arc<Lattice<T>>, dt: T) -> Result<Self> {
        params.validate()?;
        if lattice.n() != params.n {
            return Err(Error::ResolutionMismatch { left: lattice.n(), right: params.n });
        }
        let delta = params.delta();
        let decay = lattice.mu().iter().map(|&mu| (-delta * mu * dt).exp()).collect();
        Ok(Self { lattice: Arc::clone(lattice), forcing: params.forcing.field(lattice)?, decay, dt })
    }

    pub fn lattice(&self) -> &Arc<Lattice<T>> {
        &self.lattice
    }

    pub fn dt(&self) -> T {
        self.dt
    }

    pub fn forcing(&self) -> &SpectralField<T> {
        &self.forcing
    }

    /// `f - B(u, u)`.
    pub fn explicit_rhs(&self, u: &SpectralField<T>) -> SpectralField<T> {
        let mut r = self.forcing.clone();
        r -= &advect(u);
        r
    }

    fn apply_decay(&self, f: &mut SpectralField<T>) {
        for (c, &e) in f.coeffs_mut().iter_mut().zip(&self.decay) {
            *c *= e;
        }
    }

    /// Advances `u` by one step; `t` is the start time, used for diagnostics.
    pub fn step(&self, u: &SpectralField<T>, t: T) -> Result<SpectralField<T>> {
        u.check_compatible_lattice(&self.lattice)?;
        let dt = self.dt;
        let n0 = self.explicit_rhs(u);

        let mut stage = u.clone();
        stage.axpy(dt, &n0);
        self.apply_decay(&mut stage);
        let n1 = self.explicit_rhs(&stage);

        // E u + dt/2 (E N(u) + N(stage)) = E (u + dt/2 N(u)) + dt/2 N(stage)
        let mut out = u.clone();
        out.axpy(dt * T::lit(0.5), &n0);
        self.apply_decay(&mut out);
        out.axpy(dt * T::lit(0.5), &n1);

        guard(&out, t + dt)?;
        Ok(out)
    }
}

pub(crate) fn guard<T: Real>(u: &SpectralField<T>, t: T) -> Result<()> {
    let limit = T::lit(1e150).min(T::max_value().sqrt());
    if !u.is_finite() || u.max_abs() > limit {
        return Err(Error::Diverged { time: t.as_f64(), what: "non-finite or overflowing coefficients".into() });
    }
    Ok(())
}

/// One step of the deterministic equation with the parameters' `dt`.
pub fn nse_step<T: Real>(u: &SpectralField<T>, params: &NseParams<T>) -> Result<SpectralField<T>> {
    let lattice = Arc::clone(u.lattice());
    NseStepper::with_lattice(params, &lattice, params.dt)?.step(u, T::zero())
}

/// Number of whole steps of size `dt` in `span`, or an error if `span` is
/// not a multiple of `dt`.
pub fn whole_steps<T: Real>(span: T, dt: T) -> Result<usize> {
    let ratio = (span / dt).as_f64();
    let steps = ratio.round();
    if (ratio - steps).abs() > 1e-6 * steps.max(1.0) || steps < 0.0 {
        return Err(Error::IncompatibleSteps(format!("{span} is not a multiple of {dt}")));
    }
    Ok(steps as usize)
}

#[derive(Debug, Clone)]
pub struct SignalTrajectory<T: Real> {
    pub times: Vec<T>,
    pub states: Vec<SpectralField<T>>,
    /// Largest `||u||^2` over the stored states.
    pub r_hat: T,
}

impl<T: Real> SignalTrajectory<T> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> &SpectralField<T> {
        self.states.last().expect("trajectory holds at least the initial state")
    }
}

/// Integrates over `[0, duration]`, storing every `stride` time units.
pub fn integrate_signal<T: Real>(
    u0: &SpectralField<T>,
    duration: T,
    params: &NseParams<T>,
    stride: T,
) -> Result<SignalTrajectory<T>> {
    let stepper = NseStepper::with_lattice(params, u0.lattice(), params.dt)?;
    let steps = whole_steps(duration, params.dt)?;
    let every = whole_steps(stride, params.dt)?.max(1);
    let mut times = vec![T::zero()];
    let mut states = vec![u0.clone()];
    let mut r_hat = u0.norm_v().powi(2);
    let mut u = u0.clone();
    for n in 0..steps {
        let t = T::lit(n as f64) * params.dt;
        u = stepper.step(&u, t)?;
        if (n + 1) % every == 0 || n + 1 == steps {
            r_hat = r_hat.max(u.norm_v().powi(2));
            times.push(T::lit((n + 1) as f64) * params.dt);
            states.push(u.clone());
        }
    }
    Ok(SignalTrajectory { times, states, r_hat })
}

/// Random initial condition with coefficients `xi_k / |k|^2` on the
/// dealiased modes, drawn from the signal stream of `seed`.
pub fn random_initial_condition<T: Real>(lattice: &Arc<Lattice<T>>, seed: u64) -> SpectralField<T> {
    let mut stream = NoiseStream::new(seed, StreamRole::Signal, lattice.len());
    let xi = stream.next_normals::<T>();
    SpectralField::from_fn(lattice, |k| {
        let (i, _) = lattice.lookup(k).expect("lattice mode");
        if lattice.is_dealiased(i) {
            xi[i] / lattice.mu()[i]
        } else {
            Complex::new(T::zero(), T::zero())
        }
    })
}

#[derive(Debug, Clone)]
pub struct SpinUp<T: Real> {
    pub state: SpectralField<T>,
    /// Largest `||u||^2` over the second half of the spin-up.
    pub r_hat: T,
}

/// Integrates a seeded random state for `duration` and returns the final
/// state as an approximate attractor sample.
pub fn spin_up<T: Real>(params: &NseParams<T>, duration: T, seed: u64) -> Result<SpinUp<T>> {
    if !(duration > T::zero()) {
        return Err(Error::InvalidParameter(format!("spin-up duration must be positive, got {duration}")));
    }
    let stepper = NseStepper::new(params)?;
    let steps = whole_steps(duration, params.dt)?;
    let mut u = random_initial_condition(stepper.lattice(), seed);
    let mut r_hat = T::zero();
    for n in 0..steps {
        u = stepper.step(&u, T::lit(n as f64) * params.dt)?;
        if 2 * (n + 1) >= steps {
            r_hat = r_hat.max(u.norm_v().powi(2));
        }
    }
    Ok(SpinUp { state: u, r_hat })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(n: usize, dt: f64, forcing: Forcing<f64>) -> NseParams<f64> {
        NseParams { length: 2.0 * std::f64::consts::PI, viscosity: 0.05, forcing, n, dt }
    }

    #[test]
    fn delta_equals_nu_on_two_pi_torus() {
        let p = NseParams::default();
        assert!((p.delta() - 0.01).abs() < 1e-16);
    }

    #[test]
    fn zero_state_without_forcing_stays_zero() {
        let p = params(16, 0.01, Forcing::none());
        let lat = p.lattice().unwrap();
        let z = SpectralField::zeros(&lat);
        assert_eq!(nse_step(&z, &p).unwrap(), z);
    }

    #[test]
    fn single_shear_decays_exactly() {
        let p = params(16, 0.01, Forcing::none());
        let lat = p.lattice().unwrap();
        let k = WaveIndex::new(2, 1).unwrap();
        let u = SpectralField::single_mode(&lat, k, Complex::new(1.5, -0.5));
        let v = nse_step(&u, &p).unwrap();
        let expect = Complex::new(1.5, -0.5) * (-p.delta() * 5.0 * p.dt).exp();
        assert!((v.get(k) - expect).norm() < 1e-15);
    }

    #[test]
    fn forced_shear_converges_at_second_order() {
        // u_k' = -delta mu u_k + f_k has a closed form; B vanishes on a single shear
        let k = WaveIndex::new(1, 1).unwrap();
        let forcing = Forcing { modes: vec![ForcingMode { k1: 1, k2: 1, re: 0.7, im: 0.2 }] };
        let horizon = 2.0;
        let err = |dt: f64| {
            let p = params(16, dt, forcing.clone());
            let lat = p.lattice().unwrap();
            let u0 = Complex::new(1.0, 0.0);
            let u = SpectralField::single_mode(&lat, k, u0);
            let tr = integrate_signal(&u, horizon, &p, horizon).unwrap();
            let rate = p.delta() * 2.0;
            let f = Complex::new(0.7, 0.2);
            let exact = f / rate + (u0 - f / rate) * (-rate * horizon).exp();
            (tr.last().get(k) - exact).norm()
        };
        let (e1, e2) = (err(0.2), err(0.1));
        assert!(e1 / e2 >= 3.5, "ratio {}", e1 / e2);
    }

    #[test]
    fn unresolved_forcing_is_rejected() {
        let p = params(8, 0.01, Forcing { modes: vec![ForcingMode { k1: 5, k2: 0, re: 1.0, im: 0.0 }] });
        assert!(NseStepper::new(&p).is_err());
    }

    #[test]
    fn huge_step_reports_divergence() {
        let mut p = params(16, 50.0, Forcing::diagonal_pair(1.0));
        p.viscosity = 1e-6;
        let lat = p.lattice().unwrap();
        let mut u = &random_initial_condition(&lat, 3) * 1e3;
        let stepper = NseStepper::new(&p).unwrap();
        let mut res = Ok(());
        for n in 0..200 {
            match stepper.step(&u, n as f64 * p.dt) {
                Ok(v) => u = v,
                Err(e) => {
                    res = Err(e);
                    break;
                }
            }
        }
        assert!(matches!(res, Err(Error::Diverged { .. })));
    }

    #[test]
    fn zero_duration_keeps_initial_state() {
        let p = params(16, 0.01, Forcing::none());
        let lat = p.lattice().unwrap();
        let u = random_initial_condition(&lat, 1);
        let tr = integrate_signal(&u, 0.0, &p, 0.1).unwrap();
        assert_eq!(tr.len(), 1);
        assert_eq!(tr.states[0], u);
    }

    #[test]
    fn step_grid_divisibility() {
        assert_eq!(whole_steps(1.0, 0.005).unwrap(), 200);
        assert!(whole_steps(1.0, 0.3).is_err());
    }
}
