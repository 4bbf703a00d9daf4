//! Continuous-time 3DVAR filtering for the two-dimensional incompressible
//! Navier-Stokes equations on a periodic torus.
//!
//! * [`spectral`]: divergence-free Fourier fields and the Stokes, Leray and
//!   advection operators.
//! * [`dynamics`]: the deterministic signal and its time stepper.
//! * [`assimilation`]: the filter SPDE, its noise, and the stationary
//!   Ornstein-Uhlenbeck convolution.
//! * [`limit`]: the discrete-time 3DVAR filter and its coupling to the
//!   continuous filter as the observation interval shrinks.
//! * [`analysis`]: computable stability and accuracy constants, ergodic
//!   averages and error metrics.
//!
//! Everything is generic over the scalar type ([`Real`], implemented for
//! `f32` and `f64`); the `*64` aliases below fix `f64`.

// `!(x > 0)` rejects NaN as well, which is the point
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod assimilation;
pub mod dynamics;
pub mod error;
pub mod limit;
pub mod noise;
pub mod scalar;
pub mod spectral;

pub use error::{Error, Result};
pub use rustfft::num_complex::Complex;
pub use scalar::Real;

pub type SpectralField64 = spectral::SpectralField<f64>;
pub type SpectralField32 = spectral::SpectralField<f32>;
pub type Lattice64 = spectral::Lattice<f64>;
pub type GridVelocityField64 = spectral::GridVelocityField<f64>;
pub type NseParams64 = dynamics::NseParams<f64>;
pub type Cutoff64 = spectral::Cutoff<f64>;
pub type FilterParams64 = assimilation::FilterParams<f64>;
pub type RunRecord64 = assimilation::RunRecord<f64>;
pub type FilterEnsemble64 = assimilation::FilterEnsemble<f64>;
pub type LimitStudy64 = limit::LimitStudy<f64>;
