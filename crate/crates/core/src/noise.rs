//! Reproducible Gaussian increments for the cylindrical Brownian motion.
//!
//! A [`NoiseStream`] is a ChaCha8 keystream keyed by `(seed, role)`. The
//! draws for time step `n` start at a fixed word offset derived from `n`
//! and the lattice size, so any step can be replayed in isolation and every
//! ensemble member that opens the same stream sees the same path.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::scalar::Real;

/// Purpose a stream is reserved for. Distinct roles never share words.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StreamRole {
    /// Driving noise `W` of the filter (and of the observations).
    Filter,
    /// Random initial condition of the signal before spin-up.
    Signal,
    /// Initial conditions of ensemble members.
    InitialCondition,
    /// Stand-alone sampling of the stationary OU process.
    Stationary,
}

impl StreamRole {
    fn id(self) -> u64 {
        match self {
            StreamRole::Filter => 1,
            StreamRole::Signal => 2,
            StreamRole::InitialCondition => 3,
            StreamRole::Stationary => 4,
        }
    }
}

// one Box-Muller pair per mode: two u64 = four 32-bit words
const WORDS_PER_MODE: u128 = 4;

#[derive(Clone)]
pub struct NoiseStream {
    seed: u64,
    role: StreamRole,
    modes: usize,
    step: u64,
    rng: ChaCha8Rng,
}

impl std::fmt::Debug for NoiseStream {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("NoiseStream")
            .field("seed", &self.seed)
            .field("role", &self.role)
            .field("modes", &self.modes)
            .field("step", &self.step)
            .finish()
    }
}

impl NoiseStream {
    /// Stream over `modes` independent complex degrees of freedom per step.
    pub fn new(seed: u64, role: StreamRole, modes: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(role.id());
        Self { seed, role, modes, step: 0, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn role(&self) -> StreamRole {
        self.role
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    /// Index of the next step [`NoiseStream::next_normals`] will produce.
    pub fn position(&self) -> u64 {
        self.step
    }

    /// Shift of the driving path: the stream now starts at step `step`.
    pub fn seek(&mut self, step: u64) {
        self.step = step;
    }

    /// Copy of this stream positioned `offset` steps later.
    pub fn shifted(&self, offset: u64) -> Self {
        let mut s = self.clone();
        s.seek(self.step + offset);
        s
    }

    /// Standard complex normals, `E|xi|^2 = 1`, for step `step`; does not
    /// move the cursor.
    pub fn normals_at<T: Real>(&mut self, step: u64) -> Vec<Complex<T>> {
        self.rng.set_word_pos(step as u128 * self.modes as u128 * WORDS_PER_MODE);
        (0..self.modes).map(|_| complex_normal(&mut self.rng)).collect()
    }

    /// Normals for the current step, then advances the cursor.
    pub fn next_normals<T: Real>(&mut self) -> Vec<Complex<T>> {
        let out = self.normals_at(self.step);
        self.step += 1;
        out
    }

    /// Brownian increments over `dt`: `sqrt(dt) xi` per mode.
    pub fn next_increment<T: Real>(&mut self, dt: T) -> Vec<Complex<T>> {
        let s = dt.sqrt();
        self.next_normals::<T>().into_iter().map(|c| c * s).collect()
    }
}

fn complex_normal<T: Real>(rng: &mut ChaCha8Rng) -> Complex<T> {
    // (0, 1] so the logarithm is finite
    let u1 = ((rng.next_u64() >> 11) + 1) as f64 / (1u64 << 53) as f64;
    let u2 = (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
    // radius for unit variance per real part is sqrt(-2 ln u1); halve the
    // variance so the complex modulus has unit mean square
    let r = (-u1.ln()).sqrt();
    let theta = 2.0 * std::f64::consts::PI * u2;
    Complex::new(T::lit(r * theta.cos()), T::lit(r * theta.sin()))
}
