use std::fmt;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};
use std::sync::Arc;

use rustfft::num_complex::Complex;
use serde::de::{self, Deserializer};
use serde::{Deserialize, Serialize, Serializer};

use super::lattice::{Lattice, WaveIndex};
use crate::error::Result;
use crate::scalar::Real;

/// Observation cutoff `lambda`: keep modes with `|2 pi k|^2 < lambda L^2`.
///
/// `Infinite` keeps every resolved mode. Serialized as a number or the
/// string `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cutoff<T> {
    Finite(T),
    Infinite,
}

impl<T: Real> Cutoff<T> {
    /// Whether the Stokes eigenvalue `mu = |k|^2` lies inside the cutoff.
    pub fn retains(&self, mu: T, length: T) -> bool {
        match *self {
            Cutoff::Infinite => true,
            Cutoff::Finite(lambda) => mu < cutoff_mu(lambda, length),
        }
    }

    /// Cutoff expressed on the `|k|^2` scale, `lambda L^2 / 4 pi^2`.
    pub fn mu_threshold(&self, length: T) -> Option<T> {
        match *self {
            Cutoff::Infinite => None,
            Cutoff::Finite(lambda) => Some(cutoff_mu(lambda, length)),
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Cutoff::Infinite)
    }
}

fn cutoff_mu<T: Real>(lambda: T, length: T) -> T {
    let two_pi = T::lit(2.0) * T::PI();
    lambda * length * length / (two_pi * two_pi)
}

impl<T: Real> Serialize for Cutoff<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Cutoff::Finite(v) => v.serialize(s),
            Cutoff::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de, T: Real> Deserialize<'de> for Cutoff<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) if v.is_infinite() && v > 0.0 => Ok(Cutoff::Infinite),
            Raw::Num(v) if v > 0.0 => Ok(Cutoff::Finite(T::lit(v))),
            Raw::Num(v) => Err(de::Error::custom(format!("cutoff must be positive, got {v}"))),
            Raw::Text(s) if matches!(s.as_str(), "inf" | "infinity" | "Infinity") => {
                Ok(Cutoff::Infinite)
            }
            Raw::Text(s) => Err(de::Error::custom(format!("unknown cutoff {s:?}"))),
        }
    }
}

/// Divergence-free, zero-mean velocity field stored as coefficients on the
/// `psi_k` basis over the canonical half-plane of a [`Lattice`].
///
/// The H inner product is area-normalized, `<u, v> = L^-2 int u . v dx`, so
/// the `psi_k` are orthonormal and `|u|^2 = sum_k |u_k|^2` over all `k`.
#[derive(Clone)]
pub struct SpectralField<T: Real> {
    lattice: Arc<Lattice<T>>,
    coeffs: Vec<Complex<T>>,
}

impl<T: Real> fmt::Debug for SpectralField<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralField")
            .field("n", &self.lattice.n())
            .field("h_norm", &self.norm_h())
            .finish()
    }
}

impl<T: Real> PartialEq for SpectralField<T> {
    fn eq(&self, other: &Self) -> bool {
        self.lattice.same_as(&other.lattice) && self.coeffs == other.coeffs
    }
}

impl<T: Real> SpectralField<T> {
    pub fn zeros(lattice: &Arc<Lattice<T>>) -> Self {
        Self {
            lattice: Arc::clone(lattice),
            coeffs: vec![Complex::new(T::zero(), T::zero()); lattice.len()],
        }
    }

    /// Builds a field from a function of each canonical wavevector.
    pub fn from_fn(lattice: &Arc<Lattice<T>>, mut f: impl FnMut(WaveIndex) -> Complex<T>) -> Self {
        Self {
            lattice: Arc::clone(lattice),
            coeffs: lattice.modes().iter().map(|&k| f(k)).collect(),
        }
    }

    pub fn from_coeffs(lattice: &Arc<Lattice<T>>, coeffs: Vec<Complex<T>>) -> Self {
        assert_eq!(coeffs.len(), lattice.len(), "coefficient count must match lattice");
        Self { lattice: Arc::clone(lattice), coeffs }
    }

    /// `c psi_k` together with its reality partner `-conj(c) psi_{-k}`.
    pub fn single_mode(lattice: &Arc<Lattice<T>>, k: WaveIndex, c: Complex<T>) -> Self {
        let mut f = Self::zeros(lattice);
        f.set(k, c);
        f
    }

    pub fn lattice(&self) -> &Arc<Lattice<T>> {
        &self.lattice
    }

    pub fn coeffs(&self) -> &[Complex<T>] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.coeffs
    }

    /// Coefficient `u_k` for any `k`; mirrored modes use `u_{-k} = -conj(u_k)`,
    /// unresolved modes read as zero.
    pub fn get(&self, k: WaveIndex) -> Complex<T> {
        match self.lattice.lookup(k) {
            None => Complex::new(T::zero(), T::zero()),
            Some((i, false)) => self.coeffs[i],
            Some((i, true)) => -self.coeffs[i].conj(),
        }
    }

    /// Sets `u_k` (and thereby its partner). Returns `false` if unresolved.
    pub fn set(&mut self, k: WaveIndex, c: Complex<T>) -> bool {
        match self.lattice.lookup(k) {
            None => false,
            Some((i, false)) => {
                self.coeffs[i] = c;
                true
            }
            Some((i, true)) => {
                self.coeffs[i] = -c.conj();
                true
            }
        }
    }

    pub(crate) fn check_compatible(&self, other: &Self) -> Result<()> {
        self.lattice.check_same(&other.lattice)
    }

    pub(crate) fn check_compatible_lattice(&self, lattice: &Lattice<T>) -> Result<()> {
        self.lattice.check_same(lattice)
    }

    /// H inner product, summed over both halves of the spectrum.
    pub fn inner(&self, other: &Self) -> T {
        debug_assert!(self.lattice.same_as(&other.lattice));
        let half = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .fold(T::zero(), |acc, (a, b)| acc + a.re * b.re + a.im * b.im);
        T::lit(2.0) * half
    }

    /// `|u|`, the H norm.
    pub fn norm_h(&self) -> T {
        self.sobolev_norm(T::zero())
    }

    /// `||u||`, the V norm.
    pub fn norm_v(&self) -> T {
        self.sobolev_norm(T::one())
    }

    /// `(sum_k |k|^(2s) |u_k|^2)^(1/2)`.
    pub fn sobolev_norm(&self, s: T) -> T {
        let sum = self
            .coeffs
            .iter()
            .zip(self.lattice.mu())
            .fold(T::zero(), |acc, (c, &mu)| acc + mu.powf(s) * c.norm_sqr());
        (T::lit(2.0) * sum).sqrt()
    }

    /// `A^s u`: multiplies `u_k` by `|k|^(2s)`.
    pub fn apply_stokes_power(&self, s: T) -> Self {
        if s == T::zero() {
            return self.clone();
        }
        let mut out = self.clone();
        for (c, &mu) in out.coeffs.iter_mut().zip(self.lattice.mu()) {
            *c *= mu.powf(s);
        }
        out
    }

    /// `P_lambda u`.
    pub fn project_modes(&self, cutoff: Cutoff<T>) -> Self {
        let mut out = self.clone();
        let length = self.lattice.length();
        for (c, &mu) in out.coeffs.iter_mut().zip(self.lattice.mu()) {
            if !cutoff.retains(mu, length) {
                *c = Complex::new(T::zero(), T::zero());
            }
        }
        out
    }

    /// `Q_lambda u = u - P_lambda u`.
    pub fn project_complement(&self, cutoff: Cutoff<T>) -> Self {
        let mut out = self.clone();
        let length = self.lattice.length();
        for (c, &mu) in out.coeffs.iter_mut().zip(self.lattice.mu()) {
            if cutoff.retains(mu, length) {
                *c = Complex::new(T::zero(), T::zero());
            }
        }
        out
    }

    /// Mask of modes inside the cutoff, aligned with the lattice.
    pub fn retained_mask(lattice: &Lattice<T>, cutoff: Cutoff<T>) -> Vec<bool> {
        lattice.mu().iter().map(|&mu| cutoff.retains(mu, lattice.length())).collect()
    }

    /// `self += a * other`.
    pub fn axpy(&mut self, a: T, other: &Self) {
        debug_assert!(self.lattice.same_as(&other.lattice));
        for (x, y) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *x += *y * a;
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .fold(T::zero(), |m, (a, b)| m.max((a - b).norm()))
    }

    pub fn max_abs(&self) -> T {
        self.coeffs.iter().fold(T::zero(), |m, c| m.max(c.norm()))
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Converts to another scalar type on a freshly built lattice.
    pub fn cast<U: Real>(&self, lattice: &Arc<Lattice<U>>) -> SpectralField<U> {
        assert_eq!(lattice.n(), self.lattice.n());
        SpectralField {
            lattice: Arc::clone(lattice),
            coeffs: self
                .coeffs
                .iter()
                .map(|c| Complex::new(U::lit(c.re.as_f64()), U::lit(c.im.as_f64())))
                .collect(),
        }
    }
}

impl<T: Real> Add for &SpectralField<T> {
    type Output = SpectralField<T>;
    fn add(self, rhs: Self) -> SpectralField<T> {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl<T: Real> Sub for &SpectralField<T> {
    type Output = SpectralField<T>;
    fn sub(self, rhs: Self) -> SpectralField<T> {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl<T: Real> Neg for &SpectralField<T> {
    type Output = SpectralField<T>;
    fn neg(self) -> SpectralField<T> {
        let mut out = self.clone();
        out.coeffs.iter_mut().for_each(|c| *c = -*c);
        out
    }
}

impl<T: Real> Mul<T> for &SpectralField<T> {
    type Output = SpectralField<T>;
    fn mul(self, rhs: T) -> SpectralField<T> {
        let mut out = self.clone();
        out *= rhs;
        out
    }
}

impl<T: Real> AddAssign<&SpectralField<T>> for SpectralField<T> {
    fn add_assign(&mut self, rhs: &SpectralField<T>) {
        debug_assert!(self.lattice.same_as(&rhs.lattice));
        self.coeffs.iter_mut().zip(&rhs.coeffs).for_each(|(a, b)| *a += *b);
    }
}

impl<T: Real> SubAssign<&SpectralField<T>> for SpectralField<T> {
    fn sub_assign(&mut self, rhs: &SpectralField<T>) {
        debug_assert!(self.lattice.same_as(&rhs.lattice));
        self.coeffs.iter_mut().zip(&rhs.coeffs).for_each(|(a, b)| *a -= *b);
    }
}

impl<T: Real> MulAssign<T> for SpectralField<T> {
    fn mul_assign(&mut self, rhs: T) {
        self.coeffs.iter_mut().for_each(|c| *c = *c * rhs);
    }
}
