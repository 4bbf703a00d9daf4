use std::sync::Arc;

use rustfft::num_complex::Complex;

use super::field::SpectralField;
use super::lattice::Lattice;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Velocity components sampled on the collocation grid
/// `x = (i1, i2) L / n`, stored row-major with `i1` the slow index.
#[derive(Debug, Clone, PartialEq)]
pub struct GridVelocityField<T> {
    n: usize,
    length: T,
    pub u1: Vec<T>,
    pub u2: Vec<T>,
}

impl<T: Real> GridVelocityField<T> {
    pub fn zeros(n: usize, length: T) -> Self {
        Self { n, length, u1: vec![T::zero(); n * n], u2: vec![T::zero(); n * n] }
    }

    pub fn from_components(n: usize, length: T, u1: Vec<T>, u2: Vec<T>) -> Result<Self> {
        if u1.len() != n * n || u2.len() != n * n {
            return Err(Error::ResolutionMismatch { left: n * n, right: u1.len().max(u2.len()) });
        }
        Ok(Self { n, length, u1, u2 })
    }

    /// Samples `f(x1, x2) -> [v1, v2]` at the collocation points.
    pub fn from_fn(n: usize, length: T, mut f: impl FnMut(T, T) -> [T; 2]) -> Self {
        let mut g = Self::zeros(n, length);
        let dx = length / T::lit(n as f64);
        for i1 in 0..n {
            for i2 in 0..n {
                let v = f(dx * T::lit(i1 as f64), dx * T::lit(i2 as f64));
                g.u1[i1 * n + i2] = v[0];
                g.u2[i1 * n + i2] = v[1];
            }
        }
        g
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> T {
        self.length
    }

    pub fn mean(&self) -> [T; 2] {
        let m = T::lit((self.n * self.n) as f64);
        let s1 = self.u1.iter().fold(T::zero(), |a, &b| a + b);
        let s2 = self.u2.iter().fold(T::zero(), |a, &b| a + b);
        [s1 / m, s2 / m]
    }

    /// Area-averaged quadrature of `u . v`.
    pub fn inner(&self, other: &Self) -> T {
        let s = self
            .u1
            .iter()
            .zip(&other.u1)
            .chain(self.u2.iter().zip(&other.u2))
            .fold(T::zero(), |a, (x, y)| a + *x * *y);
        s / T::lit((self.n * self.n) as f64)
    }

    pub fn energy(&self) -> T {
        self.inner(self)
    }

    pub fn max_abs(&self) -> T {
        self.u1.iter().chain(&self.u2).fold(T::zero(), |m, v| m.max(v.abs()))
    }

    /// Pointwise divergence by spectral differentiation of the resolved
    /// content (Nyquist rows are dropped).
    pub fn divergence(&self, lattice: &Lattice<T>) -> Result<Vec<T>> {
        self.check(lattice)?;
        let (a, b) = forward_pair(lattice, &self.u1, &self.u2);
        let n = self.n;
        let mut spec = vec![Complex::new(T::zero(), T::zero()); n * n];
        for i in 0..lattice.len() {
            let kk = lattice.wavenumber(i);
            let d = (a[i] * kk[0] + b[i] * kk[1]) * Complex::new(T::zero(), T::one());
            spec[lattice.pos(i)] = d;
            spec[lattice.neg_pos(i)] = d.conj();
        }
        lattice.fft.inverse(&mut spec);
        Ok(spec.into_iter().map(|c| c.re).collect())
    }

    fn check(&self, lattice: &Lattice<T>) -> Result<()> {
        if self.n != lattice.n() {
            return Err(Error::ResolutionMismatch { left: self.n, right: lattice.n() });
        }
        if self.length != lattice.length() {
            return Err(Error::LengthMismatch {
                left: self.length.as_f64(),
                right: lattice.length().as_f64(),
            });
        }
        Ok(())
    }
}

/// Normalized Fourier coefficients of two real grids at every canonical
/// mode, from a single packed complex transform.
pub(crate) fn forward_pair<T: Real>(
    lattice: &Lattice<T>,
    p: &[T],
    q: &[T],
) -> (Vec<Complex<T>>, Vec<Complex<T>>) {
    let n = lattice.n();
    let mut z: Vec<Complex<T>> = p.iter().zip(q).map(|(&a, &b)| Complex::new(a, b)).collect();
    lattice.fft.forward(&mut z);
    let scale = T::one() / T::lit((n * n) as f64);
    let half = T::lit(0.5);
    let mut a = Vec::with_capacity(lattice.len());
    let mut b = Vec::with_capacity(lattice.len());
    for i in 0..lattice.len() {
        let zk = z[lattice.pos(i)];
        let zm = z[lattice.neg_pos(i)].conj();
        a.push((zk + zm) * (half * scale));
        // (zk - zm) / 2i
        let d = (zk - zm) * (half * scale);
        b.push(Complex::new(d.im, -d.re));
    }
    (a, b)
}

/// Real grids of two Hermitian spectra given by their canonical halves.
pub(crate) fn inverse_pair<T: Real>(
    lattice: &Lattice<T>,
    a: impl Fn(usize) -> Complex<T>,
    b: impl Fn(usize) -> Complex<T>,
) -> (Vec<T>, Vec<T>) {
    let n = lattice.n();
    let i_unit = Complex::new(T::zero(), T::one());
    let mut z = vec![Complex::new(T::zero(), T::zero()); n * n];
    for i in 0..lattice.len() {
        let (ak, bk) = (a(i), b(i));
        z[lattice.pos(i)] = ak + i_unit * bk;
        z[lattice.neg_pos(i)] = ak.conj() + i_unit * bk.conj();
    }
    lattice.fft.inverse(&mut z);
    z.into_iter().map(|c| (c.re, c.im)).unzip()
}

/// Reconstructs the physical velocity `sum_k u_k psi_k(x)` on the grid.
pub fn to_grid<T: Real>(f: &SpectralField<T>) -> GridVelocityField<T> {
    let lat = f.lattice();
    let c = f.coeffs();
    let perp = lat.perp();
    let (u1, u2) = inverse_pair(lat, |i| c[i] * perp[i][0], |i| c[i] * perp[i][1]);
    GridVelocityField { n: lat.n(), length: lat.length(), u1, u2 }
}

/// Leray-Helmholtz projection of a grid field onto the resolved
/// divergence-free, mean-zero subspace, expressed on the `psi_k` basis.
pub fn leray_project<T: Real>(
    g: &GridVelocityField<T>,
    lattice: &Arc<Lattice<T>>,
) -> Result<SpectralField<T>> {
    g.check(lattice)?;
    let (a, b) = forward_pair(lattice, &g.u1, &g.u2);
    let perp = lattice.perp();
    let coeffs = (0..lattice.len()).map(|i| a[i] * perp[i][0] + b[i] * perp[i][1]).collect();
    Ok(SpectralField::from_coeffs(lattice, coeffs))
}

/// Inverse of [`to_grid`] on resolved divergence-free fields. Any gradient
/// or mean component in `g` is discarded.
pub fn to_spectral<T: Real>(
    g: &GridVelocityField<T>,
    lattice: &Arc<Lattice<T>>,
) -> Result<SpectralField<T>> {
    leray_project(g, lattice)
}
