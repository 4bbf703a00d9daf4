//! Pseudo-spectral evaluation of `B(u, v) = P(u . grad v + v . grad u) / 2`.
//!
//! Inputs and output are truncated by the 2/3 rule, so the Fourier
//! coefficients of the quadratic product are exact on retained modes.

use rustfft::num_complex::Complex;

use super::field::SpectralField;
use super::grid::{forward_pair, inverse_pair};
use super::lattice::Lattice;
use crate::error::Result;
use crate::scalar::Real;

struct VelocityGrids<T> {
    u: [Vec<T>; 2],
    // grad[i][j] = d_j u_i
    grad: [[Vec<T>; 2]; 2],
}

fn velocity_grids<T: Real>(f: &SpectralField<T>) -> VelocityGrids<T> {
    let lat = f.lattice();
    let perp = lat.perp();
    let zero = Complex::new(T::zero(), T::zero());
    let c: Vec<Complex<T>> = f
        .coeffs()
        .iter()
        .enumerate()
        .map(|(i, &c)| if lat.is_dealiased(i) { c } else { zero })
        .collect();
    let i_unit = Complex::new(T::zero(), T::one());
    let comp = |i: usize, m: usize| c[i] * perp[i][m];
    let deriv = |i: usize, m: usize, j: usize| comp(i, m) * i_unit * lat.wavenumber(i)[j];

    let (u1, u2) = inverse_pair(lat, |i| comp(i, 0), |i| comp(i, 1));
    let (d1u1, d2u1) = inverse_pair(lat, |i| deriv(i, 0, 0), |i| deriv(i, 0, 1));
    let (d1u2, d2u2) = inverse_pair(lat, |i| deriv(i, 1, 0), |i| deriv(i, 1, 1));
    VelocityGrids { u: [u1, u2], grad: [[d1u1, d2u1], [d1u2, d2u2]] }
}

fn project_product<T: Real>(lat: &std::sync::Arc<Lattice<T>>, w1: &[T], w2: &[T]) -> SpectralField<T> {
    let (a, b) = forward_pair(lat, w1, w2);
    let perp = lat.perp();
    let zero = Complex::new(T::zero(), T::zero());
    let coeffs = (0..lat.len())
        .map(|i| if lat.is_dealiased(i) { a[i] * perp[i][0] + b[i] * perp[i][1] } else { zero })
        .collect();
    SpectralField::from_coeffs(lat, coeffs)
}

/// Symmetric bilinear form `B(u, v)`.
pub fn bilinear<T: Real>(u: &SpectralField<T>, v: &SpectralField<T>) -> Result<SpectralField<T>> {
    u.check_compatible(v)?;
    let gu = velocity_grids(u);
    let gv = velocity_grids(v);
    let n2 = u.lattice().n() * u.lattice().n();
    let half = T::lit(0.5);
    let mut w = [vec![T::zero(); n2], vec![T::zero(); n2]];
    for (i, wi) in w.iter_mut().enumerate() {
        for (p, out) in wi.iter_mut().enumerate() {
            let uv = gu.u[0][p] * gv.grad[i][0][p] + gu.u[1][p] * gv.grad[i][1][p];
            let vu = gv.u[0][p] * gu.grad[i][0][p] + gv.u[1][p] * gu.grad[i][1][p];
            *out = half * (uv + vu);
        }
    }
    Ok(project_product(u.lattice(), &w[0], &w[1]))
}

/// `B(u, u) = P(u . grad u)`, with half the transforms of [`bilinear`].
pub fn advect<T: Real>(u: &SpectralField<T>) -> SpectralField<T> {
    let g = velocity_grids(u);
    let n2 = u.lattice().n() * u.lattice().n();
    let mut w = [vec![T::zero(); n2], vec![T::zero(); n2]];
    for (i, wi) in w.iter_mut().enumerate() {
        for (p, out) in wi.iter_mut().enumerate() {
            *out = g.u[0][p] * g.grad[i][0][p] + g.u[1][p] * g.grad[i][1][p];
        }
    }
    project_product(u.lattice(), &w[0], &w[1])
}
