use std::f64::consts::PI;
use std::sync::Arc;

use nsda_core::noise::{NoiseStream, StreamRole};
use nsda_core::spectral::{
    advect, bilinear, leray_project, to_grid, to_spectral, Cutoff, GridVelocityField, Lattice, SpectralField,
    WaveIndex,
};
use nsda_core::Complex;
use proptest::prelude::*;

fn random_field(lat: &Arc<Lattice<f64>>, seed: u64, decay: f64) -> SpectralField<f64> {
    let xi = NoiseStream::new(seed, StreamRole::Stationary, lat.len()).next_normals::<f64>();
    SpectralField::from_coeffs(lat, xi.iter().zip(lat.mu()).map(|(x, &mu)| x * mu.powf(-decay)).collect())
}

fn random_grid(n: usize, length: f64, seed: u64) -> GridVelocityField<f64> {
    let xi = NoiseStream::new(seed, StreamRole::Stationary, n * n).next_normals::<f64>();
    GridVelocityField::from_components(n, length, xi.iter().map(|c| c.re).collect(), xi.iter().map(|c| c.im).collect())
        .unwrap()
}

#[test]
fn roundtrip_random_field_n32() {
    let lat = Lattice::new(32, 2.0 * PI).unwrap();
    let f = random_field(&lat, 11, 0.5);
    let back = to_spectral(&to_grid(&f), &lat).unwrap();
    assert!(back.max_abs_diff(&f) <= 1e-12 * f.max_abs());
}

#[test]
fn leray_projection_is_idempotent_and_self_adjoint() {
    let lat = Lattice::new(32, 3.0).unwrap();
    for seed in 0..5 {
        let g = random_grid(32, 3.0, seed);
        let h = random_grid(32, 3.0, 100 + seed);
        let pg = leray_project(&g, &lat).unwrap();
        let ppg = leray_project(&to_grid(&pg), &lat).unwrap();
        assert!(ppg.max_abs_diff(&pg) <= 1e-12 * pg.max_abs());

        let ph = leray_project(&h, &lat).unwrap();
        let lhs = to_grid(&pg).inner(&h);
        let rhs = g.inner(&to_grid(&ph));
        assert!((lhs - rhs).abs() <= 1e-12 * (g.energy() * h.energy()).sqrt(), "{lhs} vs {rhs}");

        let mean = to_grid(&pg).mean();
        assert!(mean[0].abs() < 1e-12 && mean[1].abs() < 1e-12);
    }
}

#[test]
fn projected_fields_are_pointwise_divergence_free() {
    let lat = Lattice::new(64, 2.0 * PI).unwrap();
    let g = random_grid(64, 2.0 * PI, 9);
    let p = leray_project(&g, &lat).unwrap();
    let grid = to_grid(&p);
    let div = grid.divergence(&lat).unwrap();
    let scale = grid.max_abs() * lat.kmax() as f64;
    let worst = div.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    assert!(worst <= 1e-12 * scale, "divergence {worst} vs scale {scale}");
}

#[test]
fn parseval_matches_grid_quadrature() {
    let lat = Lattice::new(32, 5.0).unwrap();
    let f = random_field(&lat, 4, 0.7);
    let quad = to_grid(&f).energy();
    assert!((f.norm_h().powi(2) - quad).abs() <= 1e-12 * quad);
}

#[test]
fn reconstructed_fields_are_real() {
    // the complex buffer behind to_grid must come back with zero imaginary part
    let lat = Lattice::new(16, 2.0 * PI).unwrap();
    let f = random_field(&lat, 8, 0.3);
    let g = to_grid(&f);
    // rebuild by direct summation over all +-k and compare
    let n = 16;
    let mut worst_im = 0.0f64;
    let mut worst_re = 0.0f64;
    for i1 in 0..n {
        for i2 in 0..n {
            let x = [2.0 * PI * i1 as f64 / n as f64, 2.0 * PI * i2 as f64 / n as f64];
            let mut acc = [Complex::new(0.0, 0.0); 2];
            for k1 in -7..=7 {
                for k2 in -7..=7 {
                    let Some(k) = WaveIndex::new(k1, k2) else { continue };
                    let norm = (k.mu() as f64).sqrt();
                    let e = Complex::from_polar(1.0, k1 as f64 * x[0] + k2 as f64 * x[1]);
                    let c = f.get(k) * e;
                    acc[0] += c * (k2 as f64 / norm);
                    acc[1] += c * (-k1 as f64 / norm);
                }
            }
            let p = i1 * n + i2;
            worst_im = worst_im.max(acc[0].im.abs()).max(acc[1].im.abs());
            worst_re = worst_re.max((acc[0].re - g.u1[p]).abs()).max((acc[1].re - g.u2[p]).abs());
        }
    }
    assert!(worst_im <= 1e-12 * g.max_abs());
    assert!(worst_re <= 1e-12 * g.max_abs());
}

#[test]
fn energy_cancellation_of_advection() {
    let lat = Lattice::new(64, 2.0 * PI).unwrap();
    for seed in 0..10 {
        let v = random_field(&lat, seed, 0.5);
        let b = bilinear(&v, &v).unwrap();
        let ratio = b.inner(&v).abs() / (v.norm_h() * v.norm_v().powi(2));
        assert!(ratio <= 1e-12, "seed {seed}: {ratio}");
        assert!(advect(&v).max_abs_diff(&b) <= 1e-12 * b.max_abs());
    }
}

#[test]
fn bilinear_is_symmetric() {
    let lat = Lattice::new(32, 2.0 * PI).unwrap();
    let u = random_field(&lat, 1, 0.5);
    let v = random_field(&lat, 2, 0.8);
    let a = bilinear(&u, &v).unwrap();
    let b = bilinear(&v, &u).unwrap();
    assert!(a.max_abs_diff(&b) <= 1e-14 * a.max_abs());
}

// Stream function psi = sum_j a_j cos(p_j x + q_j y + phase_j); velocity (psi_y, -psi_x).
struct StreamFn(Vec<(f64, f64, f64, f64)>);

impl StreamFn {
    fn velocity_and_gradient(&self, x: f64, y: f64) -> ([f64; 2], [[f64; 2]; 2]) {
        let mut u = [0.0; 2];
        let mut g = [[0.0; 2]; 2];
        for &(a, p, q, ph) in &self.0 {
            let (s, c) = (p * x + q * y + ph).sin_cos();
            // psi_y = -a q s, psi_x = -a p s
            u[0] += -a * q * s;
            u[1] += a * p * s;
            // d/dx, d/dy of u1 = -a q s
            g[0][0] += -a * q * p * c;
            g[0][1] += -a * q * q * c;
            g[1][0] += a * p * p * c;
            g[1][1] += a * p * q * c;
        }
        (u, g)
    }
}

#[test]
fn bilinear_matches_quadrature_oracle() {
    let n = 64;
    let length = 2.0 * PI;
    let lat = Lattice::new(n, length).unwrap();
    // Taylor-Green cell plus an oblique wave, and a second field
    let a = StreamFn(vec![(1.0, 1.0, 1.0, 0.0), (1.0, 1.0, -1.0, 0.0), (0.3, 2.0, 1.0, 0.4)]);
    let b = StreamFn(vec![(0.7, 0.0, 2.0, 1.1), (-0.5, 3.0, -1.0, 0.2)]);

    let sample = |s: &StreamFn| {
        GridVelocityField::from_fn(n, length, |x, y| s.velocity_and_gradient(x, y).0)
    };
    let u = to_spectral(&sample(&a), &lat).unwrap();
    let v = to_spectral(&sample(&b), &lat).unwrap();
    let fast = bilinear(&u, &v).unwrap();

    // physical-space evaluation of (u.grad v + v.grad u)/2 with analytic
    // derivatives, projected by a direct (non-FFT) Fourier sum
    let dx = length / n as f64;
    let mut w = vec![[0.0f64; 2]; n * n];
    for i1 in 0..n {
        for i2 in 0..n {
            let (x, y) = (i1 as f64 * dx, i2 as f64 * dx);
            let (ua, ga) = a.velocity_and_gradient(x, y);
            let (ub, gb) = b.velocity_and_gradient(x, y);
            for c in 0..2 {
                w[i1 * n + i2][c] = 0.5
                    * (ua[0] * gb[c][0] + ua[1] * gb[c][1] + ub[0] * ga[c][0] + ub[1] * ga[c][1]);
            }
        }
    }
    let mut worst = 0.0f64;
    for k1 in 0..=8 {
        for k2 in -8..=8 {
            let Some(k) = WaveIndex::new(k1, k2) else { continue };
            if !k.is_canonical() {
                continue;
            }
            let norm = (k.mu() as f64).sqrt();
            let mut acc = [Complex::new(0.0, 0.0); 2];
            for i1 in 0..n {
                for i2 in 0..n {
                    let e = Complex::from_polar(1.0, -2.0 * PI * (k1 as f64 * i1 as f64 + k2 as f64 * i2 as f64) / n as f64);
                    acc[0] += e * w[i1 * n + i2][0];
                    acc[1] += e * w[i1 * n + i2][1];
                }
            }
            let oracle = (acc[0] * (k2 as f64 / norm) + acc[1] * (-k1 as f64 / norm)) / (n * n) as f64;
            worst = worst.max((oracle - fast.get(k)).norm());
        }
    }
    assert!(worst <= 1e-10, "max deviation {worst}");
    // nothing outside the |k_i| <= 8 window should be excited
    let outside = lat
        .modes()
        .iter()
        .zip(fast.coeffs())
        .filter(|(k, _)| k.k1.abs() > 8 || k.k2.abs() > 8)
        .fold(0.0f64, |m, (_, c)| m.max(c.norm()));
    assert!(outside <= 1e-12);
}

#[test]
fn stokes_power_inverse_pair() {
    let lat = Lattice::new(16, 1.0).unwrap();
    let f = random_field(&lat, 5, 0.0);
    let back = f.apply_stokes_power(1.7).apply_stokes_power(-1.7);
    assert!(back.max_abs_diff(&f) <= 1e-12 * f.max_abs());
}

#[test]
fn f32_pipeline_runs() {
    let lat = Lattice::<f32>::new(16, 2.0 * std::f32::consts::PI).unwrap();
    let v = SpectralField::from_fn(&lat, |k| Complex::new(1.0 / k.mu() as f32, 0.1 / k.mu() as f32));
    let b = bilinear(&v, &v).unwrap();
    assert!(b.inner(&v).abs() <= 1e-4 * v.norm_h() * v.norm_v().powi(2));
    let back = to_spectral(&to_grid(&v), &lat).unwrap();
    assert!(back.max_abs_diff(&v) <= 1e-5);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn projection_pair_splits_identity(seed in any::<u64>(), lambda in 0.5f64..40.0) {
        let lat = Lattice::new(16, 2.0 * PI).unwrap();
        let f = random_field(&lat, seed, 0.5);
        let c = Cutoff::Finite(lambda);
        let p = f.project_modes(c);
        prop_assert_eq!(&(&p + &f.project_complement(c)), &f);
        prop_assert_eq!(p.project_modes(c), p);
    }

    #[test]
    fn roundtrip_is_identity(seed in any::<u64>(), decay in 0.0f64..1.5) {
        let lat = Lattice::new(16, 1.3).unwrap();
        let f = random_field(&lat, seed, decay);
        let back = to_spectral(&to_grid(&f), &lat).unwrap();
        prop_assert!(back.max_abs_diff(&f) <= 1e-12 * f.max_abs());
    }
}
