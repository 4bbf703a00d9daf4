use std::f64::consts::PI;

use nsda_core::analysis::stationary_z_energy;
use nsda_core::assimilation::{
    evolve_z, noise_increment, stationary_variances, stationary_z_sample, FilterModel, FilterParams,
};
use nsda_core::noise::{NoiseStream, StreamRole};
use nsda_core::spectral::{Cutoff, Lattice, WaveIndex};
use nsda_core::Complex;

const DELTA: f64 = 0.01;

fn model(n: usize, params: FilterParams<f64>) -> FilterModel<f64> {
    FilterModel::new(&params, &Lattice::new(n, 2.0 * PI).unwrap()).unwrap()
}

#[test]
fn increment_variance_matches_closed_form() {
    let m = model(8, FilterParams::default());
    let lat = m.lattice().clone();
    let (k, _) = lat.lookup(WaveIndex::new(1, 0).unwrap()).unwrap();
    let dt = 0.01;
    let mut s = NoiseStream::new(42, StreamRole::Filter, lat.len());
    let draws = 10_000;
    let mean_sq = (0..draws).map(|_| noise_increment(&m, dt, &mut s).coeffs()[k].norm_sqr()).sum::<f64>()
        / draws as f64;
    let expected = (100.0f64 * 0.005).powi(2) * dt;
    assert!((mean_sq / expected - 1.0).abs() < 0.05, "{mean_sq} vs {expected}");
}

#[test]
fn distinct_modes_are_uncorrelated() {
    let m = model(8, FilterParams::default());
    let lat = m.lattice().clone();
    let idx: Vec<usize> = [(1, 0), (0, 1), (1, 1), (2, -1)]
        .iter()
        .map(|&(a, b)| lat.lookup(WaveIndex::new(a, b).unwrap()).unwrap().0)
        .collect();
    let mut s = NoiseStream::new(9, StreamRole::Filter, lat.len());
    let draws = 20_000;
    let samples: Vec<Vec<Complex<f64>>> = (0..draws)
        .map(|_| {
            let w = noise_increment(&m, 1.0, &mut s);
            idx.iter().map(|&i| w.coeffs()[i]).collect()
        })
        .collect();
    for a in 0..idx.len() {
        for b in a + 1..idx.len() {
            let cross: Complex<f64> = samples.iter().map(|v| v[a] * v[b].conj()).sum::<Complex<f64>>() / draws as f64;
            let sa = m.noise_amplitudes()[idx[a]];
            let sb = m.noise_amplitudes()[idx[b]];
            let se = sa * sb / (draws as f64).sqrt();
            assert!(cross.norm() <= 3.0 * se, "modes {a},{b}: {} vs se {se}", cross.norm());
        }
    }
}

fn empirical_z_energy(m: &FilterModel<f64>, seed: u64, samples: usize) -> f64 {
    let mut s = NoiseStream::new(seed, StreamRole::Stationary, m.lattice().len());
    (0..samples).map(|_| stationary_z_sample(m, DELTA, &mut s).unwrap().z.norm_v().powi(2)).sum::<f64>()
        / samples as f64
}

#[test]
fn single_shell_stationary_energy() {
    for phi in [0.0, 1.0] {
        // lambda = 1.5 keeps only |k|^2 = 1 on the 2 pi torus
        let p = FilterParams { cutoff: Cutoff::Finite(1.5), phi, ..FilterParams::default() };
        let m = model(8, p);
        let eps = 100.0 * 0.005;
        let exact = 4.0 * eps * eps / (2.0 * (DELTA + phi));
        assert!((stationary_z_energy(&m, DELTA) / exact - 1.0).abs() < 1e-12);
        let emp = empirical_z_energy(&m, 1, 100_000);
        assert!((emp / exact - 1.0).abs() < 0.03, "phi={phi}: {emp} vs {exact}");
    }
}

#[test]
fn shift_drives_z_energy_to_zero() {
    let energies: Vec<f64> = [0.0, 1.0, 10.0, 100.0]
        .iter()
        .map(|&phi| stationary_z_energy(&model(16, FilterParams { phi, ..FilterParams::default() }), DELTA))
        .collect();
    assert!(energies.windows(2).all(|w| w[1] < w[0]), "{energies:?}");
    assert!(energies[3] < 1e-3 * energies[0]);
}

#[test]
fn halving_epsilon_quarters_z_energy() {
    let p = FilterParams { cutoff: Cutoff::Finite(10.0), ..FilterParams::default() };
    let half = FilterParams { sigma0: p.sigma0 / 2.0, ..p.clone() };
    let n = 40_000;
    let a = empirical_z_energy(&model(8, p), 3, n);
    let b = empirical_z_energy(&model(8, half), 4, n);
    // each estimate has relative standard error at most 1/sqrt(n)
    let tol = 0.25 * 3.0 * (2.0 / n as f64).sqrt();
    assert!((b / a - 0.25).abs() < tol, "ratio {}", b / a);
}

#[test]
fn exact_ou_update_preserves_stationary_variance() {
    let m = model(4, FilterParams { phi: 0.5, ..FilterParams::default() });
    let var = stationary_variances(&m, DELTA);
    let (paths, steps, dt) = (5000, 10_000, 0.1);
    let mut start = 0.0;
    let mut end = 0.0;
    for p in 0..paths {
        let mut s = NoiseStream::new(1000 + p as u64, StreamRole::Stationary, m.lattice().len());
        let mut z = stationary_z_sample(&m, DELTA, &mut s).unwrap();
        start += normalized(z.z.coeffs(), &var);
        for _ in 0..steps {
            z = evolve_z(&z, &m, DELTA, dt, &mut s).unwrap();
        }
        end += normalized(z.z.coeffs(), &var);
    }
    let (start, end) = (start / paths as f64, end / paths as f64);
    assert!((start - 1.0).abs() < 0.02 && (end - 1.0).abs() < 0.02, "start {start} end {end}");
}

fn normalized(z: &[Complex<f64>], var: &[f64]) -> f64 {
    z.iter().zip(var).map(|(c, v)| c.norm_sqr() / v).sum::<f64>() / z.len() as f64
}

#[test]
fn z_paths_replay() {
    let m = model(8, FilterParams::default());
    let run = || {
        let mut s = NoiseStream::new(5, StreamRole::Stationary, m.lattice().len());
        let mut z = stationary_z_sample(&m, DELTA, &mut s).unwrap();
        for _ in 0..50 {
            z = evolve_z(&z, &m, DELTA, 0.01, &mut s).unwrap();
        }
        z.z
    };
    assert_eq!(run(), run());
}
