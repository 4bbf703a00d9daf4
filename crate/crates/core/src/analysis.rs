//! Computable constants from the stability and accuracy theory, and the
//! metrics experiments are judged by.

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::assimilation::{stationary_variances, FilterModel, FilterParams, RunRecord};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::spectral::{bilinear, Cutoff, Lattice, SpectralField};

/// Default lattice radius for traces over all of `Z^2 \ {0}`.
pub const DEFAULT_MODE_BUDGET: usize = 200;

/// A lattice sum with a rigorous bound on its truncation error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceValue {
    /// Partial sum plus the continuum estimate of the tail.
    pub value: f64,
    /// `|exact - value| <= tail_bound`.
    pub tail_bound: f64,
    pub partial: f64,
    pub budget: usize,
}

/// `trace(A^(-s) P_lambda) = sum |k|^(-2 s)` over nonzero `k` in the cutoff.
///
/// Finite cutoffs are summed exactly. With every mode observed the sum over
/// `|k| <= budget` is completed by `2 pi K^(2-2s) / (2s-2)`; the error bound
/// comes from comparing each lattice point with the unit cell around it,
/// `2 pi [ r^(2-2s)/(2s-2) + r^(1-2s)/(sqrt(2)(2s-1)) ]` at `r = K - sqrt(2)`.
pub fn trace_power(exponent: f64, cutoff: Cutoff<f64>, length: f64, budget: usize) -> Result<TraceValue> {
    let threshold = cutoff.mu_threshold(length);
    let radius = budget as i64;
    let within = |mu: i64| match threshold {
        Some(t) => (mu as f64) < t,
        None => mu <= radius * radius,
    };
    let reach = match threshold {
        Some(t) => (t.sqrt().ceil() as i64).min(radius.max(1)),
        None => radius,
    };
    let mut partial = 0.0;
    for k1 in -reach..=reach {
        for k2 in -reach..=reach {
            let mu = k1 * k1 + k2 * k2;
            if mu == 0 || mu > radius * radius || !within(mu) {
                continue;
            }
            partial += (mu as f64).powf(-exponent);
        }
    }
    let truncated = match threshold {
        None => true,
        Some(t) => t > (radius * radius) as f64,
    };
    if !truncated {
        return Ok(TraceValue { value: partial, tail_bound: 0.0, partial, budget });
    }
    if exponent <= 1.0 {
        return Err(Error::DivergentTrace { exponent });
    }
    let k = budget as f64;
    let estimate = 2.0 * std::f64::consts::PI * k.powf(2.0 - 2.0 * exponent) / (2.0 * exponent - 2.0);
    let r = (k - std::f64::consts::SQRT_2).max(0.5);
    let bound = 2.0
        * std::f64::consts::PI
        * (r.powf(2.0 - 2.0 * exponent) / (2.0 * exponent - 2.0)
            + std::f64::consts::FRAC_1_SQRT_2 * r.powf(1.0 - 2.0 * exponent) / (2.0 * exponent - 1.0));
    Ok(TraceValue { value: partial + estimate, tail_bound: bound, partial, budget })
}

/// Sum of `g(mu)` over every resolved, observed wavevector of `lattice`
/// (both halves of the spectrum).
pub fn lattice_sum<T: Real>(lattice: &Lattice<T>, cutoff: Cutoff<T>, g: impl Fn(T) -> T) -> T {
    let two = T::lit(2.0);
    lattice
        .mu()
        .iter()
        .filter(|&&mu| cutoff.retains(mu, lattice.length()))
        .fold(T::zero(), |acc, &mu| acc + two * g(mu))
}

fn is_sum_of_two_squares(m: u64) -> bool {
    let mut a = 0u64;
    while a * a <= m {
        let rest = m - a * a;
        let b = (rest as f64).sqrt().round() as u64;
        for c in b.saturating_sub(1)..=b + 1 {
            if c * c == rest {
                return true;
            }
        }
        a += 1;
    }
    false
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GammaBranch {
    /// Limited by an observed mode: `2 omega mu^(-2 alpha) + delta mu`.
    Observed,
    /// Limited by the first unobserved shell: `delta lambda L^2 / 4 pi^2`.
    Unobserved,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GammaMax {
    pub value: f64,
    pub branch: GammaBranch,
    /// `|k|^2` attaining the observed-branch minimum, if any mode is observed.
    pub lattice_argmin: Option<u64>,
    pub observed_min: Option<f64>,
    pub unobserved_bound: Option<f64>,
    /// `min_{x > 0} 2 omega x^(-2 alpha) + delta x` (alpha > 0 only).
    pub continuum: Option<f64>,
}

/// Largest `gamma` with `gamma |h|^2 / 2 <= <omega A^(-2 alpha) P h, h> + delta ||h||^2 / 2`.
///
/// Exact over the integer lattice: the observed modes give
/// `min 2 omega mu^(-2 alpha) + delta mu` over sums of two squares `mu`
/// inside the cutoff, the unobserved ones `delta max(lambda L^2 / 4 pi^2, 1)`.
pub fn gamma_max(params: &FilterParams<f64>, delta: f64, length: f64) -> GammaMax {
    let omega = params.omega;
    let alpha = params.alpha;
    let threshold = params.cutoff.mu_threshold(length);
    let f = |mu: u64| 2.0 * omega * (mu as f64).powf(-2.0 * alpha) + delta * mu as f64;
    let observed = |mu: u64| threshold.is_none_or(|t| (mu as f64) < t);

    let continuum = (alpha > 0.0 && omega > 0.0).then(|| {
        let x = (4.0 * alpha * omega / delta).powf(1.0 / (2.0 * alpha + 1.0));
        2.0 * omega * x.powf(-2.0 * alpha) + delta * x
    });

    let mut argmin = None;
    if observed(1) {
        if alpha <= 0.0 || omega == 0.0 {
            // non-decreasing in mu
            argmin = Some(1);
        } else {
            // convex in mu: the lattice minimum sits next to the continuum one
            let x = (4.0 * alpha * omega / delta).powf(1.0 / (2.0 * alpha + 1.0));
            let mut candidates = Vec::new();
            let mut below = (x.floor() as u64).max(1);
            if let Some(t) = threshold {
                let top = (t.ceil() as u64).saturating_sub(1).max(1);
                below = below.min(top);
            }
            while below > 1 && !(is_sum_of_two_squares(below) && observed(below)) {
                below -= 1;
            }
            candidates.push(below);
            let mut above = (x.ceil() as u64).max(1);
            while !is_sum_of_two_squares(above) {
                above += 1;
            }
            if observed(above) {
                candidates.push(above);
            }
            argmin = candidates.into_iter().min_by(|&a, &b| f(a).total_cmp(&f(b)));
        }
    }
    let observed_min = argmin.map(f);
    let unobserved_bound = threshold.map(|t| delta * t.max(1.0));

    let (value, branch) = match (observed_min, unobserved_bound) {
        (Some(o), Some(u)) if u < o => (u, GammaBranch::Unobserved),
        (Some(o), _) => (o, GammaBranch::Observed),
        (None, Some(u)) => (u, GammaBranch::Unobserved),
        (None, None) => unreachable!("mode (1,0) is observed whenever the cutoff is infinite"),
    };
    GammaMax { value, branch, lattice_argmin: argmin, observed_min, unobserved_bound, continuum }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AccuracyBound {
    pub bound: f64,
    pub gamma0: f64,
    pub trace: TraceValue,
}

/// Asymptotic mean-square error bound
/// `limsup E|m - u|^2 <= omega^2 sigma0^2 trace(A^(-4 alpha - 2 beta) P) / gamma0`.
pub fn accuracy_bound(params: &FilterParams<f64>, gamma0: f64, length: f64, budget: usize) -> Result<AccuracyBound> {
    if !(gamma0 > 0.0) {
        return Err(Error::InvalidParameter(format!("gamma0 must be positive, got {gamma0}")));
    }
    let trace = trace_power(params.trace_exponent(), params.cutoff, length, budget)?;
    let eps = params.epsilon();
    Ok(AccuracyBound { bound: eps * eps * trace.value / gamma0, gamma0, trace })
}

/// `E ||Z_phi(0)||^2 = (eps^2 / 2) trace((delta A + phi)^(-1) A^(1 - 4 alpha - 2 beta) P)`
/// over the modes of the model's lattice.
pub fn stationary_z_energy<T: Real>(model: &FilterModel<T>, delta: T) -> T {
    let var = stationary_variances(model, delta);
    let two = T::lit(2.0);
    var.iter().zip(model.lattice().mu()).fold(T::zero(), |acc, (&v, &mu)| acc + two * mu * v)
}

/// Running time averages `(1/n) sum_{i<n} x_i` of a uniformly sampled series.
pub fn birkhoff_average<T: Real>(series: &[T]) -> Result<Vec<T>> {
    if series.is_empty() {
        return Err(Error::EmptySeries);
    }
    let mut acc = T::zero();
    Ok(series
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            acc += x;
            acc / T::lit((i + 1) as f64)
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelativeError<T> {
    pub values: Vec<T>,
    /// Sample indices where `|u| < 1e-14`; their values are NaN.
    pub flagged: Vec<usize>,
}

/// `|m - u| / |u|` sample by sample.
pub fn relative_error<T: Real>(error: &[T], signal: &[T]) -> Result<RelativeError<T>> {
    if error.len() != signal.len() {
        return Err(Error::SeriesMismatch { left: error.len(), right: signal.len() });
    }
    let floor = T::lit(1e-14);
    let mut flagged = Vec::new();
    let values = error
        .iter()
        .zip(signal)
        .enumerate()
        .map(|(i, (&e, &u))| {
            if u < floor {
                flagged.push(i);
                T::nan()
            } else {
                e / u
            }
        })
        .collect();
    Ok(RelativeError { values, flagged })
}

pub fn relative_error_series<T: Real>(record: &RunRecord<T>) -> Result<RelativeError<T>> {
    relative_error(&record.error_h, &record.signal_h)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleMetrics<T> {
    pub times: Vec<T>,
    /// `|m^(k) - m^(1)| / |m^(1)|` for `k = 2, 3, ...`.
    pub pairwise: Vec<Vec<T>>,
    /// Maximum over members at each time (zero for a single member).
    pub envelope: Vec<T>,
    /// Least-squares `eta` in `envelope ~ exp(-eta t)`, when positive
    /// samples exist.
    pub decay_rate: Option<T>,
}

impl<T: Real> EnsembleMetrics<T> {
    /// `envelope(end) / envelope(start)`.
    pub fn decay_factor(&self) -> T {
        let first = self.envelope.first().copied().unwrap_or(T::zero());
        let last = self.envelope.last().copied().unwrap_or(T::zero());
        if first == T::zero() {
            T::zero()
        } else {
            last / first
        }
    }
}

/// Distances of every member from the first one, on their common grid.
/// Members must have been recorded with states and share the noise seed.
pub fn ensemble_stability_metrics<T: Real>(records: &[RunRecord<T>]) -> Result<EnsembleMetrics<T>> {
    let first = records.first().ok_or(Error::EmptySeries)?;
    let base = first
        .states
        .as_ref()
        .ok_or_else(|| Error::InvalidParameter("ensemble records must keep states".into()))?;
    let mut pairwise = Vec::new();
    for r in &records[1..] {
        if r.noise_seed != first.noise_seed {
            return Err(Error::InvalidParameter(format!(
                "member driven by noise seed {} differs from {}",
                r.noise_seed, first.noise_seed
            )));
        }
        if r.times != first.times {
            return Err(Error::SeriesMismatch { left: first.times.len(), right: r.times.len() });
        }
        let states = r
            .states
            .as_ref()
            .ok_or_else(|| Error::InvalidParameter("ensemble records must keep states".into()))?;
        pairwise.push(
            states
                .iter()
                .zip(base)
                .map(|(m, m1)| {
                    let d = (m - m1).norm_h();
                    let s = m1.norm_h();
                    if s > T::zero() {
                        d / s
                    } else {
                        d
                    }
                })
                .collect::<Vec<T>>(),
        );
    }
    let envelope: Vec<T> = (0..first.times.len())
        .map(|i| pairwise.iter().fold(T::zero(), |m, p| m.max(p[i])))
        .collect();
    let decay_rate = fit_log_slope(&first.times, &envelope).map(|s| -s);
    Ok(EnsembleMetrics { times: first.times.clone(), pairwise, envelope, decay_rate })
}

fn fit_log_slope<T: Real>(t: &[T], y: &[T]) -> Option<T> {
    let pts: Vec<(f64, f64)> = t
        .iter()
        .zip(y)
        .filter(|(_, &v)| v > T::zero() && v.is_finite())
        .map(|(&a, &b)| (a.as_f64(), b.as_f64().ln()))
        .collect();
    let fit = linear_fit(&pts)?;
    Some(T::lit(fit.slope))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
    /// Half-width of the 95% confidence interval on the slope.
    pub slope_ci95: f64,
}

/// Ordinary least squares through `(x, y)`; `None` with fewer than two
/// distinct abscissae.
pub fn linear_fit(points: &[(f64, f64)]) -> Option<LinearFit> {
    let n = points.len();
    if n < 2 {
        return None;
    }
    let nf = n as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = points.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let (stderr, ci) = if n > 2 {
        let rss: f64 = points.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
        let se = (rss / (nf - 2.0) / sxx).sqrt();
        let t = StudentsT::new(0.0, 1.0, nf - 2.0).map(|d| d.inverse_cdf(0.975)).unwrap_or(f64::NAN);
        (se, t * se)
    } else {
        (f64::NAN, f64::NAN)
    };
    Some(LinearFit { slope, intercept, slope_stderr: stderr, slope_ci95: ci })
}

/// Slope of `log(error)` against `log(h)`.
pub fn empirical_order(h: &[f64], error: &[f64]) -> Option<LinearFit> {
    let pts: Vec<(f64, f64)> = h
        .iter()
        .zip(error)
        .filter(|(&a, &b)| a > 0.0 && b > 0.0)
        .map(|(&a, &b)| (a.ln(), b.ln()))
        .collect();
    linear_fit(&pts)
}

/// `R' = sup_t |f + omega A^(-2 alpha) P_lambda u(t)|_{-1}^2` over the
/// given signal states.
pub fn r_prime<T: Real>(forcing: &SpectralField<T>, model: &FilterModel<T>, states: &[SpectralField<T>]) -> T {
    states.iter().fold(T::zero(), |sup, u| {
        let mut g = forcing.clone();
        for (i, c) in g.coeffs_mut().iter_mut().enumerate() {
            *c += u.coeffs()[i] * model.relaxation_rates()[i];
        }
        sup.max(g.sobolev_norm(-T::one()).powi(2))
    })
}

/// `R'' / K = R' / delta^2 + eps^2 trace(A^(-4 alpha - 2 beta) P) / delta`,
/// the part of `R''` that does not involve the unknown constant `K`.
pub fn r_double_prime_over_k(r_prime: f64, trace: f64, params: &FilterParams<f64>, delta: f64) -> f64 {
    r_prime / (delta * delta) + params.epsilon().powi(2) * trace / delta
}

/// Random-search surrogate for the constant in
/// `<B(v,v) - B(w,w), v - w> <= K' ||w|| ||v - w|| |v - w|`.
/// Only a lower estimate of the true supremum.
pub fn estimate_k_prime<T: Real>(
    lattice: &std::sync::Arc<Lattice<T>>,
    samples: usize,
    stream: &mut crate::noise::NoiseStream,
) -> Result<T> {
    let mut best = T::zero();
    for _ in 0..samples {
        let draw = |s: &mut crate::noise::NoiseStream, p: T| {
            let xi = s.next_normals::<T>();
            SpectralField::from_coeffs(lattice, xi.iter().zip(lattice.mu()).map(|(x, &mu)| *x * mu.powf(-p)).collect())
        };
        let v = draw(stream, T::one());
        let w = draw(stream, T::one());
        let d = &v - &w;
        let lhs = (&bilinear(&v, &v)? - &bilinear(&w, &w)?).inner(&d);
        let denom = w.norm_v() * d.norm_v() * d.norm_h();
        if denom > T::zero() {
            best = best.max(lhs / denom);
        }
    }
    Ok(best)
}

/// Everything the bounds report carries.
#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub gamma_max: f64,
    pub gamma_branch: GammaBranch,
    pub lattice_argmin: Option<u64>,
    pub gamma_continuum: Option<f64>,
    pub gamma0: f64,
    pub trace: f64,
    pub tail_bound: f64,
    pub accuracy_bound: Option<f64>,
    pub stationary_z_energy: f64,
    pub params: FilterParams<f64>,
    pub delta: f64,
    pub length: f64,
}

/// Bound report with `gamma0 = gamma_max / 2`.
pub fn bound_report(params: &FilterParams<f64>, delta: f64, lattice: &std::sync::Arc<Lattice<f64>>) -> Result<BoundReport> {
    let length = lattice.length();
    let g = gamma_max(params, delta, length);
    let gamma0 = g.value / 2.0;
    let trace = trace_power(params.trace_exponent(), params.cutoff, length, DEFAULT_MODE_BUDGET)?;
    let acc = accuracy_bound(params, gamma0, length, DEFAULT_MODE_BUDGET)?;
    let model = FilterModel::new(params, lattice)?;
    Ok(BoundReport {
        gamma_max: g.value,
        gamma_branch: g.branch,
        lattice_argmin: g.lattice_argmin,
        gamma_continuum: g.continuum,
        gamma0,
        trace: trace.value,
        tail_bound: trace.tail_bound,
        accuracy_bound: Some(acc.bound),
        stationary_z_energy: stationary_z_energy(&model, delta),
        params: params.clone(),
        delta,
        length,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    const TWO_PI: f64 = 2.0 * PI;

    #[test]
    fn unit_shell_trace_counts_four_vectors() {
        for s in [0.3, 1.0, 2.5] {
            let t = trace_power(s, Cutoff::Finite(1.5), TWO_PI, 200).unwrap();
            assert_eq!(t.value, 4.0);
            assert_eq!(t.tail_bound, 0.0);
        }
        assert_eq!(trace_power(2.0, Cutoff::Finite(0.9), TWO_PI, 200).unwrap().value, 0.0);
    }

    #[test]
    fn infinite_trace_matches_epstein_zeta() {
        // sum' |k|^-4 = 4 zeta(2) G with G Catalan's constant
        let exact = 4.0 * PI * PI / 6.0 * 0.915_965_594_177_219;
        let t = trace_power(2.0, Cutoff::Infinite, TWO_PI, 200).unwrap();
        assert!(t.tail_bound < 1e-3);
        assert!((t.value - exact).abs() <= t.tail_bound, "{} vs {exact}", t.value);
        assert!(exact - t.partial <= t.tail_bound);
    }

    #[test]
    fn divergent_trace_is_rejected() {
        assert!(matches!(
            trace_power(1.0, Cutoff::Infinite, TWO_PI, 50),
            Err(Error::DivergentTrace { .. })
        ));
        assert!(trace_power(0.5, Cutoff::Finite(30.0), TWO_PI, 50).is_ok());
    }

    #[test]
    fn partial_sums_grow_and_tail_bound_dominates_remainder() {
        let a = trace_power(1.5, Cutoff::Infinite, TWO_PI, 40).unwrap();
        let b = trace_power(1.5, Cutoff::Infinite, TWO_PI, 160).unwrap();
        assert!(b.partial > a.partial);
        assert!(b.partial - a.partial <= a.tail_bound);
    }

    fn brute_gamma(omega: f64, alpha: f64, delta: f64, mu_cut: Option<f64>) -> f64 {
        let mut best = f64::INFINITY;
        for k1 in -400i64..=400 {
            for k2 in -400i64..=400 {
                let mu = (k1 * k1 + k2 * k2) as f64;
                if mu == 0.0 {
                    continue;
                }
                let v = match mu_cut {
                    Some(c) if mu >= c => delta * mu,
                    _ => 2.0 * omega * mu.powf(-2.0 * alpha) + delta * mu,
                };
                best = best.min(v);
            }
        }
        best
    }

    #[test]
    fn gamma_max_matches_brute_force_enumeration() {
        for &(omega, alpha) in &[(100.0, 0.5), (10.0, 0.5), (100.0, 1.0), (3.0, 0.25), (50.0, -0.25)] {
            let p = FilterParams { omega, alpha, ..FilterParams::default() };
            let g = gamma_max(&p, 0.01, TWO_PI);
            let brute = brute_gamma(omega, alpha, 0.01, None);
            assert!((g.value - brute).abs() < 1e-12, "omega {omega} alpha {alpha}: {} vs {brute}", g.value);
        }
        // continuum cross-check: mu* = sqrt(2 omega / delta) for alpha = 1/2
        let p = FilterParams::default();
        let g = gamma_max(&p, 0.01, TWO_PI);
        let mu_star = (2.0f64 * 100.0 / 0.01).sqrt();
        assert!((g.lattice_argmin.unwrap() as f64 - mu_star).abs() < 5.0);
        assert!(g.continuum.unwrap() <= g.value);
    }

    #[test]
    fn gamma_max_zero_omega_is_delta() {
        let p = FilterParams { omega: 0.0, ..FilterParams::default() };
        assert_eq!(gamma_max(&p, 0.01, TWO_PI).value, 0.01);
    }

    #[test]
    fn gamma_max_unobserved_branch() {
        let p = FilterParams { cutoff: Cutoff::Finite(10.0), ..FilterParams::default() };
        let g = gamma_max(&p, 0.01, TWO_PI);
        assert_eq!(g.branch, GammaBranch::Unobserved);
        assert!((g.value - 0.01 * 10.0).abs() < 1e-15);
        // never below delta, even with nothing observed
        let q = FilterParams { cutoff: Cutoff::Finite(0.5), ..FilterParams::default() };
        assert!((gamma_max(&q, 0.01, TWO_PI).value - 0.01).abs() < 1e-15);
    }

    #[test]
    fn accuracy_bound_scales_with_epsilon_squared() {
        let p = FilterParams::default();
        let a = accuracy_bound(&p, 1.0, TWO_PI, 100).unwrap();
        let q = FilterParams { sigma0: 2.0 * p.sigma0, ..p.clone() };
        let b = accuracy_bound(&q, 1.0, TWO_PI, 100).unwrap();
        assert!((b.bound / a.bound - 4.0).abs() < 1e-12);
        let z = FilterParams { sigma0: 0.0, ..p.clone() };
        assert_eq!(accuracy_bound(&z, 1.0, TWO_PI, 100).unwrap().bound, 0.0);
        assert!(accuracy_bound(&p, 0.0, TWO_PI, 100).is_err());
    }

    #[test]
    fn birkhoff_of_constant_and_empty() {
        assert_eq!(birkhoff_average(&[2.5; 7]).unwrap(), vec![2.5; 7]);
        assert_eq!(birkhoff_average::<f64>(&[]), Err(Error::EmptySeries));
        let xs = [1.0, 3.0, 2.0, 6.0];
        let avg = birkhoff_average(&xs).unwrap();
        assert_eq!(*avg.last().unwrap(), xs.iter().sum::<f64>() / 4.0);
    }

    #[test]
    fn relative_error_examples() {
        let u: [f64; 3] = [2.0, 4.0, 0.0];
        let r = relative_error(&[0.0, 4.0, 1.0], &u).unwrap();
        assert_eq!(&r.values[..2], &[0.0, 1.0]);
        assert!(r.values[2].is_nan());
        assert_eq!(r.flagged, vec![2]);
        assert!(relative_error(&[0.0], &u).is_err());
    }

    #[test]
    fn linear_fit_recovers_slope() {
        let pts: Vec<(f64, f64)> = (0..5).map(|i| (i as f64, 3.0 - 1.5 * i as f64)).collect();
        let f = linear_fit(&pts).unwrap();
        assert!((f.slope + 1.5).abs() < 1e-12 && (f.intercept - 3.0).abs() < 1e-12);
        assert!(f.slope_stderr < 1e-10);
        let o = empirical_order(&[0.04, 0.02, 0.01], &[0.4, 0.1, 0.025]).unwrap();
        assert!((o.slope - 2.0).abs() < 1e-12);
    }

    #[test]
    fn two_squares() {
        let reps: Vec<u64> = (1..=10).filter(|&m| is_sum_of_two_squares(m)).collect();
        assert_eq!(reps, vec![1, 2, 4, 5, 8, 9, 10]);
    }
}
