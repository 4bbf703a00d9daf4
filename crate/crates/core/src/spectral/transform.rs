//! Square 2D complex FFTs on a row-major `n x n` buffer.
//!
//! Two real fields are transformed at once by packing them into the real
//! and imaginary parts of a single complex buffer.

use std::fmt;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::scalar::Real;

pub(crate) struct Fft2<T: Real> {
    n: usize,
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
}

impl<T: Real> fmt::Debug for Fft2<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Fft2").field("n", &self.n).finish()
    }
}

impl<T: Real> Fft2<T> {
    pub(crate) fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    /// Unnormalized forward transform, `X_k = sum_j x_j exp(-2 pi i j.k / n)`.
    pub(crate) fn forward(&self, data: &mut [Complex<T>]) {
        self.apply(&*self.forward, data);
    }

    /// Unnormalized inverse transform, `x_j = sum_k X_k exp(+2 pi i j.k / n)`.
    pub(crate) fn inverse(&self, data: &mut [Complex<T>]) {
        self.apply(&*self.inverse, data);
    }

    fn apply(&self, plan: &dyn Fft<T>, data: &mut [Complex<T>]) {
        debug_assert_eq!(data.len(), self.n * self.n);
        // rows are contiguous; process() walks them in chunks of n
        plan.process(data);
        transpose_square(data, self.n);
        plan.process(data);
        transpose_square(data, self.n);
    }
}

fn transpose_square<X>(data: &mut [X], n: usize) {
    for i in 0..n {
        for j in (i + 1)..n {
            data.swap(i * n + j, j * n + i);
        }
    }
}
