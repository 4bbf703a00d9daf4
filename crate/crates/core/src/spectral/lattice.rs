use std::fmt;

use serde::{Deserialize, Serialize};

use super::transform::Fft2;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Nonzero wavevector `k = (k1, k2)` labelling the basis field `psi_k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct WaveIndex {
    pub k1: i32,
    pub k2: i32,
}

impl WaveIndex {
    /// `None` for the zero vector, which carries the (excluded) mean flow.
    pub fn new(k1: i32, k2: i32) -> Option<Self> {
        if k1 == 0 && k2 == 0 {
            None
        } else {
            Some(Self { k1, k2 })
        }
    }

    /// Stokes eigenvalue `|k|^2`.
    pub fn mu(self) -> i64 {
        let (a, b) = (self.k1 as i64, self.k2 as i64);
        a * a + b * b
    }

    #[allow(clippy::should_implement_trait)]
    pub fn neg(self) -> Self {
        Self { k1: -self.k1, k2: -self.k2 }
    }

    /// Canonical half-plane: `k1 > 0`, or `k1 == 0 && k2 > 0`.
    pub fn is_canonical(self) -> bool {
        self.k1 > 0 || (self.k1 == 0 && self.k2 > 0)
    }

    pub fn canonical(self) -> (Self, bool) {
        if self.is_canonical() {
            (self, false)
        } else {
            (self.neg(), true)
        }
    }
}

impl fmt::Display for WaveIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.k1, self.k2)
    }
}

/// Resolved wavevectors of an `n x n` grid on a torus of side `length`,
/// with the per-mode tables every operator needs.
///
/// Only the canonical half-plane is stored; the partner `-k` of every
/// stored mode is implied by the reality constraint `u_{-k} = -conj(u_k)`.
pub struct Lattice<T: Real> {
    n: usize,
    length: T,
    modes: Vec<WaveIndex>,
    mu: Vec<T>,
    perp: Vec<[T; 2]>,
    dealiased: Vec<bool>,
    pos: Vec<usize>,
    neg_pos: Vec<usize>,
    slot: Vec<Option<(usize, bool)>>,
    pub(crate) fft: Fft2<T>,
}

impl<T: Real> fmt::Debug for Lattice<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Lattice")
            .field("n", &self.n)
            .field("length", &self.length)
            .field("modes", &self.modes.len())
            .finish()
    }
}

impl<T: Real> Lattice<T> {
    pub fn new(n: usize, length: T) -> Result<std::sync::Arc<Self>> {
        if n < 4 || !n.is_multiple_of(2) {
            return Err(Error::BadResolution(n));
        }
        if !(length > T::zero()) || !length.is_finite() {
            return Err(Error::InvalidParameter(format!("torus length {length}")));
        }
        let kmax = (n / 2 - 1) as i32;
        let wrap = |k: i32| -> usize { k.rem_euclid(n as i32) as usize };

        let mut modes = Vec::new();
        for k1 in 0..=kmax {
            for k2 in -kmax..=kmax {
                if let Some(k) = WaveIndex::new(k1, k2) {
                    if k.is_canonical() {
                        modes.push(k);
                    }
                }
            }
        }

        let mut slot = vec![None; n * n];
        let mut mu = Vec::with_capacity(modes.len());
        let mut perp = Vec::with_capacity(modes.len());
        let mut dealiased = Vec::with_capacity(modes.len());
        let mut pos = Vec::with_capacity(modes.len());
        let mut neg_pos = Vec::with_capacity(modes.len());
        for (i, k) in modes.iter().enumerate() {
            let m = k.mu();
            let norm = (m as f64).sqrt();
            mu.push(T::lit(m as f64));
            perp.push([T::lit(k.k2 as f64 / norm), T::lit(-k.k1 as f64 / norm)]);
            // 2/3 rule: products of retained modes never alias onto retained modes
            dealiased.push(3 * k.k1.unsigned_abs().max(k.k2.unsigned_abs()) as usize <= n);
            let p = wrap(k.k1) * n + wrap(k.k2);
            let q = wrap(-k.k1) * n + wrap(-k.k2);
            slot[p] = Some((i, false));
            slot[q] = Some((i, true));
            pos.push(p);
            neg_pos.push(q);
        }

        Ok(std::sync::Arc::new(Self {
            n,
            length,
            modes,
            mu,
            perp,
            dealiased,
            pos,
            neg_pos,
            slot,
            fft: Fft2::new(n),
        }))
    }

    /// Grid points per axis.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> T {
        self.length
    }

    /// Largest resolved `|k_i|`.
    pub fn kmax(&self) -> i32 {
        (self.n / 2 - 1) as i32
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn modes(&self) -> &[WaveIndex] {
        &self.modes
    }

    pub fn mode(&self, i: usize) -> WaveIndex {
        self.modes[i]
    }

    /// Stokes eigenvalues `|k|^2`, aligned with [`Lattice::modes`].
    pub fn mu(&self) -> &[T] {
        &self.mu
    }

    /// Unit vectors `k^perp / |k|`.
    pub fn perp(&self) -> &[[T; 2]] {
        &self.perp
    }

    /// Whether mode `i` survives 2/3-rule dealiasing.
    pub fn is_dealiased(&self, i: usize) -> bool {
        self.dealiased[i]
    }

    /// Canonical storage slot of `k` and whether `k` is the mirrored partner.
    pub fn lookup(&self, k: WaveIndex) -> Option<(usize, bool)> {
        let kmax = self.kmax();
        if k.k1.abs() > kmax || k.k2.abs() > kmax || (k.k1 == 0 && k.k2 == 0) {
            return None;
        }
        let n = self.n as i32;
        self.slot[(k.k1.rem_euclid(n) * n + k.k2.rem_euclid(n)) as usize]
    }

    pub(crate) fn pos(&self, i: usize) -> usize {
        self.pos[i]
    }

    pub(crate) fn neg_pos(&self, i: usize) -> usize {
        self.neg_pos[i]
    }

    /// Physical wavenumber `2 pi k / L`.
    pub fn wavenumber(&self, i: usize) -> [T; 2] {
        let s = T::lit(2.0) * T::PI() / self.length;
        let k = self.modes[i];
        [s * T::lit(k.k1 as f64), s * T::lit(k.k2 as f64)]
    }

    /// Grid spacing `L / n`.
    pub fn dx(&self) -> T {
        self.length / T::lit(self.n as f64)
    }

    pub fn same_as(&self, other: &Self) -> bool {
        self.n == other.n && self.length == other.length
    }

    pub(crate) fn check_same(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::ResolutionMismatch { left: self.n, right: other.n });
        }
        if self.length != other.length {
            return Err(Error::LengthMismatch {
                left: self.length.as_f64(),
                right: other.length.as_f64(),
            });
        }
        Ok(())
    }
}
