use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fft::Fft3d;

/// Side length of the periodic box along every axis.
pub const PERIOD: f64 = 2.0 * PI;

/// Uniform `N^3` collocation grid on `[0, 2pi)^3` together with its FFT plans.
///
/// Spectral arrays use FFT ordering: index `i` along an axis carries the integer
/// wavenumber `i` for `i <= N/2` and `i - N` otherwise. The plane `|k_j| = N/2`
/// (Nyquist) is kept identically zero by every field constructor, which makes
/// Hermitian symmetry well defined on the remaining modes.
#[derive(Clone, Debug)]
pub struct TorusGrid {
    n: usize,
    fft: Arc<Fft3d>,
}

impl PartialEq for TorusGrid {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n
    }
}

impl Eq for TorusGrid {}

impl TorusGrid {
    pub fn new(n: usize) -> Result<Self> {
        if n < 8 || !n.is_multiple_of(2) {
            return Err(Error::InvalidGrid(n));
        }
        Ok(Self {
            n,
            fft: Arc::new(Fft3d::new(n)),
        })
    }

    pub fn modes_per_axis(&self) -> usize {
        self.n
    }

    /// Two-thirds rule radius: modes with any `|k_j| > floor(N/3)` are dropped around products.
    pub fn dealias_cutoff(&self) -> usize {
        self.n / 3
    }

    /// Number of grid points (and of spectral slots).
    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub(crate) fn fft(&self) -> &Fft3d {
        &self.fft
    }

    pub fn ensure_same(&self, other: &TorusGrid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch {
                left: self.n,
                right: other.n,
            })
        }
    }

    #[inline]
    pub fn wavenumber(&self, i: usize) -> i64 {
        if i <= self.n / 2 {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    #[inline]
    fn axis_index(&self, k: i64) -> Option<usize> {
        let half = (self.n / 2) as i64;
        if k > -half && k <= half {
            Some(k.rem_euclid(self.n as i64) as usize)
        } else {
            None
        }
    }

    #[inline]
    pub fn split(&self, idx: usize) -> [usize; 3] {
        let n = self.n;
        [idx / (n * n), (idx / n) % n, idx % n]
    }

    #[inline]
    pub fn wavevector(&self, idx: usize) -> [i64; 3] {
        let [a, b, c] = self.split(idx);
        [self.wavenumber(a), self.wavenumber(b), self.wavenumber(c)]
    }

    /// Storage slot of a resolved wavevector `k in {-N/2+1, ..., N/2}^3`.
    pub fn index_of(&self, k: [i64; 3]) -> Option<usize> {
        let a = self.axis_index(k[0])?;
        let b = self.axis_index(k[1])?;
        let c = self.axis_index(k[2])?;
        Some((a * self.n + b) * self.n + c)
    }

    /// Slot holding `-k` for the wavevector stored at `idx`.
    #[inline]
    pub fn conjugate_index(&self, idx: usize) -> usize {
        let n = self.n;
        let [a, b, c] = self.split(idx);
        let neg = |i: usize| (n - i) % n;
        (neg(a) * n + neg(b)) * n + neg(c)
    }

    #[inline]
    pub fn k_squared(&self, idx: usize) -> f64 {
        let [a, b, c] = self.wavevector(idx);
        (a * a + b * b + c * c) as f64
    }

    #[inline]
    pub fn is_nyquist(&self, idx: usize) -> bool {
        let half = self.n / 2;
        self.split(idx).contains(&half)
    }

    #[inline]
    pub fn is_dealiased(&self, idx: usize) -> bool {
        let cut = self.dealias_cutoff() as i64;
        self.wavevector(idx).iter().all(|k| k.abs() <= cut)
    }

    /// Physical coordinates of grid point `idx`.
    pub fn point(&self, idx: usize) -> [f64; 3] {
        let h = PERIOD / self.n as f64;
        let [a, b, c] = self.split(idx);
        [a as f64 * h, b as f64 * h, c as f64 * h]
    }
}
