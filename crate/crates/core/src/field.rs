//! Zero-mean periodic fields represented by Fourier coefficients.
//!
//! Coefficients are taken against the orthonormal basis `exp(i k.x) / (2pi)^{3/2}`
//! of `L^2([0, 2pi]^3)`, so that
//!
//! ```text
//! u(x) = (2pi)^{-3/2} sum_k c_k exp(i k.x),      ||u||^2_{H_s} = sum_{k != 0} |k|^{2s} |c_k|^2
//! ```
//!
//! and the `s = 0` norm is the physical `L^2` norm over one period cell.

use std::f64::consts::PI;
use std::ops::{Add, Sub};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{check_non_negative, check_positive, Error, Result};
use crate::fft::Direction;
use crate::grid::TorusGrid;

/// `(2pi)^{3/2}`, the ratio between orthonormal and plain Fourier coefficients.
pub fn basis_scale() -> f64 {
    (2.0 * PI).powf(1.5)
}

/// Order of a Sobolev norm. Fractional and negative orders are allowed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SobolevIndex(f64);

impl SobolevIndex {
    pub fn new(s: f64) -> Result<Self> {
        if s.is_finite() {
            Ok(Self(s))
        } else {
            Err(Error::NonFinite("Sobolev index"))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl From<i32> for SobolevIndex {
    fn from(s: i32) -> Self {
        Self(s as f64)
    }
}

/// `|k|^{2s}` given `|k|^2`.
#[inline]
fn sobolev_weight(k2: f64, s: f64) -> f64 {
    if s == 0.0 {
        1.0
    } else if s == 1.0 {
        k2
    } else if s.fract() == 0.0 && s > 0.0 && s <= 8.0 {
        k2.powi(s as i32)
    } else {
        k2.powf(s)
    }
}

/// Velocity-like field: three complex coefficients per resolved wavevector.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralVectorField {
    grid: TorusGrid,
    coeffs: [Vec<Complex64>; 3],
}

/// Pressure-like field: one complex coefficient per resolved wavevector.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralScalarField {
    grid: TorusGrid,
    coeffs: Vec<Complex64>,
}

/// Real samples of a vector field at the `N^3` grid points.
#[derive(Clone, Debug, PartialEq)]
pub struct PhysicalVectorField {
    pub grid: TorusGrid,
    pub values: [Vec<f64>; 3],
}

impl PhysicalVectorField {
    pub fn max_abs(&self) -> f64 {
        let mut max = 0.0f64;
        for i in 0..self.grid.len() {
            let m = (0..3).map(|c| self.values[c][i].powi(2)).sum::<f64>().sqrt();
            max = max.max(m);
        }
        max
    }

    /// `(2pi)^3 / N^3 * sum |u(x_j)|^2`, the rectangle rule for `||u||^2`.
    pub fn l2_sq_quadrature(&self) -> f64 {
        let cell = (2.0 * PI).powi(3) / self.grid.len() as f64;
        self.values.iter().flatten().map(|v| v * v).sum::<f64>() * cell
    }
}

pub(crate) fn spectral_to_physical(grid: &TorusGrid, coeffs: &[Complex64]) -> Vec<f64> {
    let mut buf = coeffs.to_vec();
    grid.fft().process(&mut buf, Direction::Inverse);
    let scale = 1.0 / basis_scale();
    buf.iter().map(|c| c.re * scale).collect()
}

pub(crate) fn physical_to_spectral(grid: &TorusGrid, values: &[f64]) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    grid.fft().process(&mut buf, Direction::Forward);
    let scale = basis_scale() / grid.len() as f64;
    for c in buf.iter_mut() {
        *c *= scale;
    }
    buf
}

/// Zeroes the mean and Nyquist planes and averages each coefficient with the
/// conjugate of its mirror, so the result is exactly Hermitian.
fn symmetrize(grid: &TorusGrid, coeffs: &mut [Complex64]) {
    for idx in 0..grid.len() {
        if idx == 0 || grid.is_nyquist(idx) {
            coeffs[idx] = Complex64::default();
            continue;
        }
        let mirror = grid.conjugate_index(idx);
        if idx < mirror {
            let avg = 0.5 * (coeffs[idx] + coeffs[mirror].conj());
            coeffs[idx] = avg;
            coeffs[mirror] = avg.conj();
        }
    }
}

impl SpectralVectorField {
    pub fn zeros(grid: &TorusGrid) -> Self {
        let n = grid.len();
        Self {
            grid: grid.clone(),
            coeffs: [
                vec![Complex64::default(); n],
                vec![Complex64::default(); n],
                vec![Complex64::default(); n],
            ],
        }
    }

    pub(crate) fn from_components(grid: &TorusGrid, coeffs: [Vec<Complex64>; 3]) -> Self {
        debug_assert!(coeffs.iter().all(|c| c.len() == grid.len()));
        Self {
            grid: grid.clone(),
            coeffs,
        }
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn component(&self, c: usize) -> &[Complex64] {
        &self.coeffs[c]
    }

    pub(crate) fn component_mut(&mut self, c: usize) -> &mut [Complex64] {
        &mut self.coeffs[c]
    }

    pub(crate) fn components_mut(&mut self) -> &mut [Vec<Complex64>; 3] {
        &mut self.coeffs
    }

    #[inline]
    pub fn at(&self, idx: usize) -> [Complex64; 3] {
        [self.coeffs[0][idx], self.coeffs[1][idx], self.coeffs[2][idx]]
    }

    /// Coefficient vector at a resolved wavevector.
    pub fn coeff(&self, k: [i64; 3]) -> Option<[Complex64; 3]> {
        self.grid.index_of(k).map(|idx| self.at(idx))
    }

    /// Sets `c(k) = value` and `c(-k) = conj(value)`.
    ///
    /// Panics on `k = 0`, on Nyquist wavevectors and outside the resolved range.
    pub fn set_mode(&mut self, k: [i64; 3], value: [Complex64; 3]) {
        let idx = self
            .grid
            .index_of(k)
            .filter(|&i| i != 0 && !self.grid.is_nyquist(i))
            .unwrap_or_else(|| panic!("wavevector {k:?} cannot carry a zero-mean Hermitian mode"));
        let mirror = self.grid.conjugate_index(idx);
        for c in 0..3 {
            self.coeffs[c][idx] = value[c];
            self.coeffs[c][mirror] = value[c].conj();
        }
    }

    /// Real shear wave `amplitude * cos(k.x)`; solenoidal when `amplitude . k = 0`.
    pub fn cosine_mode(grid: &TorusGrid, k: [i64; 3], amplitude: [f64; 3]) -> Self {
        let mut field = Self::zeros(grid);
        let s = 0.5 * basis_scale();
        field.set_mode(k, amplitude.map(|a| Complex64::new(a * s, 0.0)));
        field
    }

    /// `amplitude * (sin x cos y cos z, -cos x sin y cos z, 0)`.
    pub fn taylor_green(grid: &TorusGrid, amplitude: f64) -> Self {
        let mut field = Self::zeros(grid);
        let s = amplitude * basis_scale() / 8.0;
        for sx in [-1i64, 1] {
            for sy in [-1i64, 1] {
                for sz in [-1i64, 1] {
                    let idx = grid.index_of([sx, sy, sz]).expect("resolved");
                    field.coeffs[0][idx] = Complex64::new(0.0, -(sx as f64) * s);
                    field.coeffs[1][idx] = Complex64::new(0.0, sy as f64 * s);
                }
            }
        }
        field
    }

    /// Solenoidal random field with `|c_k| = |k|^{-decay}` on every non-Nyquist
    /// mode and seeded uniformly random polarization and phases.
    pub fn random(grid: &TorusGrid, decay: f64, seed: u64) -> Result<Self> {
        if !(decay.is_finite() && decay > 1.5) {
            return Err(Error::InvalidParameter {
                name: "decay",
                constraint: "> 3/2",
                value: decay,
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut field = Self::zeros(grid);
        for idx in 1..grid.len() {
            let mirror = grid.conjugate_index(idx);
            if grid.is_nyquist(idx) || idx > mirror {
                continue;
            }
            let k = grid.wavevector(idx).map(|v| v as f64);
            let (e1, e2) = transverse_basis(k);
            let theta: f64 = rng.gen::<f64>() * 2.0 * PI;
            let phi1: f64 = rng.gen::<f64>() * 2.0 * PI;
            let phi2: f64 = rng.gen::<f64>() * 2.0 * PI;
            let amp = grid.k_squared(idx).powf(-0.5 * decay);
            let z1 = Complex64::from_polar(amp * theta.cos(), phi1);
            let z2 = Complex64::from_polar(amp * theta.sin(), phi2);
            for c in 0..3 {
                let v = z1 * e1[c] + z2 * e2[c];
                field.coeffs[c][idx] = v;
                field.coeffs[c][mirror] = v.conj();
            }
        }
        Ok(field)
    }

    /// Rescales so that `||self||_{H_s} = target`. A zero field is returned unchanged.
    pub fn normalized(&self, s: impl Into<SobolevIndex>, target: f64) -> Self {
        let norm = self.sobolev_norm(s);
        if norm == 0.0 {
            self.clone()
        } else {
            self.scaled(target / norm)
        }
    }

    pub fn sobolev_norm(&self, s: impl Into<SobolevIndex>) -> f64 {
        self.sobolev_norm_sq(s).sqrt()
    }

    pub fn sobolev_norm_sq(&self, s: impl Into<SobolevIndex>) -> f64 {
        let s = s.into().value();
        let mut acc = 0.0;
        for idx in 1..self.grid.len() {
            let m = self.coeffs[0][idx].norm_sqr() + self.coeffs[1][idx].norm_sqr() + self.coeffs[2][idx].norm_sqr();
            if m != 0.0 {
                acc += sobolev_weight(self.grid.k_squared(idx), s) * m;
            }
        }
        acc
    }

    /// `Re sum |k|^{2s} a_k . conj(b_k)`.
    pub fn sobolev_inner(&self, other: &Self, s: impl Into<SobolevIndex>) -> Result<f64> {
        self.grid.ensure_same(&other.grid)?;
        let s = s.into().value();
        let mut acc = 0.0;
        for idx in 1..self.grid.len() {
            let dot: f64 = (0..3)
                .map(|c| (self.coeffs[c][idx] * other.coeffs[c][idx].conj()).re)
                .sum();
            if dot != 0.0 {
                acc += sobolev_weight(self.grid.k_squared(idx), s) * dot;
            }
        }
        Ok(acc)
    }

    /// `max_k |k . c_k|`.
    pub fn max_divergence(&self) -> f64 {
        let mut max = 0.0f64;
        for idx in 1..self.grid.len() {
            let k = self.grid.wavevector(idx);
            let d = (0..3).map(|c| self.coeffs[c][idx] * k[c] as f64).sum::<Complex64>();
            max = max.max(d.norm());
        }
        max
    }

    /// Checks `max_k |k . c_k| <= rel_tol * ||self||_{H_0}`.
    pub fn ensure_solenoidal(&self, rel_tol: f64) -> Result<()> {
        let max_divergence = self.max_divergence();
        let tolerance = rel_tol * self.sobolev_norm(0);
        if max_divergence <= tolerance {
            Ok(())
        } else {
            Err(Error::NotSolenoidal {
                max_divergence,
                tolerance,
            })
        }
    }

    /// Largest violation of `c(-k) = conj(c(k))` plus the magnitude of the mean
    /// and of any Nyquist content.
    pub fn symmetry_defect(&self) -> f64 {
        let mut max = 0.0f64;
        for idx in 0..self.grid.len() {
            for c in 0..3 {
                let v = self.coeffs[c][idx];
                let d = if idx == 0 || self.grid.is_nyquist(idx) {
                    v.norm()
                } else {
                    (self.coeffs[c][self.grid.conjugate_index(idx)] - v.conj()).norm()
                };
                max = max.max(d);
            }
        }
        max
    }

    fn map_modes(&self, mut f: impl FnMut(usize, [Complex64; 3]) -> [Complex64; 3]) -> Self {
        let mut out = Self::zeros(&self.grid);
        for idx in 1..self.grid.len() {
            let v = f(idx, self.at(idx));
            for c in 0..3 {
                out.coeffs[c][idx] = v[c];
            }
        }
        out
    }

    fn map_real_multiplier(&self, f: impl Fn(usize) -> f64) -> Self {
        self.map_modes(|idx, v| {
            let m = f(idx);
            v.map(|x| x * m)
        })
    }

    /// Per-mode projector `I - k k^T / |k|^2` onto divergence-free fields.
    pub fn leray_project(&self) -> Self {
        let grid = &self.grid;
        self.map_modes(|idx, v| {
            let k = grid.wavevector(idx).map(|x| x as f64);
            let k2 = grid.k_squared(idx);
            let kv = (0..3).map(|c| v[c] * k[c]).sum::<Complex64>() / k2;
            [v[0] - kv * k[0], v[1] - kv * k[1], v[2] - kv * k[2]]
        })
    }

    /// Solves `(I - alpha^2 Delta) w = self`, i.e. divides by `1 + alpha^2 |k|^2`.
    pub fn helmholtz_invert(&self, alpha: f64) -> Result<Self> {
        check_non_negative("alpha", alpha)?;
        let a2 = alpha * alpha;
        Ok(self.map_real_multiplier(|idx| 1.0 / (1.0 + a2 * self.grid.k_squared(idx))))
    }

    /// Applies `I - alpha^2 Delta` (multiplier `1 + alpha^2 |k|^2`).
    pub fn helmholtz_apply(&self, alpha: f64) -> Result<Self> {
        check_non_negative("alpha", alpha)?;
        let a2 = alpha * alpha;
        Ok(self.map_real_multiplier(|idx| 1.0 + a2 * self.grid.k_squared(idx)))
    }

    /// `Lambda^s = (-Delta)^{s/2}`, multiplier `|k|^s`.
    pub fn fractional_laplacian(&self, s: f64) -> Self {
        self.map_real_multiplier(|idx| sobolev_weight(self.grid.k_squared(idx), 0.5 * s))
    }

    /// Keeps exactly the modes with `|k| < 1/delta`.
    pub fn truncate_filter(&self, delta: f64) -> Result<Self> {
        check_positive("delta", delta)?;
        let cutoff = 1.0 / delta;
        Ok(self.map_modes(|idx, v| {
            if self.grid.k_squared(idx).sqrt() < cutoff {
                v
            } else {
                [Complex64::default(); 3]
            }
        }))
    }

    /// Zeroes every mode outside the two-thirds-rule cube.
    pub fn dealiased(&self) -> Self {
        self.map_modes(|idx, v| {
            if self.grid.is_dealiased(idx) {
                v
            } else {
                [Complex64::default(); 3]
            }
        })
    }

    pub fn scaled(&self, factor: f64) -> Self {
        self.map_modes(|_, v| v.map(|x| x * factor))
    }

    /// `self += factor * other`.
    pub fn add_scaled(&mut self, factor: f64, other: &Self) {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        for c in 0..3 {
            for (a, b) in self.coeffs[c].iter_mut().zip(&other.coeffs[c]) {
                *a += b * factor;
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs
            .iter()
            .flatten()
            .all(|c| c.re.is_finite() && c.im.is_finite())
    }

    pub fn to_physical(&self) -> PhysicalVectorField {
        let values: Vec<Vec<f64>> = (0..3)
            .into_par_iter()
            .map(|c| spectral_to_physical(&self.grid, &self.coeffs[c]))
            .collect();
        let [a, b, c]: [Vec<f64>; 3] = values.try_into().expect("three components");
        PhysicalVectorField {
            grid: self.grid.clone(),
            values: [a, b, c],
        }
    }

    /// Inverse of [`to_physical`](Self::to_physical). Drops the mean and the
    /// Nyquist planes and enforces Hermitian symmetry.
    pub fn from_physical(samples: &PhysicalVectorField) -> Result<Self> {
        for v in &samples.values {
            if v.len() != samples.grid.len() {
                return Err(Error::InvalidParameter {
                    name: "samples",
                    constraint: "of length N^3",
                    value: v.len() as f64,
                });
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite("physical samples"));
            }
        }
        let grid = &samples.grid;
        let coeffs: Vec<Vec<Complex64>> = (0..3)
            .into_par_iter()
            .map(|c| {
                let mut out = physical_to_spectral(grid, &samples.values[c]);
                symmetrize(grid, &mut out);
                out
            })
            .collect();
        let [a, b, c]: [Vec<Complex64>; 3] = coeffs.try_into().expect("three components");
        Ok(Self::from_components(grid, [a, b, c]))
    }
}

impl Add for &SpectralVectorField {
    type Output = SpectralVectorField;

    fn add(self, rhs: &SpectralVectorField) -> SpectralVectorField {
        let mut out = self.clone();
        out.add_scaled(1.0, rhs);
        out
    }
}

impl Sub for &SpectralVectorField {
    type Output = SpectralVectorField;

    fn sub(self, rhs: &SpectralVectorField) -> SpectralVectorField {
        let mut out = self.clone();
        out.add_scaled(-1.0, rhs);
        out
    }
}

/// Orthonormal pair spanning the plane perpendicular to `k`.
fn transverse_basis(k: [f64; 3]) -> ([f64; 3], [f64; 3]) {
    let abs = k.map(f64::abs);
    let helper = if abs[0] <= abs[1] && abs[0] <= abs[2] {
        [1.0, 0.0, 0.0]
    } else if abs[1] <= abs[2] {
        [0.0, 1.0, 0.0]
    } else {
        [0.0, 0.0, 1.0]
    };
    let e1 = normalize(cross(helper, k));
    let e2 = normalize(cross(k, e1));
    (e1, e2)
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn normalize(a: [f64; 3]) -> [f64; 3] {
    let n = (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
    a.map(|x| x / n)
}

impl SpectralScalarField {
    pub fn zeros(grid: &TorusGrid) -> Self {
        Self {
            grid: grid.clone(),
            coeffs: vec![Complex64::default(); grid.len()],
        }
    }

    pub(crate) fn from_coeffs(grid: &TorusGrid, coeffs: Vec<Complex64>) -> Self {
        debug_assert_eq!(coeffs.len(), grid.len());
        Self {
            grid: grid.clone(),
            coeffs,
        }
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeff(&self, k: [i64; 3]) -> Option<Complex64> {
        self.grid.index_of(k).map(|idx| self.coeffs[idx])
    }

    pub fn sobolev_norm(&self, s: impl Into<SobolevIndex>) -> f64 {
        let s = s.into().value();
        (1..self.grid.len())
            .map(|idx| sobolev_weight(self.grid.k_squared(idx), s) * self.coeffs[idx].norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn symmetry_defect(&self) -> f64 {
        (0..self.grid.len())
            .map(|idx| {
                let v = self.coeffs[idx];
                if idx == 0 || self.grid.is_nyquist(idx) {
                    v.norm()
                } else {
                    (self.coeffs[self.grid.conjugate_index(idx)] - v.conj()).norm()
                }
            })
            .fold(0.0, f64::max)
    }

    /// `grad p` as a vector field (multiplier `i k`).
    pub fn gradient(&self) -> SpectralVectorField {
        let mut out = SpectralVectorField::zeros(&self.grid);
        for idx in 1..self.grid.len() {
            let k = self.grid.wavevector(idx);
            let ip = Complex64::i() * self.coeffs[idx];
            for c in 0..3 {
                out.component_mut(c)[idx] = ip * k[c] as f64;
            }
        }
        out
    }

    pub fn to_physical(&self) -> Vec<f64> {
        spectral_to_physical(&self.grid, &self.coeffs)
    }

    pub fn from_physical(grid: &TorusGrid, samples: &[f64]) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::InvalidParameter {
                name: "samples",
                constraint: "of length N^3",
                value: samples.len() as f64,
            });
        }
        if samples.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("physical samples"));
        }
        let mut coeffs = physical_to_spectral(grid, samples);
        symmetrize(grid, &mut coeffs);
        Ok(Self::from_coeffs(grid, coeffs))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid(n: usize) -> TorusGrid {
        TorusGrid::new(n).unwrap()
    }

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn unit_pair(g: &TorusGrid, k: [i64; 3], v: [f64; 3]) -> SpectralVectorField {
        let mut f = SpectralVectorField::zeros(g);
        f.set_mode(k, v.map(c));
        f
    }

    /// Brute-force triple loop over signed wavevectors, independent of storage order.
    fn oracle_norm_sq(f: &SpectralVectorField, s: f64) -> f64 {
        let g = f.grid();
        let half = (g.modes_per_axis() / 2) as i64;
        let mut acc = 0.0;
        for a in (-half + 1)..=half {
            for b in (-half + 1)..=half {
                for d in (-half + 1)..=half {
                    if a == 0 && b == 0 && d == 0 {
                        continue;
                    }
                    let k2 = (a * a + b * b + d * d) as f64;
                    let v = f.coeff([a, b, d]).unwrap();
                    acc += k2.powf(s) * v.iter().map(|x| x.norm_sqr()).sum::<f64>();
                }
            }
        }
        acc
    }

    #[test]
    fn unit_pair_norm_is_sqrt_two_for_every_order() {
        let g = grid(8);
        let f = unit_pair(&g, [1, 0, 0], [0.0, 1.0, 0.0]);
        for s in [-1.5, 0.0, 0.5, 1.0, 3.0, 4.0] {
            assert!((f.sobolev_norm(SobolevIndex::new(s).unwrap()) - 2f64.sqrt()).abs() < 1e-14);
        }
    }

    #[test]
    fn h2_norm_of_pair_at_k210() {
        let g = grid(8);
        let f = unit_pair(&g, [2, 1, 0], [0.0, 0.0, 1.0]);
        assert!((f.sobolev_norm(2) - 50f64.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn norms_match_summation_oracle() {
        let g = grid(16);
        let f = SpectralVectorField::random(&g, 2.0, 7).unwrap();
        for s in [0.0, 1.0, 1.75, 3.0] {
            let got = f.sobolev_norm_sq(SobolevIndex::new(s).unwrap());
            let expected = oracle_norm_sq(&f, s);
            assert!(((got - expected) / expected).abs() < 1e-12, "s={s}");
        }
    }

    #[test]
    fn inner_products() {
        let g = grid(16);
        let a = unit_pair(&g, [1, 0, 0], [0.0, 1.0, 0.0]);
        assert!((a.sobolev_inner(&a, 0).unwrap() - 2.0).abs() < 1e-15);
        let b = unit_pair(&g, [0, 2, 0], [1.0, 0.0, 0.0]);
        assert_eq!(a.sobolev_inner(&b, 1).unwrap(), 0.0);

        let x = SpectralVectorField::random(&g, 2.5, 1).unwrap();
        let y = SpectralVectorField::random(&g, 2.5, 2).unwrap();
        let mut expected = 0.0;
        let half = 8i64;
        for p in -half + 1..=half {
            for q in -half + 1..=half {
                for r in -half + 1..=half {
                    if (p, q, r) == (0, 0, 0) {
                        continue;
                    }
                    let (u, v) = (x.coeff([p, q, r]).unwrap(), y.coeff([p, q, r]).unwrap());
                    let k6 = ((p * p + q * q + r * r) as f64).powi(3);
                    expected += k6 * (0..3).map(|i| (u[i] * v[i].conj()).re).sum::<f64>();
                }
            }
        }
        let got = x.sobolev_inner(&y, 3).unwrap();
        assert!(((got - expected) / expected).abs() < 1e-12);
        assert!((x.sobolev_inner(&x, 3).unwrap() - x.sobolev_norm_sq(3)).abs() <= 1e-12 * x.sobolev_norm_sq(3));

        let other = SpectralVectorField::zeros(&grid(8));
        assert!(matches!(x.sobolev_inner(&other, 0), Err(Error::GridMismatch { .. })));
    }

    #[test]
    fn leray_examples() {
        let g = grid(8);
        let gradient = unit_pair(&g, [1, 2, -1], [1.0, 2.0, -1.0]);
        assert!(gradient.leray_project().sobolev_norm(0) < 1e-15);

        let f = unit_pair(&g, [1, 0, 0], [1.0, 1.0, 0.0]);
        let p = f.leray_project().coeff([1, 0, 0]).unwrap();
        assert_eq!(p, [c(0.0), c(1.0), c(0.0)]);

        let r = SpectralVectorField::random(&g, 2.0, 3).unwrap();
        let diff = (&r.leray_project() - &r).sobolev_norm(0);
        assert!(diff <= 1e-15 * r.sobolev_norm(0));
    }

    #[test]
    fn helmholtz_examples() {
        let g = grid(8);
        let f = SpectralVectorField::random(&g, 2.0, 4).unwrap();
        assert_eq!(f.helmholtz_invert(0.0).unwrap(), f);
        let pair = unit_pair(&g, [0, 0, 1], [1.0, 0.0, 0.0]);
        assert_eq!(pair.helmholtz_invert(1.0).unwrap().coeff([0, 0, 1]).unwrap()[0], c(0.5));
        let back = f.helmholtz_invert(0.7).unwrap().helmholtz_apply(0.7).unwrap();
        assert!((&back - &f).sobolev_norm(0) <= 1e-14 * f.sobolev_norm(0));
        assert!(matches!(
            f.helmholtz_invert(-1.0),
            Err(Error::InvalidParameter { name: "alpha", .. })
        ));
    }

    #[test]
    fn fractional_laplacian_examples() {
        let g = grid(8);
        let f = SpectralVectorField::random(&g, 2.0, 5).unwrap();
        assert_eq!(f.fractional_laplacian(0.0), f);
        let pair = unit_pair(&g, [2, 0, 0], [0.0, 1.0, 0.0]);
        assert_eq!(pair.fractional_laplacian(2.0).coeff([2, 0, 0]).unwrap()[1], c(4.0));
        let back = f.fractional_laplacian(1.3).fractional_laplacian(-1.3);
        assert!((&back - &f).sobolev_norm(0) <= 1e-14 * f.sobolev_norm(0));
        let s = 1.7;
        let lhs = f.sobolev_norm(SobolevIndex::new(s).unwrap());
        let rhs = f.fractional_laplacian(s).sobolev_norm(0);
        assert!((lhs - rhs).abs() <= 1e-13 * lhs);
    }

    #[test]
    fn truncate_filter_examples() {
        let g = grid(8);
        let mut f = unit_pair(&g, [1, 0, 0], [0.0, 1.0, 0.0]);
        f.set_mode([0, 3, 0], [c(1.0), c(0.0), c(0.0)]);
        let kept = f.truncate_filter(0.5).unwrap();
        assert_eq!(kept.coeff([1, 0, 0]).unwrap()[1], c(1.0));
        assert_eq!(kept.coeff([0, 3, 0]).unwrap()[0], c(0.0));
        // |k| = 2 sits on the cutoff and is excluded.
        let edge = unit_pair(&g, [2, 0, 0], [0.0, 1.0, 0.0]);
        assert_eq!(edge.truncate_filter(0.5).unwrap().sobolev_norm(0), 0.0);

        let r = SpectralVectorField::random(&g, 2.0, 6).unwrap();
        assert_eq!(r.truncate_filter(1e-9).unwrap(), r);
        assert!(r.truncate_filter(0.0).is_err());
        assert!(r.truncate_filter(-1.0).is_err());
    }

    #[test]
    fn filter_tail_matches_direct_summation() {
        let g = grid(16);
        // |c_k| = |k|^-5 exactly.
        let f = SpectralVectorField::random(&g, 5.0, 9).unwrap();
        for delta in [0.5, 0.25, 0.2] {
            for s in [0.0, 1.0, 2.0] {
                let got = (&f.truncate_filter(delta).unwrap() - &f).sobolev_norm_sq(SobolevIndex::new(s).unwrap());
                let mut expected = 0.0;
                let half = 8i64;
                for p in -half + 1..half {
                    for q in -half + 1..half {
                        for r in -half + 1..half {
                            let k2 = (p * p + q * q + r * r) as f64;
                            if k2 > 0.0 && k2.sqrt() >= 1.0 / delta {
                                expected += k2.powf(s) * k2.powf(-5.0);
                            }
                        }
                    }
                }
                assert!(((got - expected) / expected).abs() < 1e-12, "delta={delta} s={s}");
            }
        }
    }

    #[test]
    fn physical_roundtrip_and_cosine() {
        let g = grid(16);
        let f = SpectralVectorField::cosine_mode(&g, [1, 2, 0], [0.0, 0.0, 1.0]);
        let phys = f.to_physical();
        for idx in 0..g.len() {
            let x = g.point(idx);
            let expected = (x[0] + 2.0 * x[1]).cos();
            assert!((phys.values[2][idx] - expected).abs() < 1e-13);
            assert!(phys.values[0][idx].abs() < 1e-15);
        }

        let r = SpectralVectorField::random(&g, 2.0, 10).unwrap();
        let back = SpectralVectorField::from_physical(&r.to_physical()).unwrap();
        assert!((&back - &r).sobolev_norm(0) <= 1e-13 * r.sobolev_norm(0));
    }

    #[test]
    fn parseval_against_quadrature() {
        let g = grid(16);
        let r = SpectralVectorField::random(&g, 2.0, 11).unwrap();
        let phys = r.to_physical();
        let mean_sq = phys.values.iter().flatten().map(|v| v * v).sum::<f64>() / g.len() as f64;
        let expected = r.sobolev_norm_sq(0) / (2.0 * PI).powi(3);
        assert!(((mean_sq - expected) / expected).abs() < 1e-12);
    }

    #[test]
    fn from_physical_rejects_non_finite() {
        let g = grid(8);
        let mut phys = SpectralVectorField::zeros(&g).to_physical();
        phys.values[1][5] = f64::NAN;
        assert!(matches!(
            SpectralVectorField::from_physical(&phys),
            Err(Error::NonFinite(_))
        ));
    }

    #[test]
    fn from_physical_removes_mean() {
        let g = grid(8);
        let mut phys = SpectralVectorField::cosine_mode(&g, [1, 0, 0], [0.0, 1.0, 0.0]).to_physical();
        phys.values[0].iter_mut().for_each(|v| *v += 3.0);
        let f = SpectralVectorField::from_physical(&phys).unwrap();
        assert_eq!(f.at(0), [c(0.0); 3]);
        assert!(f.symmetry_defect() == 0.0);
    }

    #[test]
    fn random_field_properties() {
        let g = grid(16);
        let a = SpectralVectorField::random(&g, 5.0, 42).unwrap();
        let b = SpectralVectorField::random(&g, 5.0, 42).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, SpectralVectorField::random(&g, 5.0, 43).unwrap());
        assert!((&a.leray_project() - &a).sobolev_norm(0) <= 1e-14 * a.sobolev_norm(0));
        assert_eq!(a.symmetry_defect(), 0.0);
        // H_3 norm squared: sum over modes of |k|^6 |k|^-10 = sum |k|^-4.
        let mut oracle = 0.0;
        for p in -7i64..8 {
            for q in -7i64..8 {
                for r in -7i64..8 {
                    let k2 = (p * p + q * q + r * r) as f64;
                    if k2 > 0.0 {
                        oracle += k2.powi(-2);
                    }
                }
            }
        }
        assert!((a.sobolev_norm_sq(3) - oracle).abs() < 1e-12 * oracle);
        assert!(SpectralVectorField::random(&g, 1.5, 1).is_err());
    }

    #[test]
    fn taylor_green_properties() {
        let g = grid(16);
        let amp = 1.7;
        let tg = SpectralVectorField::taylor_green(&g, amp);
        assert!(tg.max_divergence() < 1e-14);
        let expected = amp * amp * (2.0 * PI).powi(3) / 4.0;
        assert!((tg.sobolev_norm_sq(0) - expected).abs() < 1e-12 * expected);
        let phys = tg.to_physical();
        assert!((phys.l2_sq_quadrature() - expected).abs() < 1e-12 * expected);
        for idx in 0..g.len() {
            let [x, y, z] = g.point(idx);
            assert!((phys.values[0][idx] - amp * x.sin() * y.cos() * z.cos()).abs() < 1e-13);
            assert!((phys.values[1][idx] + amp * x.cos() * y.sin() * z.cos()).abs() < 1e-13);
            assert_eq!(phys.values[2][idx], 0.0);
        }
    }

    #[test]
    fn gradient_norm_matches_physical_derivative() {
        let g = grid(16);
        let f = SpectralVectorField::random(&g, 3.0, 12).unwrap();
        // Differentiate in spectral space component by component, then take the
        // physical L^2 norm of the nine derivative fields by quadrature.
        let mut physical = 0.0;
        for axis in 0..3 {
            let mut d = SpectralVectorField::zeros(&g);
            for idx in 0..g.len() {
                let k = g.wavevector(idx)[axis] as f64;
                for comp in 0..3 {
                    d.component_mut(comp)[idx] = Complex64::i() * k * f.component(comp)[idx];
                }
            }
            physical += d.to_physical().l2_sq_quadrature();
        }
        let spectral = f.sobolev_norm_sq(1);
        assert!(((physical - spectral) / spectral).abs() < 1e-11);
    }

    #[test]
    fn filter_bounds_hold_with_unit_constant() {
        let g = grid(16);
        let f = SpectralVectorField::random(&g, 4.0, 13).unwrap().normalized(3, 1.0);
        let h3 = f.sobolev_norm(3);
        for delta in [0.9, 0.5, 0.3, 0.21, 0.1, 0.05] {
            let fd = f.truncate_filter(delta).unwrap();
            assert!(fd.sobolev_norm(3) <= h3);
            assert!(fd.sobolev_norm(4) <= h3 / delta);
            for s in [0.0, 0.5, 1.0, 2.0, 2.9] {
                let tail = (&fd - &f).sobolev_norm(SobolevIndex::new(s).unwrap());
                assert!(tail <= delta.powf(3.0 - s) * h3, "delta={delta} s={s}");
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn operations_preserve_symmetry(seed in any::<u64>(), alpha in 0.0f64..3.0, s in -2.0f64..3.0, delta in 0.05f64..2.0) {
            let g = grid(8);
            // A non-solenoidal Hermitian input exercises the projector properly.
            let mut phys = SpectralVectorField::random(&g, 2.0, seed).unwrap().to_physical();
            for (i, v) in phys.values[0].iter_mut().enumerate() {
                *v += (g.point(i)[0]).sin();
            }
            let w = SpectralVectorField::from_physical(&phys).unwrap();
            let p = w.leray_project();
            let outputs = [
                p.clone(),
                w.helmholtz_invert(alpha).unwrap(),
                w.fractional_laplacian(s),
                w.truncate_filter(delta).unwrap(),
                w.dealiased(),
            ];
            for out in &outputs {
                prop_assert!(out.symmetry_defect() <= 1e-15 * w.sobolev_norm(0));
            }
            prop_assert!(p.max_divergence() <= 1e-12 * w.sobolev_norm(0));
            let pp = p.leray_project();
            prop_assert!((&pp - &p).sobolev_norm(0) <= 1e-13 * w.sobolev_norm(0));
            let filtered = w.truncate_filter(delta).unwrap();
            prop_assert_eq!(filtered.truncate_filter(delta).unwrap(), filtered);
        }

        #[test]
        fn helmholtz_is_a_contraction(seed in any::<u64>(), alpha in 0.0f64..2.0, s in -1.0f64..4.0) {
            let g = grid(8);
            let w = SpectralVectorField::random(&g, 2.0, seed).unwrap();
            let s = SobolevIndex::new(s).unwrap();
            let out = w.helmholtz_invert(alpha).unwrap().sobolev_norm(s);
            let inp = w.sobolev_norm(s);
            if alpha == 0.0 {
                prop_assert_eq!(out, inp);
            } else {
                prop_assert!(out < inp);
            }
        }
    }
}
