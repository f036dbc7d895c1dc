//! Right-hand side of the unified Voigt-regularized model.
//!
//! Per mode the projected system reads
//!
//! ```text
//! (1 + alpha^2 |k|^2) d/dt u_k = -nu |k|^2 u_k - P_k [ (u . grad) u ]_k + f_k(t)
//! ```
//!
//! with `P_k = I - k k^T / |k|^2`. Euler is `alpha = nu = 0`, Euler-Voigt is
//! `nu = 0`, Navier-Stokes is `alpha = 0`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{check_non_negative, Error, Result};
use crate::field::{physical_to_spectral, spectral_to_physical, SpectralScalarField, SpectralVectorField};
use crate::grid::TorusGrid;

/// Relative divergence tolerance applied to user-supplied "solenoidal" inputs.
pub const SOLENOIDAL_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelParams {
    alpha: f64,
    nu: f64,
}

impl ModelParams {
    pub const EULER: ModelParams = ModelParams { alpha: 0.0, nu: 0.0 };

    pub fn new(alpha: f64, nu: f64) -> Result<Self> {
        check_non_negative("alpha", alpha)?;
        check_non_negative("nu", nu)?;
        Ok(Self { alpha, nu })
    }

    pub fn euler_voigt(alpha: f64) -> Result<Self> {
        Self::new(alpha, 0.0)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    /// `1 + alpha^2 |k|^2`
    #[inline]
    pub fn voigt_factor(&self, k2: f64) -> f64 {
        1.0 + self.alpha * self.alpha * k2
    }
}

/// Single Fourier-mode forcing `f_k(t) = amplitude * exp(i omega t)` (and its
/// conjugate at `-k`). The amplitude is an orthonormal-basis coefficient, so the
/// physical force is `(2pi)^{-3/2} * 2 Re(amplitude exp(i(k.x + omega t)))`.
#[derive(Clone, Debug, PartialEq)]
pub struct ModalForcing {
    pub mode: [i64; 3],
    pub amplitude: [Complex64; 3],
    pub omega: f64,
}

impl ModalForcing {
    pub fn new(mode: [i64; 3], amplitude: [Complex64; 3], omega: f64) -> Result<Self> {
        if mode == [0, 0, 0] {
            return Err(Error::InvalidStudy("forcing mode must be non-zero".into()));
        }
        if !omega.is_finite() || amplitude.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::NonFinite("modal forcing"));
        }
        let dot: Complex64 = (0..3).map(|c| amplitude[c] * mode[c] as f64).sum();
        let norm = amplitude.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        let k = (mode.iter().map(|k| (k * k) as f64).sum::<f64>()).sqrt();
        if dot.norm() > SOLENOIDAL_TOL * norm * k {
            return Err(Error::NotSolenoidal {
                max_divergence: dot.norm(),
                tolerance: SOLENOIDAL_TOL * norm * k,
            });
        }
        Ok(Self { mode, amplitude, omega })
    }

    pub fn period(&self) -> f64 {
        2.0 * PI / self.omega.abs()
    }

    fn k_squared(&self) -> f64 {
        self.mode.iter().map(|k| (k * k) as f64).sum()
    }

    #[inline]
    fn value(&self, t: f64) -> [Complex64; 3] {
        let phase = Complex64::from_polar(1.0, self.omega * t);
        self.amplitude.map(|a| a * phase)
    }
}

/// External force `f(t)`; every variant is zero-mean and solenoidal.
#[derive(Clone, Debug, Default)]
pub enum ForcingSpec {
    #[default]
    None,
    Steady(SpectralVectorField),
    ModalPeriodic(ModalForcing),
    Manufactured(Arc<ManufacturedForcing>),
}

impl ForcingSpec {
    pub fn is_none(&self) -> bool {
        matches!(self, ForcingSpec::None)
    }

    pub fn validate(&self, grid: &TorusGrid) -> Result<()> {
        match self {
            ForcingSpec::None => Ok(()),
            ForcingSpec::Steady(f) => {
                grid.ensure_same(f.grid())?;
                f.ensure_solenoidal(SOLENOIDAL_TOL)
            }
            ForcingSpec::ModalPeriodic(m) => match grid.index_of(m.mode) {
                Some(idx) if !grid.is_nyquist(idx) => Ok(()),
                _ => Err(Error::InvalidStudy(format!(
                    "forcing mode {:?} is not resolved on a {}^3 grid",
                    m.mode,
                    grid.modes_per_axis()
                ))),
            },
            ForcingSpec::Manufactured(m) => grid.ensure_same(&m.grid),
        }
    }

    /// `target += factor * f(t)`
    pub fn accumulate(&self, t: f64, factor: f64, target: &mut SpectralVectorField) {
        match self {
            ForcingSpec::None => {}
            ForcingSpec::Steady(f) => target.add_scaled(factor, f),
            ForcingSpec::ModalPeriodic(m) => {
                let grid = target.grid().clone();
                let idx = grid.index_of(m.mode).expect("validated forcing mode");
                let mirror = grid.conjugate_index(idx);
                let v = m.value(t);
                for (c, vc) in v.iter().enumerate() {
                    let comp = target.component_mut(c);
                    comp[idx] += vc * factor;
                    comp[mirror] += vc.conj() * factor;
                }
            }
            ForcingSpec::Manufactured(m) => m.accumulate(t, factor, target),
        }
    }

    pub fn evaluate(&self, grid: &TorusGrid, t: f64) -> SpectralVectorField {
        let mut out = SpectralVectorField::zeros(grid);
        self.accumulate(t, 1.0, &mut out);
        out
    }

    /// `(f(t), u)` in `L^2`.
    pub fn inner(&self, t: f64, u: &SpectralVectorField) -> f64 {
        match self {
            ForcingSpec::None => 0.0,
            ForcingSpec::ModalPeriodic(m) => {
                let idx = u.grid().index_of(m.mode).expect("validated forcing mode");
                let v = m.value(t);
                let w = u.at(idx);
                // The mirror mode contributes the same real part.
                2.0 * (0..3).map(|c| (v[c] * w[c].conj()).re).sum::<f64>()
            }
            _ => self
                .evaluate(u.grid(), t)
                .sobolev_inner(u, 0)
                .expect("forcing validated on this grid"),
        }
    }

    /// `||f(t)||^2_{H_{-1}} = sum |f_k|^2 / |k|^2`.
    pub fn h_minus1_sq(&self, grid: &TorusGrid, t: f64) -> f64 {
        match self {
            ForcingSpec::None => 0.0,
            ForcingSpec::ModalPeriodic(m) => {
                2.0 * m.amplitude.iter().map(|a| a.norm_sqr()).sum::<f64>() / m.k_squared()
            }
            _ => self.evaluate(grid, t).sobolev_norm_sq(-1),
        }
    }
}

/// `(a . grad) b` for two fields, evaluated on the grid with both inputs and the
/// product truncated to the two-thirds cube. The result is not projected.
pub fn convective_bilinear(a: &SpectralVectorField, b: &SpectralVectorField) -> Result<SpectralVectorField> {
    let grid = a.grid().clone();
    grid.ensure_same(b.grid())?;

    // Spectral inputs for 3 velocity components and 9 gradient entries d_j b_i.
    let jobs: Vec<(usize, Option<usize>)> = (0..3)
        .map(|c| (c, None))
        .chain((0..3).flat_map(|i| (0..3).map(move |j| (i, Some(j)))))
        .collect();
    let physical: Vec<Vec<f64>> = jobs
        .par_iter()
        .map(|&(comp, deriv)| {
            let mut buf = vec![Complex64::default(); grid.len()];
            let src = match deriv {
                None => a.component(comp),
                Some(_) => b.component(comp),
            };
            for (idx, slot) in buf.iter_mut().enumerate() {
                if !grid.is_dealiased(idx) {
                    continue;
                }
                *slot = match deriv {
                    None => src[idx],
                    Some(j) => Complex64::i() * grid.wavevector(idx)[j] as f64 * src[idx],
                };
            }
            spectral_to_physical(&grid, &buf)
        })
        .collect();

    let (vel, grads) = physical.split_at(3);
    let coeffs: Vec<Vec<Complex64>> = (0..3)
        .into_par_iter()
        .map(|i| {
            let prod: Vec<f64> = (0..grid.len())
                .map(|p| {
                    vel[0][p] * grads[3 * i][p] + vel[1][p] * grads[3 * i + 1][p] + vel[2][p] * grads[3 * i + 2][p]
                })
                .collect();
            let mut out = physical_to_spectral(&grid, &prod);
            for idx in 0..grid.len() {
                if idx == 0 || !grid.is_dealiased(idx) {
                    out[idx] = Complex64::default();
                    continue;
                }
                let mirror = grid.conjugate_index(idx);
                if idx < mirror {
                    let avg = 0.5 * (out[idx] + out[mirror].conj());
                    out[idx] = avg;
                    out[mirror] = avg.conj();
                }
            }
            out
        })
        .collect();
    let [x, y, z]: [Vec<Complex64>; 3] = coeffs.try_into().expect("three components");
    Ok(SpectralVectorField::from_components(&grid, [x, y, z]))
}

/// Spectral coefficients of `(u . grad) u` (dealiased, not projected).
pub fn convective_term(u: &SpectralVectorField) -> SpectralVectorField {
    convective_bilinear(u, u).expect("same grid")
}

/// Pressure solving `-Delta p = div[(u . grad) u]`, so that `N + grad p = P N`.
pub fn pressure_from_velocity(u: &SpectralVectorField) -> SpectralScalarField {
    let grid = u.grid();
    let n = convective_term(u);
    let mut p = vec![Complex64::default(); grid.len()];
    for (idx, slot) in p.iter_mut().enumerate().skip(1) {
        let k = grid.wavevector(idx);
        let div: Complex64 = (0..3).map(|c| n.component(c)[idx] * k[c] as f64).sum();
        *slot = Complex64::i() * div / grid.k_squared(idx);
    }
    SpectralScalarField::from_coeffs(grid, p)
}

/// Applies `v -> P_k v / (1 + alpha^2|k|^2)` after adding `-nu |k|^2 u`.
fn finish_rhs(u: &SpectralVectorField, mut acc: SpectralVectorField, params: &ModelParams) -> SpectralVectorField {
    let grid = u.grid().clone();
    let nu = params.nu();
    let comps = acc.components_mut();
    for idx in 0..grid.len() {
        if idx == 0 {
            for c in comps.iter_mut() {
                c[0] = Complex64::default();
            }
            continue;
        }
        let k = grid.wavevector(idx).map(|v| v as f64);
        let k2 = grid.k_squared(idx);
        let v = [comps[0][idx], comps[1][idx], comps[2][idx]];
        let kv = (v[0] * k[0] + v[1] * k[1] + v[2] * k[2]) / k2;
        let damp = 1.0 / params.voigt_factor(k2);
        for c in 0..3 {
            let projected = v[c] - kv * k[c];
            comps[c][idx] = (projected - u.component(c)[idx] * (nu * k2)) * damp;
        }
    }
    acc
}

/// `du/dt` of the unified model at state `u` and time `t`.
pub fn rhs(u: &SpectralVectorField, t: f64, params: &ModelParams, forcing: &ForcingSpec) -> SpectralVectorField {
    let mut acc = convective_term(u).scaled(-1.0);
    forcing.accumulate(t, 1.0, &mut acc);
    finish_rhs(u, acc, params)
}

/// Scalar time dependence of one term of a manufactured solution.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TimeProfile {
    Constant,
    /// `exp(-rate t)`
    Exp {
        rate: f64,
    },
    /// `cos(omega t + phase)`
    Cos {
        omega: f64,
        phase: f64,
    },
}

impl TimeProfile {
    pub fn value(&self, t: f64) -> f64 {
        match *self {
            TimeProfile::Constant => 1.0,
            TimeProfile::Exp { rate } => (-rate * t).exp(),
            TimeProfile::Cos { omega, phase } => (omega * t + phase).cos(),
        }
    }

    pub fn derivative(&self, t: f64) -> f64 {
        match *self {
            TimeProfile::Constant => 0.0,
            TimeProfile::Exp { rate } => -rate * (-rate * t).exp(),
            TimeProfile::Cos { omega, phase } => -omega * (omega * t + phase).sin(),
        }
    }
}

/// Closed-form solution `u(t, x) = sum_j g_j(t) U_j(x)` with solenoidal trig
/// polynomials `U_j`.
#[derive(Clone, Debug)]
pub struct ManufacturedSolution {
    terms: Vec<(TimeProfile, SpectralVectorField)>,
}

impl ManufacturedSolution {
    pub fn new(terms: Vec<(TimeProfile, SpectralVectorField)>) -> Result<Self> {
        let Some((_, first)) = terms.first() else {
            return Err(Error::InvalidStudy(
                "manufactured solution needs at least one term".into(),
            ));
        };
        let grid = first.grid().clone();
        for (_, field) in &terms {
            grid.ensure_same(field.grid())?;
            field.ensure_solenoidal(SOLENOIDAL_TOL)?;
        }
        Ok(Self { terms })
    }

    pub fn grid(&self) -> &TorusGrid {
        self.terms[0].1.grid()
    }

    pub fn terms(&self) -> &[(TimeProfile, SpectralVectorField)] {
        &self.terms
    }

    pub fn evaluate(&self, t: f64) -> SpectralVectorField {
        let mut out = SpectralVectorField::zeros(self.grid());
        for (g, field) in &self.terms {
            out.add_scaled(g.value(t), field);
        }
        out
    }

    pub fn time_derivative(&self, t: f64) -> SpectralVectorField {
        let mut out = SpectralVectorField::zeros(self.grid());
        for (g, field) in &self.terms {
            out.add_scaled(g.derivative(t), field);
        }
        out
    }
}

/// Forcing that makes a [`ManufacturedSolution`] an exact solution of the model:
///
/// ```text
/// f(t) = sum_j g_j'(t) (I - alpha^2 Delta) U_j + nu sum_j g_j(t) (-Delta) U_j
///        + sum_{i <= j} g_i(t) g_j(t) Q_ij
/// ```
///
/// where `Q_ij` are the projected symmetric convective products, precomputed once.
pub struct ManufacturedForcing {
    grid: TorusGrid,
    profiles: Vec<TimeProfile>,
    helmholtz: Vec<SpectralVectorField>,
    viscous: Vec<SpectralVectorField>,
    quadratic: Vec<(usize, usize, SpectralVectorField)>,
}

impl fmt::Debug for ManufacturedForcing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ManufacturedForcing")
            .field("terms", &self.profiles.len())
            .finish()
    }
}

impl ManufacturedForcing {
    fn accumulate(&self, t: f64, factor: f64, target: &mut SpectralVectorField) {
        let g: Vec<f64> = self.profiles.iter().map(|p| p.value(t)).collect();
        for (j, p) in self.profiles.iter().enumerate() {
            target.add_scaled(factor * p.derivative(t), &self.helmholtz[j]);
            target.add_scaled(factor * g[j], &self.viscous[j]);
        }
        for (i, j, q) in &self.quadratic {
            target.add_scaled(factor * g[*i] * g[*j], q);
        }
    }
}

/// Builds the forcing for which `exact` solves the model with `params`.
pub fn manufactured_forcing(exact: &ManufacturedSolution, params: &ModelParams) -> Result<ForcingSpec> {
    let grid = exact.grid().clone();
    let mut helmholtz = Vec::new();
    let mut viscous = Vec::new();
    for (_, field) in exact.terms() {
        helmholtz.push(field.helmholtz_apply(params.alpha())?);
        viscous.push(field.fractional_laplacian(2.0).scaled(params.nu()));
    }
    let n = exact.terms().len();
    let mut quadratic = Vec::new();
    for i in 0..n {
        for j in i..n {
            let (a, b) = (&exact.terms()[i].1, &exact.terms()[j].1);
            let mut q = convective_bilinear(a, b)?;
            if i != j {
                q.add_scaled(1.0, &convective_bilinear(b, a)?);
            }
            quadratic.push((i, j, q.leray_project()));
        }
    }
    Ok(ForcingSpec::Manufactured(Arc::new(ManufacturedForcing {
        grid,
        profiles: exact.terms().iter().map(|(p, _)| *p).collect(),
        helmholtz,
        viscous,
        quadratic,
    })))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::basis_scale;
    use proptest::prelude::*;

    fn grid(n: usize) -> TorusGrid {
        TorusGrid::new(n).unwrap()
    }

    fn rel(a: &SpectralVectorField, b: &SpectralVectorField) -> f64 {
        (a - b).sobolev_norm(0) / b.sobolev_norm(0).max(f64::MIN_POSITIVE)
    }

    #[test]
    fn params_validation() {
        assert!(ModelParams::new(-1.0, 0.0).is_err());
        assert!(ModelParams::new(0.0, -0.1).is_err());
        assert!(ModelParams::new(f64::NAN, 0.0).is_err());
        assert_eq!(ModelParams::new(0.0, 0.0).unwrap(), ModelParams::EULER);
    }

    #[test]
    fn convective_term_vanishes_on_zero_and_shear() {
        let g = grid(16);
        assert_eq!(convective_term(&SpectralVectorField::zeros(&g)).sobolev_norm(0), 0.0);
        let shear = SpectralVectorField::cosine_mode(&g, [2, 1, 0], [0.0, 0.0, 1.5]);
        assert!(convective_term(&shear).sobolev_norm(0) < 1e-14);
        let p = pressure_from_velocity(&shear);
        assert!(p.sobolev_norm(0) < 1e-14);
        assert_eq!(
            pressure_from_velocity(&SpectralVectorField::zeros(&g)).sobolev_norm(0),
            0.0
        );
    }

    #[test]
    fn taylor_green_convective_term_matches_trig_identity() {
        // (u.grad)u = 1/4 (sin2x (1 + cos2z), sin2y (1 + cos2z), 0) for unit amplitude.
        // Expanding sin2x = (e^{2ix} - e^{-2ix})/2i and cos2z into exponentials gives
        // coefficients (in the plain Fourier basis) -i/8 at (+-2,0,0)-signed modes etc.
        let g = grid(16);
        let amp = 0.8;
        let n = convective_term(&SpectralVectorField::taylor_green(&g, amp));
        let s = basis_scale() * amp * amp;
        let mut oracle = SpectralVectorField::zeros(&g);
        for sx in [-2i64, 2] {
            let sign = (sx / 2) as f64;
            // 1/4 sin2x = (-i sign / 8) e^{i sx x}
            oracle.component_mut(0)[g.index_of([sx, 0, 0]).unwrap()] = Complex64::new(0.0, -sign / 8.0) * s;
            oracle.component_mut(1)[g.index_of([0, sx, 0]).unwrap()] = Complex64::new(0.0, -sign / 8.0) * s;
            for sz in [-2i64, 2] {
                // 1/4 sin2x cos2z = (-i sign / 16) e^{i(sx x + sz z)}
                oracle.component_mut(0)[g.index_of([sx, 0, sz]).unwrap()] = Complex64::new(0.0, -sign / 16.0) * s;
                oracle.component_mut(1)[g.index_of([0, sx, sz]).unwrap()] = Complex64::new(0.0, -sign / 16.0) * s;
            }
        }
        for idx in 0..g.len() {
            for c in 0..3 {
                assert!(
                    (n.component(c)[idx] - oracle.component(c)[idx]).norm() < 1e-12,
                    "mode {:?}",
                    g.wavevector(idx)
                );
            }
        }
    }

    #[test]
    fn taylor_green_pressure_matches_closed_form() {
        // p = A^2/16 (cos2x + cos2y)(cos2z + 2)
        let g = grid(16);
        let amp = 1.3;
        let p = pressure_from_velocity(&SpectralVectorField::taylor_green(&g, amp));
        assert!(p.symmetry_defect() < 1e-15);
        let phys = p.to_physical();
        for idx in 0..g.len() {
            let [x, y, z] = g.point(idx);
            let expected = amp * amp / 16.0 * ((2.0 * x).cos() + (2.0 * y).cos()) * ((2.0 * z).cos() + 2.0);
            assert!((phys[idx] - expected).abs() < 1e-10);
        }
    }

    #[test]
    fn pressure_gradient_completes_projection() {
        let g = grid(16);
        let u = SpectralVectorField::random(&g, 2.5, 3).unwrap().dealiased();
        let n = convective_term(&u);
        let p = pressure_from_velocity(&u);
        let lhs = &n + &p.gradient();
        assert!(rel(&lhs, &n.leray_project()) < 1e-12);
    }

    #[test]
    fn rhs_examples() {
        let g = grid(16);
        let zero = SpectralVectorField::zeros(&g);
        let params = ModelParams::new(0.3, 0.1).unwrap();
        assert_eq!(rhs(&zero, 0.0, &params, &ForcingSpec::None).sobolev_norm(0), 0.0);

        let k = [2, 1, 0];
        let shear = SpectralVectorField::cosine_mode(&g, k, [0.0, 0.0, 1.0]);
        let r = rhs(&shear, 0.0, &params, &ForcingSpec::None);
        let factor = -0.1 * 5.0 / (1.0 + 0.09 * 5.0);
        let expected = shear.coeff(k).unwrap()[2] * factor;
        assert!((r.coeff(k).unwrap()[2] - expected).norm() < 1e-15 * expected.norm().max(1.0) + 1e-16);

        // Euler on Taylor-Green: -P N, with P N = 1/8 (sin2x cos2z, sin2y cos2z, -(cos2x + cos2y) sin2z).
        let tg = SpectralVectorField::taylor_green(&g, 1.0);
        let r = rhs(&tg, 0.0, &ModelParams::EULER, &ForcingSpec::None);
        let phys = r.to_physical();
        for idx in 0..g.len() {
            let [x, y, z] = g.point(idx);
            let (c2x, c2y, c2z) = ((2.0 * x).cos(), (2.0 * y).cos(), (2.0 * z).cos());
            let expected = [
                -(2.0 * x).sin() * c2z / 8.0,
                -(2.0 * y).sin() * c2z / 8.0,
                (c2x + c2y) * (2.0 * z).sin() / 8.0,
            ];
            for c in 0..3 {
                assert!((phys.values[c][idx] - expected[c]).abs() < 1e-10);
            }
        }
        assert!(rel(&r, &convective_term(&tg).leray_project().scaled(-1.0)) < 1e-14);
    }

    #[test]
    fn modal_forcing_must_be_transverse() {
        let a = [Complex64::new(1.0, 0.0), Complex64::default(), Complex64::default()];
        assert!(ModalForcing::new([1, 0, 0], a, 1.0).is_err());
        assert!(ModalForcing::new([0, 1, 0], a, 1.0).is_ok());
        assert!(ModalForcing::new([0, 0, 0], a, 1.0).is_err());
        let f = ForcingSpec::ModalPeriodic(ModalForcing::new([0, 9, 0], a, 1.0).unwrap());
        assert!(f.validate(&grid(16)).is_err());
    }

    #[test]
    fn modal_forcing_inner_matches_field_inner() {
        let g = grid(8);
        let a = [
            Complex64::new(0.3, -0.2),
            Complex64::default(),
            Complex64::new(0.1, 0.4),
        ];
        let f = ForcingSpec::ModalPeriodic(ModalForcing::new([0, 1, 0], a, 2.0).unwrap());
        let u = SpectralVectorField::random(&g, 2.0, 1).unwrap();
        let direct = f.evaluate(&g, 0.7).sobolev_inner(&u, 0).unwrap();
        assert!((f.inner(0.7, &u) - direct).abs() < 1e-14);
        let h = f.evaluate(&g, 0.3).sobolev_norm_sq(-1);
        assert!((f.h_minus1_sq(&g, 0.3) - h).abs() < 1e-14);
    }

    #[test]
    fn manufactured_linear_shear() {
        let g = grid(8);
        let k = [1, 1, 0];
        let shear = SpectralVectorField::cosine_mode(&g, k, [1.0, -1.0, 0.5]);
        let exact = ManufacturedSolution::new(vec![(TimeProfile::Exp { rate: 1.0 }, shear.clone())]).unwrap();
        let (alpha, nu) = (0.4, 0.05);
        let f = manufactured_forcing(&exact, &ModelParams::new(alpha, nu).unwrap()).unwrap();
        let t = 0.6;
        let got = f.evaluate(&g, t);
        let k2 = 2.0;
        let expected = shear.scaled((-(1.0 + alpha * alpha * k2) + nu * k2) * (-t).exp());
        assert!(rel(&got, &expected) < 1e-14);

        let zero = ManufacturedSolution::new(vec![(TimeProfile::Constant, SpectralVectorField::zeros(&g))]).unwrap();
        let f0 = manufactured_forcing(&zero, &ModelParams::EULER).unwrap();
        assert_eq!(f0.evaluate(&g, 1.0).sobolev_norm(0), 0.0);
    }

    #[test]
    fn manufactured_rejects_non_solenoidal() {
        let g = grid(8);
        let grad = SpectralVectorField::cosine_mode(&g, [1, 0, 0], [1.0, 0.0, 0.0]);
        assert!(matches!(
            ManufacturedSolution::new(vec![(TimeProfile::Constant, grad)]),
            Err(Error::NotSolenoidal { .. })
        ));
    }

    #[test]
    fn manufactured_residual_vanishes() {
        let g = grid(16);
        let exact = ManufacturedSolution::new(vec![
            (
                TimeProfile::Exp { rate: 0.5 },
                SpectralVectorField::taylor_green(&g, 1.0),
            ),
            (
                TimeProfile::Cos { omega: 3.0, phase: 0.2 },
                SpectralVectorField::cosine_mode(&g, [0, 1, 2], [1.0, 0.0, 0.0]),
            ),
        ])
        .unwrap();
        let params = ModelParams::new(0.2, 0.03).unwrap();
        let f = manufactured_forcing(&exact, &params).unwrap();
        for t in [0.0, 0.4, 1.3] {
            let residual = &rhs(&exact.evaluate(t), t, &params, &f) - &exact.time_derivative(t);
            assert!(residual.sobolev_norm(0) < 1e-13 * exact.time_derivative(t).sobolev_norm(0));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]

        #[test]
        fn rhs_invariants(seed in any::<u64>(), alpha in 0.0f64..1.0, nu in 0.0f64..0.5, t in 0.0f64..3.0) {
            let g = grid(8);
            let u = SpectralVectorField::random(&g, 2.0, seed).unwrap();
            let params = ModelParams::new(alpha, nu).unwrap();
            let a = [Complex64::new(0.5, 0.1), Complex64::default(), Complex64::new(-0.2, 0.3)];
            let f1 = ForcingSpec::ModalPeriodic(ModalForcing::new([0, 1, 0], a, 1.5).unwrap());
            let f2 = ForcingSpec::Steady(SpectralVectorField::random(&g, 3.0, seed ^ 1).unwrap());
            let f12 = ForcingSpec::Steady(&f1.evaluate(&g, t) + &f2.evaluate(&g, t));

            let r = rhs(&u, t, &params, &f1);
            prop_assert!(r.max_divergence() <= 1e-12 * r.sobolev_norm(0));
            prop_assert!(r.symmetry_defect() <= 1e-15 * r.sobolev_norm(0));

            let combined = rhs(&u, t, &params, &f12);
            let mut sum = rhs(&u, t, &params, &f1);
            sum.add_scaled(1.0, &rhs(&u, t, &params, &f2));
            sum.add_scaled(-1.0, &rhs(&u, t, &params, &ForcingSpec::None));
            prop_assert!((&combined - &sum).sobolev_norm(0) <= 1e-13 * combined.sobolev_norm(0));

            let pn = convective_term(&u).leray_project();
            let e = pn.sobolev_inner(&u, 0).unwrap();
            prop_assert!(e.abs() <= 1e-10 * u.sobolev_norm(0).powi(3));

            let free = ModelParams::new(alpha, 0.0).unwrap();
            let bigger = ModelParams::new(alpha + 0.5, 0.0).unwrap();
            let n1 = rhs(&u, t, &free, &ForcingSpec::None).sobolev_norm(0);
            let n2 = rhs(&u, t, &bigger, &ForcingSpec::None).sobolev_norm(0);
            prop_assert!(n2 <= n1);
        }
    }
}
