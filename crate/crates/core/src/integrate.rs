//! Classical RK4 time stepping with per-sample diagnostics.

use log::warn;
use serde::{Deserialize, Serialize};

use crate::dynamics::{rhs, ForcingSpec, ModelParams};
use crate::error::{check_positive, Error, Result};
use crate::field::SpectralVectorField;

/// `E_alpha` growth factor over the initial value treated as blow-up.
pub const BLOW_UP_GROWTH: f64 = 1e12;

/// Advective CFL bound `dt * max|u| * k_max`.
pub const CFL_LIMIT: f64 = 0.5;

#[derive(Clone, Debug, PartialEq)]
pub struct SimulationState {
    pub t: f64,
    pub u: SpectralVectorField,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scheme {
    #[default]
    Rk4,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepperConfig {
    pub dt: f64,
    pub scheme: Scheme,
    /// Steps between recorded samples.
    pub record_interval: usize,
}

impl StepperConfig {
    pub fn new(dt: f64, record_interval: usize) -> Result<Self> {
        check_positive("dt", dt)?;
        if record_interval == 0 {
            return Err(Error::InvalidParameter {
                name: "record_interval",
                constraint: ">= 1",
                value: 0.0,
            });
        }
        Ok(Self {
            dt,
            scheme: Scheme::Rk4,
            record_interval,
        })
    }
}

/// Scalar diagnostics at one recorded sample.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub l2_sq: f64,
    pub grad_sq: f64,
    pub e_alpha: f64,
    pub h3: f64,
    pub bkm_voigt: f64,
    pub visc_dissip_integral: f64,
    pub work_integral: f64,
}

impl DiagnosticsRecord {
    pub const CSV_HEADER: &'static str = "t,l2_sq,grad_sq,e_alpha,h3,bkm_voigt,visc_dissip_integral,work_integral";

    /// Instantaneous diagnostics with zero accumulated integrals.
    pub fn snapshot(t: f64, u: &SpectralVectorField, alpha: f64) -> Self {
        let (l2_sq, grad_sq) = l2_and_grad_sq(u);
        let a2 = alpha * alpha;
        Self {
            t,
            l2_sq,
            grad_sq,
            e_alpha: l2_sq + a2 * grad_sq,
            h3: u.sobolev_norm(3),
            bkm_voigt: a2 * grad_sq,
            visc_dissip_integral: 0.0,
            work_integral: 0.0,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.values().iter().all(|v| v.is_finite())
    }

    pub fn values(&self) -> [f64; 8] {
        [
            self.t,
            self.l2_sq,
            self.grad_sq,
            self.e_alpha,
            self.h3,
            self.bkm_voigt,
            self.visc_dissip_integral,
            self.work_integral,
        ]
    }
}

/// `(||u||^2, ||grad u||^2)` in a single pass.
fn l2_and_grad_sq(u: &SpectralVectorField) -> (f64, f64) {
    let grid = u.grid();
    let (mut l2, mut grad) = (0.0, 0.0);
    for idx in 1..grid.len() {
        let m: f64 = (0..3).map(|c| u.component(c)[idx].norm_sqr()).sum();
        if m != 0.0 {
            l2 += m;
            grad += grid.k_squared(idx) * m;
        }
    }
    (l2, grad)
}

/// `E_alpha(u) = ||u||^2 + alpha^2 ||grad u||^2`.
pub fn energy(u: &SpectralVectorField, alpha: f64) -> f64 {
    let (l2, grad) = l2_and_grad_sq(u);
    l2 + alpha * alpha * grad
}

fn rk4(u: &SpectralVectorField, t: f64, h: f64, params: &ModelParams, forcing: &ForcingSpec) -> SpectralVectorField {
    let k1 = rhs(u, t, params, forcing);
    let mut stage = u.clone();
    stage.add_scaled(0.5 * h, &k1);
    let k2 = rhs(&stage, t + 0.5 * h, params, forcing);
    stage = u.clone();
    stage.add_scaled(0.5 * h, &k2);
    let k3 = rhs(&stage, t + 0.5 * h, params, forcing);
    stage = u.clone();
    stage.add_scaled(h, &k3);
    let k4 = rhs(&stage, t + h, params, forcing);

    let mut out = u.clone();
    out.add_scaled(h / 6.0, &k1);
    out.add_scaled(h / 3.0, &k2);
    out.add_scaled(h / 3.0, &k3);
    out.add_scaled(h / 6.0, &k4);
    // Arrests divergence drift from round-off.
    out.leray_project()
}

fn advance(state: &SimulationState, h: f64, params: &ModelParams, forcing: &ForcingSpec) -> Result<SimulationState> {
    let u = rk4(&state.u, state.t, h, params, forcing);
    let t = state.t + h;
    if !u.is_finite() {
        return Err(Error::BlowUp {
            t,
            last: Box::new(None),
        });
    }
    Ok(SimulationState { t, u })
}

/// One RK4 step of length `config.dt` (negative `dt` is not accepted here).
pub fn step(
    state: &SimulationState,
    config: &StepperConfig,
    params: &ModelParams,
    forcing: &ForcingSpec,
) -> Result<SimulationState> {
    forcing.validate(state.u.grid())?;
    advance(state, config.dt, params, forcing)
}

/// Signed-step variant used for reversibility checks.
pub fn step_by(
    state: &SimulationState,
    h: f64,
    params: &ModelParams,
    forcing: &ForcingSpec,
) -> Result<SimulationState> {
    forcing.validate(state.u.grid())?;
    advance(state, h, params, forcing)
}

/// `dt * max|u| * k_max` with `k_max = N/2`.
pub fn cfl_number(u: &SpectralVectorField, dt: f64) -> f64 {
    let k_max = (u.grid().modes_per_axis() / 2) as f64;
    dt * u.to_physical().max_abs() * k_max
}

fn check_cfl(u: &SpectralVectorField, dt: f64, t: f64) {
    let cfl = cfl_number(u, dt);
    if cfl > CFL_LIMIT {
        warn!("CFL number {cfl:.3} exceeds {CFL_LIMIT} at t = {t}");
    }
}

/// Recorded output of [`integrate`].
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub samples: Vec<SimulationState>,
    pub diagnostics: Vec<DiagnosticsRecord>,
}

impl Trajectory {
    pub fn last(&self) -> &SimulationState {
        self.samples.last().expect("trajectory always holds t = 0")
    }
}

/// Integrates over `[t0, t0 + horizon]` with `ceil(horizon / dt)` equal steps.
///
/// `observer` sees `t0`, every `record_interval`-th step and the final step.
/// Returns the final state.
pub fn integrate_with<F>(
    state0: &SimulationState,
    horizon: f64,
    config: &StepperConfig,
    params: &ModelParams,
    forcing: &ForcingSpec,
    mut observer: F,
) -> Result<SimulationState>
where
    F: FnMut(&SimulationState, &DiagnosticsRecord) -> Result<()>,
{
    check_positive("horizon", horizon)?;
    forcing.validate(state0.u.grid())?;
    let steps = ((horizon / config.dt) - 1e-9).ceil().max(1.0) as usize;
    let h = horizon / steps as f64;
    let alpha = params.alpha();
    let nu = params.nu();

    let mut state = state0.clone();
    let mut record = DiagnosticsRecord::snapshot(state.t, &state.u, alpha);
    let e0 = record.e_alpha;
    let mut prev_grad = record.grad_sq;
    let mut prev_work = forcing.inner(state.t, &state.u);
    check_cfl(&state.u, h, state.t);
    observer(&state, &record)?;

    for n in 1..=steps {
        let next = advance(&state, h, params, forcing).map_err(|e| match e {
            Error::BlowUp { t, .. } => Error::BlowUp {
                t,
                last: Box::new(Some(record)),
            },
            other => other,
        })?;
        let (l2_sq, grad_sq) = l2_and_grad_sq(&next.u);
        let work = forcing.inner(next.t, &next.u);
        let e_alpha = l2_sq + alpha * alpha * grad_sq;
        if !e_alpha.is_finite() || (e0 > 0.0 && e_alpha > BLOW_UP_GROWTH * e0) {
            return Err(Error::BlowUp {
                t: next.t,
                last: Box::new(Some(record)),
            });
        }
        let visc = record.visc_dissip_integral + nu * 0.5 * h * (prev_grad + grad_sq);
        let work_integral = record.work_integral + 0.5 * h * (prev_work + work);
        prev_grad = grad_sq;
        prev_work = work;
        state = next;

        let recorded = n % config.record_interval == 0 || n == steps;
        record = if recorded {
            DiagnosticsRecord {
                t: state.t,
                l2_sq,
                grad_sq,
                e_alpha,
                h3: state.u.sobolev_norm(3),
                bkm_voigt: alpha * alpha * grad_sq,
                visc_dissip_integral: visc,
                work_integral,
            }
        } else {
            DiagnosticsRecord {
                visc_dissip_integral: visc,
                work_integral,
                ..record
            }
        };
        if recorded {
            if n != steps {
                check_cfl(&state.u, h, state.t);
            }
            observer(&state, &record)?;
        }
    }
    Ok(state)
}

/// Integrates and keeps every recorded sample.
pub fn integrate(
    state0: &SimulationState,
    horizon: f64,
    config: &StepperConfig,
    params: &ModelParams,
    forcing: &ForcingSpec,
) -> Result<Trajectory> {
    let mut samples = Vec::new();
    let mut diagnostics = Vec::new();
    integrate_with(state0, horizon, config, params, forcing, |s, d| {
        samples.push(s.clone());
        diagnostics.push(*d);
        Ok(())
    })?;
    Ok(Trajectory { samples, diagnostics })
}

/// Time series of `alpha^2 ||grad u(t)||^2` and its maximum.
#[derive(Clone, Debug, PartialEq)]
pub struct BlowUpMonitor {
    pub series: Vec<(f64, f64)>,
    pub sup: f64,
}

pub fn bkm_voigt_monitor(diagnostics: &[DiagnosticsRecord], alpha: f64) -> BlowUpMonitor {
    let a2 = alpha * alpha;
    let series: Vec<(f64, f64)> = diagnostics.iter().map(|d| (d.t, a2 * d.grad_sq)).collect();
    let sup = series.iter().map(|&(_, v)| v).fold(0.0, f64::max);
    BlowUpMonitor { series, sup }
}
