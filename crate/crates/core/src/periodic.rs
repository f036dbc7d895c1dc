//! Time-periodic Navier-Stokes-Voigt solutions by Picard iteration of the period map.

use serde::Serialize;

use crate::dynamics::{ForcingSpec, ModelParams};
use crate::error::{check_positive, Error, Result};
use crate::field::SpectralVectorField;
use crate::integrate::{energy, integrate_with, SimulationState, StepperConfig};

/// Relative slack used when comparing iterate energies with the absorbing radius.
pub const BALL_SLACK: f64 = 1e-6;

/// Quadrature points per period for the `H_{-1}` forcing integral.
const FORCING_QUADRATURE: usize = 256;

#[derive(Clone, Debug)]
pub struct PoincareConfig {
    pub period: f64,
    pub max_iters: usize,
    /// Stopping tolerance on the `H_1` residual.
    pub tol: f64,
    pub params: ModelParams,
    pub forcing: ForcingSpec,
    pub stepper: StepperConfig,
}

impl PoincareConfig {
    pub fn validate(&self) -> Result<()> {
        check_positive("period", self.period)?;
        check_positive("tol", self.tol)?;
        check_positive("nu", self.params.nu())?;
        match &self.forcing {
            ForcingSpec::None | ForcingSpec::Steady(_) => Ok(()),
            ForcingSpec::ModalPeriodic(m) => {
                if (m.period() - self.period).abs() <= 1e-12 * self.period {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter {
                        name: "omega",
                        constraint: "2 pi / omega = period",
                        value: m.omega,
                    })
                }
            }
            ForcingSpec::Manufactured(_) => Err(Error::InvalidStudy(
                "periodic orbits need none, steady or modal_periodic forcing".into(),
            )),
        }
    }
}

#[derive(Clone, Debug)]
pub struct OrbitResult {
    pub fixed_point: SpectralVectorField,
    /// `||u_{n+1} - u_n||_{H_1}` per iteration.
    pub residuals: Vec<f64>,
    /// `E_alpha` of the guess followed by every iterate.
    pub e_alpha_history: Vec<f64>,
    pub radius: f64,
    pub converged: bool,
    /// Every iterate satisfied `E_alpha <= R^2 (1 + BALL_SLACK)`.
    pub inside_ball: bool,
}

#[derive(Serialize)]
struct OrbitReport<'a> {
    converged: bool,
    iterations: usize,
    final_residual: Option<f64>,
    #[serde(rename = "R")]
    radius: f64,
    inside_ball: bool,
    residual_history: &'a [f64],
    e_alpha_history: &'a [f64],
}

impl OrbitResult {
    pub fn iterations(&self) -> usize {
        self.residuals.len()
    }

    pub fn final_residual(&self) -> Option<f64> {
        self.residuals.last().copied()
    }

    pub fn to_json(&self) -> String {
        let report = OrbitReport {
            converged: self.converged,
            iterations: self.iterations(),
            final_residual: self.final_residual(),
            radius: self.radius,
            inside_ball: self.inside_ball,
            residual_history: &self.residuals,
            e_alpha_history: &self.e_alpha_history,
        };
        serde_json::to_string_pretty(&report).expect("serializable")
    }
}

/// `u(T_p)` for the solution starting from `u0` at `t = 0`.
pub fn poincare_map(u0: &SpectralVectorField, config: &PoincareConfig) -> Result<SpectralVectorField> {
    config.validate()?;
    u0.ensure_solenoidal(crate::dynamics::SOLENOIDAL_TOL)?;
    let end = integrate_with(
        &SimulationState { t: 0.0, u: u0.clone() },
        config.period,
        &config.stepper,
        &config.params,
        &config.forcing,
        |_, _| Ok(()),
    )?;
    Ok(end.u)
}

/// Radius `R` of the absorbing ball `E_alpha <= R^2` for the period map.
///
/// `c1 = nu / (1 + alpha^2)`, `c3 = (1/nu) int_0^Tp ||f||_{H_-1}^2 dt`,
/// `R = sqrt(c3 / (1 - exp(-c1 Tp)))`.
pub fn absorbing_radius(config: &PoincareConfig, grid: &crate::grid::TorusGrid) -> Result<f64> {
    config.validate()?;
    let nu = config.params.nu();
    let alpha = config.params.alpha();
    let c1 = nu / (1.0 + alpha * alpha);
    let c3 = forcing_h_minus1_integral(&config.forcing, grid, config.period) / nu;
    Ok((c3 / (1.0 - (-c1 * config.period).exp())).sqrt())
}

/// `int_0^T ||f(t)||_{H_-1}^2 dt` by the trapezoid rule, exact for the periodic modal forcing.
fn forcing_h_minus1_integral(forcing: &ForcingSpec, grid: &crate::grid::TorusGrid, period: f64) -> f64 {
    match forcing {
        ForcingSpec::None => 0.0,
        ForcingSpec::Steady(_) | ForcingSpec::ModalPeriodic(_) => {
            let h = period / FORCING_QUADRATURE as f64;
            (0..FORCING_QUADRATURE)
                .map(|i| forcing.h_minus1_sq(grid, i as f64 * h))
                .sum::<f64>()
                * h
        }
        ForcingSpec::Manufactured(_) => f64::NAN,
    }
}

pub fn find_periodic_solution(guess: &SpectralVectorField, config: &PoincareConfig) -> Result<OrbitResult> {
    config.validate()?;
    guess.ensure_solenoidal(crate::dynamics::SOLENOIDAL_TOL)?;
    let alpha = config.params.alpha();
    let radius = absorbing_radius(config, guess.grid())?;
    let limit = radius * radius * (1.0 + BALL_SLACK);

    let e0 = energy(guess, alpha);
    if e0 > limit {
        log::warn!(
            "initial guess lies outside the absorbing ball: E = {e0:e}, R^2 = {:e}",
            radius * radius
        );
    }
    let mut e_alpha_history = vec![e0];
    let mut inside_ball = e0 <= limit;
    let mut residuals = Vec::new();
    let mut u = guess.clone();
    let mut converged = false;
    for iter in 0..config.max_iters {
        let next = poincare_map(&u, config)?;
        let residual = (&next - &u).sobolev_norm(1);
        let e = energy(&next, alpha);
        log::debug!("iteration {iter}: residual {residual:e}, E = {e:e}");
        residuals.push(residual);
        e_alpha_history.push(e);
        inside_ball &= e <= limit;
        u = next;
        if residual <= config.tol {
            converged = true;
            break;
        }
    }
    Ok(OrbitResult {
        fixed_point: u,
        residuals,
        e_alpha_history,
        radius,
        converged,
        inside_ball,
    })
}
