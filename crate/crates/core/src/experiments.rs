//! Convergence studies: vanishing regularization, perturbed data, vanishing
//! viscosity, truncation-filter rates and temporal order checks.
//!
//! Every study compares against a reference run on the same grid with the same
//! time step, so discretization errors largely cancel and the measured gap is
//! the effect of the parameter being varied. The "sup over time" is the maximum
//! over recorded samples.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{manufactured_forcing, ForcingSpec, ManufacturedSolution, ModelParams};
use crate::error::{check_non_negative, Error, Result};
use crate::field::{SobolevIndex, SpectralVectorField};
use crate::grid::TorusGrid;
use crate::integrate::{bkm_voigt_monitor, integrate_with, SimulationState, StepperConfig};
use crate::output::format_f64;

/// Decay exponent of the perturbation added by [`make_perturbed_datum`].
pub const PERTURBATION_DECAY: f64 = 6.0;

/// Decay exponent of the synthetic datum used by [`run_filter_rates`].
pub const FILTER_DATUM_DECAY: f64 = 5.0;

/// Rows with errors below this are treated as round-off and left out of fits.
pub const ROUND_OFF_FLOOR: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StudyKind {
    AlphaOnly,
    AlphaBeta,
    AlphaBetaNu,
    FilterRates,
    ManufacturedOrder,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialDatum {
    TaylorGreen {
        amplitude: f64,
    },
    /// Random solenoidal field with `|c_k| = |k|^-decay`, rescaled to the given `H_3` norm.
    Random {
        decay: f64,
        h3_norm: f64,
    },
}

impl InitialDatum {
    pub fn build(&self, grid: &TorusGrid, seed: u64) -> Result<SpectralVectorField> {
        match *self {
            InitialDatum::TaylorGreen { amplitude } => Ok(SpectralVectorField::taylor_green(grid, amplitude)),
            InitialDatum::Random { decay, h3_norm } => {
                Ok(SpectralVectorField::random(grid, decay, seed)?.normalized(3, h3_norm))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceStudySpec {
    pub kind: StudyKind,
    /// Used by `alpha_only`; optional override of the coupling for the beta studies.
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
    /// Optional for `alpha_beta_nu`; defaults to `nu_n = alpha_n^2`.
    pub nus: Vec<f64>,
    pub deltas: Vec<f64>,
    /// Sobolev order of the error norm.
    pub m: f64,
    pub horizon: f64,
    pub n: usize,
    pub dt: f64,
    pub record_interval: usize,
    pub datum: InitialDatum,
    pub seed: u64,
}

impl Default for ConvergenceStudySpec {
    fn default() -> Self {
        Self {
            kind: StudyKind::AlphaOnly,
            alphas: Vec::new(),
            betas: Vec::new(),
            nus: Vec::new(),
            deltas: Vec::new(),
            m: 2.0,
            horizon: 0.5,
            n: 32,
            dt: 1e-3,
            record_interval: 10,
            datum: InitialDatum::TaylorGreen { amplitude: 1.0 },
            seed: 0,
        }
    }
}

fn check_sequence(name: &str, seq: &[f64]) -> Result<()> {
    if seq.len() < 4 {
        return Err(Error::InvalidStudy(format!(
            "`{name}` needs at least 4 entries, got {}",
            seq.len()
        )));
    }
    if seq.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(Error::InvalidStudy(format!("`{name}` entries must be positive")));
    }
    if seq.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidStudy(format!("`{name}` must be strictly decreasing")));
    }
    Ok(())
}

fn check_non_negative_seq(name: &'static str, seq: &[f64]) -> Result<()> {
    seq.iter().try_for_each(|&v| check_non_negative(name, v))
}

impl ConvergenceStudySpec {
    /// Full validation applied to user-supplied studies: the varied sequences are
    /// positive, strictly decreasing and have at least four entries.
    pub fn validate(&self) -> Result<()> {
        match self.kind {
            StudyKind::AlphaOnly => check_sequence("alphas", &self.alphas)?,
            StudyKind::AlphaBeta => check_sequence("betas", &self.betas)?,
            StudyKind::AlphaBetaNu => {
                check_sequence("betas", &self.betas)?;
                if !self.nus.is_empty() {
                    check_sequence("nus", &self.nus)?;
                }
            }
            StudyKind::FilterRates => check_sequence("deltas", &self.deltas)?,
            StudyKind::ManufacturedOrder => {}
        }
        self.validate_shape()
    }

    /// Structural checks shared by every driver.
    fn validate_shape(&self) -> Result<()> {
        TorusGrid::new(self.n)?;
        StepperConfig::new(self.dt, self.record_interval)?;
        crate::error::check_positive("horizon", self.horizon)?;
        SobolevIndex::new(self.m)?;
        check_non_negative_seq("alphas", &self.alphas)?;
        check_non_negative_seq("betas", &self.betas)?;
        check_non_negative_seq("nus", &self.nus)?;
        let paired = |name: &str, seq: &[f64]| {
            if !seq.is_empty() && seq.len() != self.betas.len() {
                Err(Error::InvalidStudy(format!("`{name}` must have one entry per beta")))
            } else {
                Ok(())
            }
        };
        if matches!(self.kind, StudyKind::AlphaBeta | StudyKind::AlphaBetaNu) {
            paired("alphas", &self.alphas)?;
            paired("nus", &self.nus)?;
        }
        Ok(())
    }

    fn grid(&self) -> Result<TorusGrid> {
        TorusGrid::new(self.n)
    }

    fn stepper(&self) -> Result<StepperConfig> {
        StepperConfig::new(self.dt, self.record_interval)
    }

    fn expect_kind(&self, kinds: &[StudyKind]) -> Result<()> {
        if kinds.contains(&self.kind) {
            Ok(())
        } else {
            Err(Error::InvalidStudy(format!(
                "study kind {:?} not accepted here",
                self.kind
            )))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowStatus {
    Ok,
    /// The run blew up; excluded from the fit.
    Failed,
    /// Error at or below the round-off floor; excluded from the fit.
    Excluded,
}

impl RowStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            RowStatus::Ok => "ok",
            RowStatus::Failed => "failed",
            RowStatus::Excluded => "excluded",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReportRow {
    /// Varied parameter (alpha, beta or dt depending on the study).
    pub param: f64,
    pub sup_error: f64,
    pub status: RowStatus,
    /// Regularization actually used for this row.
    pub alpha: f64,
    /// Viscosity actually used for this row.
    pub nu: f64,
    /// `sup_t alpha^2 ||grad u(t)||^2` over the run.
    pub monitor_sup: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogLogFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceReport {
    pub kind: StudyKind,
    pub m: f64,
    pub horizon: f64,
    pub n: usize,
    pub dt: f64,
    pub seed: u64,
    pub rows: Vec<ReportRow>,
    pub fit: Option<LogLogFit>,
    pub reference: String,
}

#[derive(Serialize)]
struct ReportSidecar<'a> {
    kind: StudyKind,
    m: f64,
    #[serde(rename = "T")]
    horizon: f64,
    #[serde(rename = "N")]
    n: usize,
    dt: f64,
    seed: u64,
    slope: Option<f64>,
    intercept: Option<f64>,
    r2: Option<f64>,
    reference: &'a str,
}

impl ConvergenceReport {
    pub fn errors(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.sup_error).collect()
    }

    /// `true` if the errors strictly decrease along the rows.
    pub fn strictly_decreasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].sup_error < w[0].sup_error)
    }

    /// `param,sup_error,status`
    pub fn to_csv(&self) -> String {
        let mut out = String::from("param,sup_error,status\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{}\n",
                format_f64(r.param),
                format_f64(r.sup_error),
                r.status.as_str()
            ));
        }
        out
    }

    pub fn sidecar_json(&self) -> String {
        let sidecar = ReportSidecar {
            kind: self.kind,
            m: self.m,
            horizon: self.horizon,
            n: self.n,
            dt: self.dt,
            seed: self.seed,
            slope: self.fit.map(|f| f.slope),
            intercept: self.fit.map(|f| f.intercept),
            r2: self.fit.map(|f| f.r2),
            reference: &self.reference,
        };
        serde_json::to_string_pretty(&sidecar).expect("serializable")
    }

    fn fit_rows(&mut self) {
        let usable: Vec<(f64, f64)> = self
            .rows
            .iter()
            .filter(|r| r.status == RowStatus::Ok)
            .map(|r| (r.param, r.sup_error))
            .collect();
        self.fit = fit_loglog_slope(&usable).ok();
    }
}

/// Ordinary least squares of `ln(error)` on `ln(param)`.
///
/// Rows with a non-positive parameter or error are skipped.
pub fn fit_loglog_slope(rows: &[(f64, f64)]) -> Result<LogLogFit> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|(p, e)| *p > 0.0 && *e > 0.0 && p.is_finite() && e.is_finite())
        .map(|(p, e)| (p.ln(), e.ln()))
        .collect();
    if pts.len() < 2 {
        return Err(Error::TooFewRows(pts.len()));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidStudy(
            "log-log fit needs at least two distinct parameters".into(),
        ));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let ss_res: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let r2 = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    Ok(LogLogFit { slope, intercept, r2 })
}

/// Recorded samples of the reference run.
struct Reference {
    samples: Vec<SpectralVectorField>,
}

fn run_reference(u0: &SpectralVectorField, spec: &ConvergenceStudySpec, params: &ModelParams) -> Result<Reference> {
    let mut samples = Vec::new();
    integrate_with(
        &SimulationState { t: 0.0, u: u0.clone() },
        spec.horizon,
        &spec.stepper()?,
        params,
        &ForcingSpec::None,
        |s, _| {
            samples.push(s.u.clone());
            Ok(())
        },
    )?;
    Ok(Reference { samples })
}

/// Runs one perturbed configuration and returns `(sup_t ||u - u_ref||_{H_m}, monitor sup)`.
fn sup_error_against(
    reference: &Reference,
    u0: &SpectralVectorField,
    spec: &ConvergenceStudySpec,
    params: &ModelParams,
) -> Result<(f64, f64)> {
    let m = SobolevIndex::new(spec.m)?;
    let mut sup = 0.0f64;
    let mut diagnostics = Vec::new();
    let mut i = 0;
    integrate_with(
        &SimulationState { t: 0.0, u: u0.clone() },
        spec.horizon,
        &spec.stepper()?,
        params,
        &ForcingSpec::None,
        |s, d| {
            sup = sup.max((&s.u - &reference.samples[i]).sobolev_norm(m));
            diagnostics.push(*d);
            i += 1;
            Ok(())
        },
    )?;
    Ok((sup, bkm_voigt_monitor(&diagnostics, params.alpha()).sup))
}

fn row_from(param: f64, params: ModelParams, outcome: Result<(f64, f64)>) -> Result<ReportRow> {
    let (sup_error, monitor_sup, status) = match outcome {
        Ok((e, m)) if e > ROUND_OFF_FLOOR => (e, m, RowStatus::Ok),
        Ok((e, m)) => (e, m, RowStatus::Excluded),
        Err(err) if err.is_blow_up() => (f64::NAN, f64::NAN, RowStatus::Failed),
        Err(err) => return Err(err),
    };
    Ok(ReportRow {
        param,
        sup_error,
        status,
        alpha: params.alpha(),
        nu: params.nu(),
        monitor_sup,
    })
}

fn sort_rows(rows: &mut [ReportRow]) {
    rows.sort_by(|a, b| b.param.total_cmp(&a.param));
}

fn reference_note(spec: &ConvergenceStudySpec, what: &str) -> String {
    format!(
        "{what} on the same {n}^3 grid with dt = {dt}; sup over samples every {every} steps",
        n = spec.n,
        dt = spec.dt,
        every = spec.record_interval
    )
}

/// Euler-Voigt runs for each `alpha_n` against the Euler run from the same datum.
pub fn run_alpha_convergence(spec: &ConvergenceStudySpec) -> Result<ConvergenceReport> {
    spec.expect_kind(&[StudyKind::AlphaOnly])?;
    spec.validate_shape()?;
    let grid = spec.grid()?;
    let u0 = spec.datum.build(&grid, spec.seed)?;
    let reference = run_reference(&u0, spec, &ModelParams::EULER)?;

    let mut rows = spec
        .alphas
        .par_iter()
        .map(|&alpha| {
            let params = ModelParams::euler_voigt(alpha)?;
            row_from(alpha, params, sup_error_against(&reference, &u0, spec, &params))
        })
        .collect::<Result<Vec<_>>>()?;
    sort_rows(&mut rows);
    let mut report = ConvergenceReport {
        kind: spec.kind,
        m: spec.m,
        horizon: spec.horizon,
        n: spec.n,
        dt: spec.dt,
        seed: spec.seed,
        rows,
        fit: None,
        reference: reference_note(spec, "Euler (alpha = 0, nu = 0) run from the same datum"),
    };
    report.fit_rows();
    Ok(report)
}

/// `u0 + beta * w` with `w` a random `H_4` field of unit `H_3` norm.
pub fn make_perturbed_datum(u0: &SpectralVectorField, beta: f64, seed: u64) -> Result<SpectralVectorField> {
    check_non_negative("beta", beta)?;
    let w = SpectralVectorField::random(u0.grid(), PERTURBATION_DECAY, seed)?.normalized(3, 1.0);
    let mut out = u0.clone();
    out.add_scaled(beta, &w);
    Ok(out)
}

/// `alpha = min(beta, 1 / ||u0_beta||_{H_4})`, so that `alpha ||u0_beta||_{H_4} <= 1`.
pub fn couple_alpha_to_beta(beta: f64, u0_beta: &SpectralVectorField) -> Result<f64> {
    check_non_negative("beta", beta)?;
    if beta == 0.0 {
        return Ok(0.0);
    }
    let h4 = u0_beta.sobolev_norm(4);
    Ok(if h4 > 0.0 { beta.min(1.0 / h4) } else { beta })
}

/// Coupled `alpha_n` for a sequence of perturbations, made non-increasing by a
/// running minimum (which keeps `alpha_n ||u0_beta_n||_{H_4} <= 1`).
pub fn coupled_alphas(u0: &SpectralVectorField, betas: &[f64], seed: u64) -> Result<Vec<f64>> {
    let mut out: Vec<f64> = Vec::with_capacity(betas.len());
    for &beta in betas {
        let a = couple_alpha_to_beta(beta, &make_perturbed_datum(u0, beta, seed)?)?;
        out.push(out.last().map_or(a, |&prev: &f64| prev.min(a)));
    }
    Ok(out)
}

fn run_beta_family(spec: &ConvergenceStudySpec, viscous: bool) -> Result<ConvergenceReport> {
    spec.validate_shape()?;
    let grid = spec.grid()?;
    let u0 = spec.datum.build(&grid, spec.seed)?;
    let alphas = if spec.alphas.is_empty() {
        coupled_alphas(&u0, &spec.betas, spec.seed)?
    } else {
        spec.alphas.clone()
    };
    let params: Vec<ModelParams> = alphas
        .iter()
        .enumerate()
        .map(|(i, &alpha)| {
            if !viscous {
                return ModelParams::euler_voigt(alpha);
            }
            match spec.nus.get(i) {
                Some(&nu) => ModelParams::new(alpha.max(nu.sqrt()), nu),
                None => ModelParams::new(alpha, alpha * alpha),
            }
        })
        .collect::<Result<_>>()?;

    // One shared Euler reference from the unperturbed datum.
    let reference = run_reference(&u0, spec, &ModelParams::EULER)?;
    let mut rows = spec
        .betas
        .par_iter()
        .zip(params.par_iter())
        .map(|(&beta, params)| {
            let datum = make_perturbed_datum(&u0, beta, spec.seed)?;
            row_from(beta, *params, sup_error_against(&reference, &datum, spec, params))
        })
        .collect::<Result<Vec<_>>>()?;
    sort_rows(&mut rows);
    let what = if viscous {
        "Euler run from the unperturbed datum; perturbed runs are Navier-Stokes-Voigt"
    } else {
        "Euler run from the unperturbed datum; perturbed runs are Euler-Voigt"
    };
    let mut report = ConvergenceReport {
        kind: spec.kind,
        m: spec.m,
        horizon: spec.horizon,
        n: spec.n,
        dt: spec.dt,
        seed: spec.seed,
        rows,
        fit: None,
        reference: reference_note(spec, what),
    };
    report.fit_rows();
    Ok(report)
}

/// Euler-Voigt from perturbed data `u0_beta_n` with coupled `alpha_n`, against Euler from `u0`.
pub fn run_alpha_beta_convergence(spec: &ConvergenceStudySpec) -> Result<ConvergenceReport> {
    spec.expect_kind(&[StudyKind::AlphaBeta])?;
    run_beta_family(spec, false)
}

/// As [`run_alpha_beta_convergence`] with Navier-Stokes-Voigt runs (`nu_n > 0`, no forcing).
pub fn run_nsv_convergence(spec: &ConvergenceStudySpec) -> Result<ConvergenceReport> {
    spec.expect_kind(&[StudyKind::AlphaBetaNu])?;
    run_beta_family(spec, true)
}

#[derive(Clone, Debug, PartialEq)]
pub struct FilterRow {
    pub delta: f64,
    /// `||u_delta - u||_{H_s}` for `s = 0, 1, 2`.
    pub errors: [f64; 3],
    /// `delta * ||u_delta||_{H_4}`
    pub delta_h4: f64,
    pub status: RowStatus,
}

impl FilterRow {
    /// `||u_delta - u||_{H_s} <= delta^{3-s} ||u||_{H_3}` and `delta ||u_delta||_{H_4} <= ||u||_{H_3}`.
    pub fn satisfies_bounds(&self, h3: f64) -> bool {
        self.errors
            .iter()
            .enumerate()
            .all(|(s, &e)| e <= self.delta.powi(3 - s as i32) * h3)
            && self.delta_h4 <= h3
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FilterRatesReport {
    pub n: usize,
    pub seed: u64,
    pub h3: f64,
    pub rows: Vec<FilterRow>,
    /// Fits of `ln ||u_delta - u||_{H_s}` on `ln delta`, `s = 0, 1, 2`.
    pub fits: [Option<LogLogFit>; 3],
}

#[derive(Serialize)]
struct FilterSidecar {
    kind: StudyKind,
    #[serde(rename = "N")]
    n: usize,
    seed: u64,
    decay: f64,
    h3: f64,
    orders: [u32; 3],
    slopes: [Option<f64>; 3],
    intercepts: [Option<f64>; 3],
    r2: [Option<f64>; 3],
    bounds_hold: bool,
}

impl FilterRatesReport {
    pub fn bounds_hold(&self) -> bool {
        self.rows.iter().all(|r| r.satisfies_bounds(self.h3))
    }

    /// `delta,err_h0,err_h1,err_h2,delta_h4,status`
    pub fn to_csv(&self) -> String {
        let mut out = String::from("delta,err_h0,err_h1,err_h2,delta_h4,status\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                format_f64(r.delta),
                format_f64(r.errors[0]),
                format_f64(r.errors[1]),
                format_f64(r.errors[2]),
                format_f64(r.delta_h4),
                r.status.as_str()
            ));
        }
        out
    }

    pub fn sidecar_json(&self) -> String {
        let sidecar = FilterSidecar {
            kind: StudyKind::FilterRates,
            n: self.n,
            seed: self.seed,
            decay: FILTER_DATUM_DECAY,
            h3: self.h3,
            orders: [0, 1, 2],
            slopes: self.fits.map(|f| f.map(|f| f.slope)),
            intercepts: self.fits.map(|f| f.map(|f| f.intercept)),
            r2: self.fits.map(|f| f.map(|f| f.r2)),
            bounds_hold: self.bounds_hold(),
        };
        serde_json::to_string_pretty(&sidecar).expect("serializable")
    }
}

/// Truncation errors of the `|c_k| = |k|^-5` datum normalized to unit `H_3` norm.
pub fn run_filter_rates(spec: &ConvergenceStudySpec) -> Result<FilterRatesReport> {
    spec.expect_kind(&[StudyKind::FilterRates])?;
    let grid = spec.grid()?;
    let u = SpectralVectorField::random(&grid, FILTER_DATUM_DECAY, spec.seed)?.normalized(3, 1.0);
    let h3 = u.sobolev_norm(3);
    let mut rows = spec
        .deltas
        .iter()
        .map(|&delta| {
            let filtered = u.truncate_filter(delta)?;
            let diff = &filtered - &u;
            let errors = [0, 1, 2].map(|s| diff.sobolev_norm(s));
            let status = if errors.iter().all(|&e| e > ROUND_OFF_FLOOR * h3) {
                RowStatus::Ok
            } else {
                RowStatus::Excluded
            };
            Ok(FilterRow {
                delta,
                errors,
                delta_h4: delta * filtered.sobolev_norm(4),
                status,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| b.delta.total_cmp(&a.delta));
    let fits = [0, 1, 2].map(|s| {
        let pts: Vec<(f64, f64)> = rows
            .iter()
            .filter(|r| r.status == RowStatus::Ok)
            .map(|r| (r.delta, r.errors[s]))
            .collect();
        fit_loglog_slope(&pts).ok()
    });
    Ok(FilterRatesReport {
        n: spec.n,
        seed: spec.seed,
        h3,
        rows,
        fits,
    })
}

/// Relative `L^2` error at `horizon` of the RK4 solution driven by the
/// manufactured forcing, for each time step in `dts`.
pub fn run_manufactured_order_check(
    dts: &[f64],
    exact: &ManufacturedSolution,
    params: &ModelParams,
    horizon: f64,
) -> Result<ConvergenceReport> {
    let forcing = manufactured_forcing(exact, params)?;
    let target = exact.evaluate(horizon);
    let scale = target.sobolev_norm(0).max(f64::MIN_POSITIVE);
    let mut rows = dts
        .par_iter()
        .map(|&dt| {
            let config = StepperConfig::new(dt, usize::MAX)?;
            let outcome = integrate_with(
                &SimulationState {
                    t: 0.0,
                    u: exact.evaluate(0.0),
                },
                horizon,
                &config,
                params,
                &forcing,
                |_, _| Ok(()),
            )
            .map(|end| ((&end.u - &target).sobolev_norm(0) / scale, 0.0));
            row_from(dt, *params, outcome)
        })
        .collect::<Result<Vec<_>>>()?;
    sort_rows(&mut rows);
    let mut report = ConvergenceReport {
        kind: StudyKind::ManufacturedOrder,
        m: 0.0,
        horizon,
        n: exact.grid().modes_per_axis(),
        dt: dts.iter().copied().fold(f64::INFINITY, f64::min),
        seed: 0,
        rows,
        fit: None,
        reference: "closed-form manufactured solution; relative L2 error at T".into(),
    };
    report.fit_rows();
    Ok(report)
}
