//! Executes a validated [`RunConfig`] and writes its artifacts.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};
use voigt_core::dynamics::{pressure_from_velocity, ForcingSpec};
use voigt_core::experiments::{
    run_alpha_beta_convergence, run_alpha_convergence, run_filter_rates, run_nsv_convergence, StudyKind,
};
use voigt_core::integrate::{integrate_with, DiagnosticsRecord, SimulationState};
use voigt_core::output::{diagnostics_csv, write_atomic};
use voigt_core::periodic::{find_periodic_solution, PoincareConfig};
use voigt_core::{snapshot, Error, ModelParams, SpectralVectorField, StepperConfig, TorusGrid};

use crate::config::{Command, ConfigError, ForcingConfig, InitialSpec, RunConfig, SimulateConfig};

#[derive(Debug)]
pub enum RunError {
    Config(ConfigError),
    /// Blow-up; the partial artifacts listed were still written.
    BlowUp {
        t: f64,
        artifacts: Vec<PathBuf>,
    },
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    Core(Error),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::BlowUp { .. } => 2,
            _ => 1,
        }
    }
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Config(e) => e.fmt(f),
            RunError::BlowUp { t, .. } => write!(f, "blow-up detected at t = {t}"),
            RunError::Io { path, source } => write!(f, "{}: {source}", path.display()),
            RunError::Core(e) => e.fmt(f),
        }
    }
}

impl std::error::Error for RunError {}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e)
    }
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        match e {
            Error::BlowUp { t, .. } => RunError::BlowUp {
                t,
                artifacts: Vec::new(),
            },
            other => RunError::Core(other),
        }
    }
}

#[derive(Serialize)]
struct ManifestEntry {
    path: String,
    bytes: usize,
    sha256: String,
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    seed: u64,
    status: &'a str,
    artifacts: Vec<ManifestEntry>,
}

/// Collects artifacts for one run and writes them atomically.
struct Outputs {
    dir: PathBuf,
    entries: Vec<ManifestEntry>,
}

impl Outputs {
    fn new(dir: &Path) -> Result<Self, RunError> {
        fs::create_dir_all(dir).map_err(|source| RunError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        Ok(Self {
            dir: dir.to_path_buf(),
            entries: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), RunError> {
        let path = self.dir.join(name);
        write_atomic(&path, bytes).map_err(|source| RunError::Io { path, source })?;
        self.entries.push(ManifestEntry {
            path: name.to_string(),
            bytes: bytes.len(),
            sha256: format!("{:x}", Sha256::digest(bytes)),
        });
        Ok(())
    }

    fn finish(mut self, command: &str, seed: u64, status: &str) -> Result<Vec<PathBuf>, RunError> {
        let paths: Vec<PathBuf> = self.entries.iter().map(|e| self.dir.join(&e.path)).collect();
        let manifest = Manifest {
            command,
            seed,
            status,
            artifacts: std::mem::take(&mut self.entries),
        };
        let json = serde_json::to_string_pretty(&manifest).expect("serializable") + "\n";
        let path = self.dir.join("manifest.json");
        write_atomic(&path, json.as_bytes()).map_err(|source| RunError::Io {
            path: path.clone(),
            source,
        })?;
        Ok(paths.into_iter().chain(std::iter::once(path)).collect())
    }
}

fn read_file(base: &Path, path: &Path) -> Result<Vec<u8>, RunError> {
    let full = base.join(path);
    fs::read(&full).map_err(|source| RunError::Io { path: full, source })
}

fn load_vector(base: &Path, path: &Path, key: &str, grid: &TorusGrid) -> Result<SpectralVectorField, RunError> {
    let field = snapshot::decode_vector(&read_file(base, path)?).map_err(|e| ConfigError::Invalid {
        key: key.to_string(),
        constraint: format!("does not hold a valid vector snapshot: {e}"),
    })?;
    if field.grid() != grid {
        return Err(ConfigError::Invalid {
            key: key.to_string(),
            constraint: format!(
                "snapshot has N = {}, expected {}",
                field.grid().modes_per_axis(),
                grid.modes_per_axis()
            ),
        }
        .into());
    }
    Ok(field)
}

fn build_initial(
    base: &Path,
    spec: &InitialSpec,
    key: &str,
    grid: &TorusGrid,
    seed: u64,
) -> Result<SpectralVectorField, RunError> {
    Ok(match spec {
        InitialSpec::Zero => SpectralVectorField::zeros(grid),
        InitialSpec::TaylorGreen { amplitude } => SpectralVectorField::taylor_green(grid, *amplitude),
        InitialSpec::Random { decay, h3_norm } => {
            SpectralVectorField::random(grid, *decay, seed)?.normalized(3, *h3_norm)
        }
        InitialSpec::Snapshot { path } => load_vector(base, path, &format!("{key}.path"), grid)?,
    })
}

fn build_forcing(base: &Path, spec: &ForcingConfig, key: &str, grid: &TorusGrid) -> Result<ForcingSpec, RunError> {
    Ok(match spec {
        ForcingConfig::None => ForcingSpec::None,
        ForcingConfig::Steady { path } => ForcingSpec::Steady(load_vector(base, path, &format!("{key}.path"), grid)?),
        ForcingConfig::ModalPeriodic { .. } => ForcingSpec::ModalPeriodic(spec.modal().expect("validated")),
    })
}

/// Runs `config`, writing artifacts into `out`. Relative paths inside the
/// config resolve against `base`.
pub fn run(config: &RunConfig, base: &Path, out: &Path) -> Result<Vec<PathBuf>, RunError> {
    // Inputs are loaded before the output directory is touched.
    match &config.command {
        Command::Simulate(sim) => simulate(sim, config.seed, base, out),
        Command::Converge(spec) => {
            let report = match spec.kind {
                StudyKind::AlphaOnly => run_alpha_convergence(spec)?,
                StudyKind::AlphaBeta => run_alpha_beta_convergence(spec)?,
                StudyKind::AlphaBetaNu => run_nsv_convergence(spec)?,
                _ => unreachable!("rejected by parse_config"),
            };
            let mut outputs = Outputs::new(out)?;
            outputs.write("report.csv", report.to_csv().as_bytes())?;
            outputs.write("report.json", (report.sidecar_json() + "\n").as_bytes())?;
            outputs.finish("converge", config.seed, "ok")
        }
        Command::FilterRates(spec) => {
            let report = run_filter_rates(spec)?;
            let mut outputs = Outputs::new(out)?;
            outputs.write("filter_rates.csv", report.to_csv().as_bytes())?;
            outputs.write("filter_rates.json", (report.sidecar_json() + "\n").as_bytes())?;
            outputs.finish("filter-rates", config.seed, "ok")
        }
        Command::Periodic(p) => {
            let grid = TorusGrid::new(p.n)?;
            let guess = build_initial(base, &p.initial, "periodic.initial", &grid, config.seed)?;
            let poincare = PoincareConfig {
                period: p.period,
                max_iters: p.max_iters,
                tol: p.tol,
                params: p.params(),
                forcing: build_forcing(base, &p.forcing, "periodic.forcing", &grid)?,
                stepper: p.stepper(),
            };
            let result = find_periodic_solution(&guess, &poincare)?;
            let mut outputs = Outputs::new(out)?;
            outputs.write("orbit.json", (result.to_json() + "\n").as_bytes())?;
            outputs.write("fixed_point.voig", &snapshot::encode_vector(&result.fixed_point))?;
            let status = if result.converged { "ok" } else { "not_converged" };
            outputs.finish("periodic", config.seed, status)
        }
        Command::Diagnose(d) => {
            let bytes = read_file(base, &d.snapshot)?;
            let field = snapshot::decode_vector(&bytes).map_err(|e| ConfigError::Invalid {
                key: "diagnose.snapshot".into(),
                constraint: format!("does not hold a valid vector snapshot: {e}"),
            })?;
            let record = DiagnosticsRecord::snapshot(0.0, &field, d.alpha);
            let mut outputs = Outputs::new(out)?;
            outputs.write("diagnostics.csv", diagnostics_csv(&[record]).as_bytes())?;
            outputs.write(
                "pressure.voig",
                &snapshot::encode_scalar(&pressure_from_velocity(&field)),
            )?;
            outputs.finish("diagnose", config.seed, "ok")
        }
    }
}

fn simulate(sim: &SimulateConfig, seed: u64, base: &Path, out: &Path) -> Result<Vec<PathBuf>, RunError> {
    let grid = TorusGrid::new(sim.n)?;
    let u0 = build_initial(base, &sim.initial, "simulate.initial", &grid, seed)?;
    let forcing = build_forcing(base, &sim.forcing, "simulate.forcing", &grid)?;
    let params = ModelParams::new(sim.alpha, sim.nu)?;
    let stepper = StepperConfig::new(sim.dt, sim.record_interval)?;

    let mut records = Vec::new();
    let outcome = integrate_with(
        &SimulationState { t: 0.0, u: u0 },
        sim.horizon,
        &stepper,
        &params,
        &forcing,
        |_, d| {
            records.push(*d);
            Ok(())
        },
    );
    let mut outputs = Outputs::new(out)?;
    outputs.write("diagnostics.csv", diagnostics_csv(&records).as_bytes())?;
    match outcome {
        Ok(end) => {
            outputs.write("final.voig", &snapshot::encode_vector(&end.u))?;
            outputs.finish("simulate", seed, "ok")
        }
        Err(Error::BlowUp { t, .. }) => {
            let artifacts = outputs.finish("simulate", seed, "blow_up")?;
            Err(RunError::BlowUp { t, artifacts })
        }
        Err(e) => Err(e.into()),
    }
}
