//! Run configuration files (TOML).
//!
//! A config names one `command` and optionally carries a table of the same name
//! with its settings; every omitted key takes its default. Unknown keys,
//! duplicate keys and out-of-range values are rejected before anything runs.

use std::fmt;
use std::path::PathBuf;

use num_complex::Complex64;
use serde::Deserialize;
use voigt_core::dynamics::ModalForcing;
use voigt_core::experiments::{ConvergenceStudySpec, InitialDatum, StudyKind};
use voigt_core::{ModelParams, StepperConfig, TorusGrid};

#[derive(Debug)]
pub enum ConfigError {
    Syntax(String),
    Invalid { key: String, constraint: String },
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Syntax(msg) => write!(f, "config error: {msg}"),
            ConfigError::Invalid { key, constraint } => write!(f, "config error: `{key}` {constraint}"),
        }
    }
}

impl std::error::Error for ConfigError {}

impl ConfigError {
    pub fn key(&self) -> Option<&str> {
        match self {
            ConfigError::Syntax(_) => None,
            ConfigError::Invalid { key, .. } => Some(key),
        }
    }
}

fn invalid(key: impl Into<String>, constraint: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        key: key.into(),
        constraint: constraint.into(),
    }
}

type Result<T> = std::result::Result<T, ConfigError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandName {
    Simulate,
    Converge,
    FilterRates,
    Periodic,
    Diagnose,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    command: CommandName,
    seed: Option<u64>,
    out: Option<PathBuf>,
    simulate: Option<RawSimulate>,
    converge: Option<RawConverge>,
    #[serde(rename = "filter-rates")]
    filter_rates: Option<RawFilterRates>,
    periodic: Option<RawPeriodic>,
    diagnose: Option<RawDiagnose>,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialSpec {
    Zero,
    TaylorGreen {
        #[serde(default = "one")]
        amplitude: f64,
    },
    Random {
        decay: f64,
        #[serde(default = "one")]
        h3_norm: f64,
    },
    Snapshot {
        path: PathBuf,
    },
}

#[derive(Clone, Debug, PartialEq, Default, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ForcingConfig {
    #[default]
    None,
    Steady {
        path: PathBuf,
    },
    ModalPeriodic {
        mode: [i64; 3],
        /// `[re, im]` per component.
        amplitude: [[f64; 2]; 3],
        omega: f64,
    },
}

impl ForcingConfig {
    pub fn modal(&self) -> Option<ModalForcing> {
        match self {
            ForcingConfig::ModalPeriodic { mode, amplitude, omega } => {
                ModalForcing::new(*mode, amplitude.map(|[re, im]| Complex64::new(re, im)), *omega).ok()
            }
            _ => None,
        }
    }
}

fn one() -> f64 {
    1.0
}

fn default_tg() -> InitialSpec {
    InitialSpec::TaylorGreen { amplitude: 1.0 }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSimulate {
    #[serde(default = "defaults::n")]
    n: usize,
    #[serde(default = "defaults::dt")]
    dt: f64,
    #[serde(default = "defaults::horizon")]
    horizon: f64,
    #[serde(default = "defaults::record_interval")]
    record_interval: usize,
    #[serde(default)]
    alpha: f64,
    #[serde(default)]
    nu: f64,
    #[serde(default = "default_tg")]
    initial: InitialSpec,
    #[serde(default)]
    forcing: ForcingConfig,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConverge {
    kind: StudyKind,
    #[serde(default)]
    alphas: Vec<f64>,
    #[serde(default)]
    betas: Vec<f64>,
    #[serde(default)]
    nus: Vec<f64>,
    #[serde(default = "defaults::m")]
    m: f64,
    #[serde(default = "defaults::horizon")]
    horizon: f64,
    #[serde(default = "defaults::n")]
    n: usize,
    #[serde(default = "defaults::dt")]
    dt: f64,
    #[serde(default = "defaults::record_interval")]
    record_interval: usize,
    #[serde(default = "default_tg")]
    initial: InitialSpec,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFilterRates {
    #[serde(default = "defaults::filter_n")]
    n: usize,
    #[serde(default = "defaults::deltas")]
    deltas: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPeriodic {
    #[serde(default = "defaults::periodic_n")]
    n: usize,
    #[serde(default = "defaults::periodic_alpha")]
    alpha: f64,
    #[serde(default = "defaults::periodic_nu")]
    nu: f64,
    period: Option<f64>,
    #[serde(default = "defaults::steps_per_period")]
    steps_per_period: usize,
    #[serde(default = "defaults::max_iters")]
    max_iters: usize,
    #[serde(default = "defaults::tol")]
    tol: f64,
    forcing: ForcingConfig,
    #[serde(default = "zero_guess")]
    initial: InitialSpec,
}

fn zero_guess() -> InitialSpec {
    InitialSpec::Zero
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDiagnose {
    snapshot: PathBuf,
    #[serde(default)]
    alpha: f64,
}

/// Defaults for omitted keys.
pub mod defaults {
    pub fn n() -> usize {
        32
    }
    pub fn dt() -> f64 {
        1e-3
    }
    pub fn horizon() -> f64 {
        0.5
    }
    pub fn record_interval() -> usize {
        10
    }
    pub fn m() -> f64 {
        2.0
    }
    pub fn filter_n() -> usize {
        64
    }
    pub fn deltas() -> Vec<f64> {
        vec![0.25, 0.125, 0.1, 0.0625, 0.05]
    }
    pub fn periodic_n() -> usize {
        16
    }
    pub fn periodic_alpha() -> f64 {
        0.1
    }
    pub fn periodic_nu() -> f64 {
        0.05
    }
    pub fn steps_per_period() -> usize {
        400
    }
    pub fn max_iters() -> usize {
        200
    }
    pub fn tol() -> f64 {
        1e-10
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimulateConfig {
    pub n: usize,
    pub dt: f64,
    pub horizon: f64,
    pub record_interval: usize,
    pub alpha: f64,
    pub nu: f64,
    pub initial: InitialSpec,
    pub forcing: ForcingConfig,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PeriodicConfig {
    pub n: usize,
    pub alpha: f64,
    pub nu: f64,
    pub period: f64,
    pub steps_per_period: usize,
    pub max_iters: usize,
    pub tol: f64,
    pub forcing: ForcingConfig,
    pub initial: InitialSpec,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DiagnoseConfig {
    pub snapshot: PathBuf,
    pub alpha: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Command {
    Simulate(SimulateConfig),
    Converge(ConvergenceStudySpec),
    FilterRates(ConvergenceStudySpec),
    Periodic(PeriodicConfig),
    Diagnose(DiagnoseConfig),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Simulate(_) => "simulate",
            Command::Converge(_) => "converge",
            Command::FilterRates(_) => "filter-rates",
            Command::Periodic(_) => "periodic",
            Command::Diagnose(_) => "diagnose",
        }
    }

    /// Propagates a seed override into the study specs that carry their own copy.
    pub fn set_seed(&mut self, seed: u64) {
        if let Command::Converge(spec) | Command::FilterRates(spec) = self {
            spec.seed = seed;
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

fn non_negative(key: &str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(invalid(key, format!("must be >= 0 (got {v})")))
    }
}

fn positive(key: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(invalid(key, format!("must be > 0 (got {v})")))
    }
}

fn grid_size(key: &str, n: usize) -> Result<()> {
    TorusGrid::new(n)
        .map(|_| ())
        .map_err(|_| invalid(key, format!("must be an even integer >= 8 (got {n})")))
}

fn at_least_one(key: &str, v: usize) -> Result<()> {
    if v >= 1 {
        Ok(())
    } else {
        Err(invalid(key, "must be >= 1"))
    }
}

fn check_sequence(key: &str, seq: &[f64], min_len: usize) -> Result<()> {
    if seq.len() < min_len {
        return Err(invalid(
            key,
            format!("needs at least {min_len} entries (got {})", seq.len()),
        ));
    }
    for (i, &v) in seq.iter().enumerate() {
        positive(&format!("{key}[{i}]"), v)?;
    }
    if seq.windows(2).any(|w| w[1] >= w[0]) {
        return Err(invalid(key, "must be strictly decreasing"));
    }
    Ok(())
}

fn check_initial(key: &str, initial: &InitialSpec) -> Result<()> {
    match initial {
        InitialSpec::Zero | InitialSpec::Snapshot { .. } => Ok(()),
        InitialSpec::TaylorGreen { amplitude } => {
            if amplitude.is_finite() {
                Ok(())
            } else {
                Err(invalid(format!("{key}.amplitude"), "must be finite"))
            }
        }
        InitialSpec::Random { decay, h3_norm } => {
            if !(decay.is_finite() && *decay > 1.5) {
                return Err(invalid(format!("{key}.decay"), format!("must be > 1.5 (got {decay})")));
            }
            non_negative(&format!("{key}.h3_norm"), *h3_norm)
        }
    }
}

fn check_forcing(key: &str, forcing: &ForcingConfig, n: usize) -> Result<()> {
    if let ForcingConfig::ModalPeriodic { mode, amplitude, omega } = forcing {
        if !omega.is_finite() {
            return Err(invalid(format!("{key}.omega"), "must be finite"));
        }
        let half = (n / 2) as i64;
        if *mode == [0, 0, 0] || mode.iter().any(|k| k.abs() >= half) {
            return Err(invalid(
                format!("{key}.mode"),
                format!("must be non-zero with every |k_j| < {half}"),
            ));
        }
        if amplitude.iter().flatten().any(|a| !a.is_finite()) {
            return Err(invalid(format!("{key}.amplitude"), "must be finite"));
        }
        if forcing.modal().is_none() {
            return Err(invalid(format!("{key}.amplitude"), "must be orthogonal to `mode`"));
        }
    }
    Ok(())
}

impl RawSimulate {
    fn validate(self) -> Result<SimulateConfig> {
        grid_size("simulate.n", self.n)?;
        positive("simulate.dt", self.dt)?;
        positive("simulate.horizon", self.horizon)?;
        at_least_one("simulate.record_interval", self.record_interval)?;
        non_negative("simulate.alpha", self.alpha)?;
        non_negative("simulate.nu", self.nu)?;
        check_initial("simulate.initial", &self.initial)?;
        check_forcing("simulate.forcing", &self.forcing, self.n)?;
        Ok(SimulateConfig {
            n: self.n,
            dt: self.dt,
            horizon: self.horizon,
            record_interval: self.record_interval,
            alpha: self.alpha,
            nu: self.nu,
            initial: self.initial,
            forcing: self.forcing,
        })
    }
}

impl RawConverge {
    fn validate(self, seed: u64) -> Result<ConvergenceStudySpec> {
        grid_size("converge.n", self.n)?;
        positive("converge.dt", self.dt)?;
        positive("converge.horizon", self.horizon)?;
        at_least_one("converge.record_interval", self.record_interval)?;
        if !(self.m.is_finite() && self.m >= 0.0) {
            return Err(invalid("converge.m", format!("must be >= 0 (got {})", self.m)));
        }
        match self.kind {
            StudyKind::AlphaOnly => check_sequence("converge.alphas", &self.alphas, 4)?,
            StudyKind::AlphaBeta | StudyKind::AlphaBetaNu => {
                check_sequence("converge.betas", &self.betas, 4)?;
                for (key, seq) in [("converge.alphas", &self.alphas), ("converge.nus", &self.nus)] {
                    if !seq.is_empty() {
                        if seq.len() != self.betas.len() {
                            return Err(invalid(key, "must have one entry per beta"));
                        }
                        for (i, &v) in seq.iter().enumerate() {
                            non_negative(&format!("{key}[{i}]"), v)?;
                        }
                    }
                }
            }
            StudyKind::FilterRates | StudyKind::ManufacturedOrder => {
                return Err(invalid(
                    "converge.kind",
                    "must be alpha_only, alpha_beta or alpha_beta_nu",
                ));
            }
        }
        if self.kind == StudyKind::AlphaOnly && (!self.betas.is_empty() || !self.nus.is_empty()) {
            return Err(invalid("converge.betas", "not used by kind alpha_only"));
        }
        check_initial("converge.initial", &self.initial)?;
        let datum = match self.initial {
            InitialSpec::TaylorGreen { amplitude } => InitialDatum::TaylorGreen { amplitude },
            InitialSpec::Random { decay, h3_norm } => InitialDatum::Random { decay, h3_norm },
            _ => return Err(invalid("converge.initial.kind", "must be taylor_green or random")),
        };
        Ok(ConvergenceStudySpec {
            kind: self.kind,
            alphas: self.alphas,
            betas: self.betas,
            nus: self.nus,
            deltas: Vec::new(),
            m: self.m,
            horizon: self.horizon,
            n: self.n,
            dt: self.dt,
            record_interval: self.record_interval,
            datum,
            seed,
        })
    }
}

impl RawFilterRates {
    fn validate(self, seed: u64) -> Result<ConvergenceStudySpec> {
        grid_size("filter-rates.n", self.n)?;
        check_sequence("filter-rates.deltas", &self.deltas, 2)?;
        Ok(ConvergenceStudySpec {
            kind: StudyKind::FilterRates,
            deltas: self.deltas,
            n: self.n,
            seed,
            ..Default::default()
        })
    }
}

impl RawPeriodic {
    fn validate(self) -> Result<PeriodicConfig> {
        grid_size("periodic.n", self.n)?;
        non_negative("periodic.alpha", self.alpha)?;
        positive("periodic.nu", self.nu)?;
        at_least_one("periodic.steps_per_period", self.steps_per_period)?;
        at_least_one("periodic.max_iters", self.max_iters)?;
        positive("periodic.tol", self.tol)?;
        check_forcing("periodic.forcing", &self.forcing, self.n)?;
        check_initial("periodic.initial", &self.initial)?;
        let forced_period = self.forcing.modal().map(|m| m.period());
        let period = match (self.period, forced_period) {
            (Some(p), _) => {
                positive("periodic.period", p)?;
                if let Some(fp) = forced_period {
                    if (fp - p).abs() > 1e-12 * p {
                        return Err(invalid("periodic.period", format!("must equal 2 pi / omega = {fp}")));
                    }
                }
                p
            }
            (None, Some(fp)) => fp,
            (None, None) => {
                return Err(invalid(
                    "periodic.period",
                    "is required unless the forcing is modal_periodic",
                ))
            }
        };
        Ok(PeriodicConfig {
            n: self.n,
            alpha: self.alpha,
            nu: self.nu,
            period,
            steps_per_period: self.steps_per_period,
            max_iters: self.max_iters,
            tol: self.tol,
            forcing: self.forcing,
            initial: self.initial,
        })
    }
}

impl PeriodicConfig {
    pub fn params(&self) -> ModelParams {
        ModelParams::new(self.alpha, self.nu).expect("validated")
    }

    pub fn stepper(&self) -> StepperConfig {
        StepperConfig::new(self.period / self.steps_per_period as f64, usize::MAX).expect("validated")
    }
}

/// Parses and fully validates a config file.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError::Syntax(e.message().to_string()))?;
    let seed = raw.seed.unwrap_or(0);
    let sections = [
        ("simulate", raw.simulate.is_some(), CommandName::Simulate),
        ("converge", raw.converge.is_some(), CommandName::Converge),
        ("filter-rates", raw.filter_rates.is_some(), CommandName::FilterRates),
        ("periodic", raw.periodic.is_some(), CommandName::Periodic),
        ("diagnose", raw.diagnose.is_some(), CommandName::Diagnose),
    ];
    for (name, present, cmd) in sections {
        if present && cmd != raw.command {
            return Err(invalid(name, "table does not match `command`"));
        }
    }
    let missing = |name: &str| invalid(name, "table is required for this command");
    let command = match raw.command {
        CommandName::Simulate => {
            let section = match raw.simulate {
                Some(s) => s,
                None => toml::from_str("").expect("all keys defaulted"),
            };
            Command::Simulate(section.validate()?)
        }
        CommandName::Converge => Command::Converge(raw.converge.ok_or_else(|| missing("converge"))?.validate(seed)?),
        CommandName::FilterRates => {
            let section = match raw.filter_rates {
                Some(s) => s,
                None => toml::from_str("").expect("all keys defaulted"),
            };
            Command::FilterRates(section.validate(seed)?)
        }
        CommandName::Periodic => Command::Periodic(raw.periodic.ok_or_else(|| missing("periodic"))?.validate()?),
        CommandName::Diagnose => {
            let d = raw.diagnose.ok_or_else(|| missing("diagnose"))?;
            non_negative("diagnose.alpha", d.alpha)?;
            Command::Diagnose(DiagnoseConfig {
                snapshot: d.snapshot,
                alpha: d.alpha,
            })
        }
    };
    Ok(RunConfig {
        command,
        seed,
        out: raw.out,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_simulate_gets_defaults() {
        let cfg = parse_config("command = \"simulate\"\n").unwrap();
        assert_eq!(cfg.seed, 0);
        let Command::Simulate(sim) = cfg.command else { panic!() };
        assert_eq!(sim.n, 32);
        assert_eq!(sim.dt, 1e-3);
        assert_eq!(sim.horizon, 0.5);
        assert_eq!(sim.alpha, 0.0);
        assert_eq!(sim.initial, InitialSpec::TaylorGreen { amplitude: 1.0 });
        assert_eq!(sim.forcing, ForcingConfig::None);
    }

    #[test]
    fn negative_alpha_names_key() {
        let err = parse_config("command = \"simulate\"\n[simulate]\nalpha = -1.0\n").unwrap_err();
        assert_eq!(err.key(), Some("simulate.alpha"));
        assert!(err.to_string().contains(">= 0"), "{err}");
    }

    #[test]
    fn duplicate_and_unknown_keys() {
        let dup = parse_config("command = \"simulate\"\n[simulate]\nn = 16\nn = 32\n").unwrap_err();
        assert!(matches!(dup, ConfigError::Syntax(_)));
        let unknown = parse_config("command = \"simulate\"\n[simulate]\nalhpa = 0.1\n").unwrap_err();
        assert!(unknown.to_string().contains("alhpa"), "{unknown}");
        let top = parse_config("command = \"simulate\"\nverbose = true\n").unwrap_err();
        assert!(top.to_string().contains("verbose"), "{top}");
    }

    #[test]
    fn missing_command() {
        let err = parse_config("seed = 3\n").unwrap_err();
        assert!(err.to_string().contains("command"), "{err}");
    }

    #[test]
    fn converge_config() {
        let text = r#"
            command = "converge"
            seed = 9
            [converge]
            kind = "alpha_only"
            alphas = [0.2, 0.1, 0.05, 0.025]
        "#;
        let cfg = parse_config(text).unwrap();
        let Command::Converge(spec) = cfg.command else { panic!() };
        assert_eq!(spec.kind, StudyKind::AlphaOnly);
        assert_eq!(spec.seed, 9);
        assert_eq!(spec.m, 2.0);

        let short = text.replace("0.05, 0.025", "0.05");
        assert_eq!(parse_config(&short).unwrap_err().key(), Some("converge.alphas"));
        let unsorted = text.replace("0.2, 0.1", "0.1, 0.2");
        assert_eq!(parse_config(&unsorted).unwrap_err().key(), Some("converge.alphas"));
        let wrong = text.replace("[converge]", "[periodic]");
        assert!(parse_config(&wrong).is_err());
    }

    #[test]
    fn forcing_and_periodic() {
        let text = r#"
            command = "periodic"
            [periodic]
            forcing = { kind = "modal_periodic", mode = [1, 0, 0], amplitude = [[0, 0], [1e-4, 0], [0, 0]], omega = 1.0 }
        "#;
        let cfg = parse_config(text).unwrap();
        let Command::Periodic(p) = cfg.command else { panic!() };
        assert!((p.period - 2.0 * std::f64::consts::PI).abs() < 1e-15);
        assert_eq!(p.initial, InitialSpec::Zero);

        let nonsolenoidal = text.replace("[[0, 0], [1e-4, 0], [0, 0]]", "[[1e-4, 0], [0, 0], [0, 0]]");
        assert_eq!(
            parse_config(&nonsolenoidal).unwrap_err().key(),
            Some("periodic.forcing.amplitude")
        );
        let inviscid = text.replace("[periodic]", "[periodic]\nnu = 0.0");
        assert_eq!(parse_config(&inviscid).unwrap_err().key(), Some("periodic.nu"));
        let mismatch = text.replace("[periodic]", "[periodic]\nperiod = 1.0");
        assert_eq!(parse_config(&mismatch).unwrap_err().key(), Some("periodic.period"));
        let extra = text.replace("omega = 1.0", "omega = 1.0, phase = 0.0");
        assert!(parse_config(&extra).is_err());
    }

    #[test]
    fn initial_variants() {
        let ok = "command = \"simulate\"\n[simulate]\ninitial = { kind = \"random\", decay = 3.0 }\n";
        let Command::Simulate(sim) = parse_config(ok).unwrap().command else {
            panic!()
        };
        assert_eq!(
            sim.initial,
            InitialSpec::Random {
                decay: 3.0,
                h3_norm: 1.0
            }
        );
        let rough = ok.replace("3.0", "1.0");
        assert_eq!(parse_config(&rough).unwrap_err().key(), Some("simulate.initial.decay"));
        let odd = "command = \"simulate\"\n[simulate]\nn = 9\n";
        assert_eq!(parse_config(odd).unwrap_err().key(), Some("simulate.n"));
    }
}
