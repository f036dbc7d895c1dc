use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use voigt_cli::{parse_config, run, ConfigError, RunError};

/// Pseudo-spectral Euler / Euler-Voigt / Navier-Stokes-Voigt experiments on the 3-torus.
#[derive(Parser)]
#[command(name = "voigt", version)]
struct Args {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides `out` in the config; default `out`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for random data (overrides `seed` in the config).
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let args = Args::parse();
    match execute(&args) {
        Ok(paths) => {
            for p in paths {
                log::info!("wrote {}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            if let RunError::BlowUp { artifacts, .. } = &e {
                for p in artifacts {
                    log::info!("wrote {}", p.display());
                }
            }
            log::error!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(args: &Args) -> Result<Vec<PathBuf>, RunError> {
    if let Some(n) = args.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| ConfigError::Syntax(format!("--threads: {e}")))?;
    }
    let text = std::fs::read_to_string(&args.config).map_err(|source| RunError::Io {
        path: args.config.clone(),
        source,
    })?;
    let mut config = parse_config(&text)?;
    if let Some(seed) = args.seed {
        config.seed = seed;
        config.command.set_seed(seed);
    }
    let out = args
        .out
        .clone()
        .or_else(|| config.out.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    let base = args.config.parent().map(PathBuf::from).unwrap_or_default();
    run(&config, &base, &out)
}
