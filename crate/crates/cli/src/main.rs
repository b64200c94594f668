//! `discstat`: command-line front end. Each subcommand reads one flat JSON
//! config, writes its artifacts plus the resolved config and a version stamp
//! to the output directory, and prints a single-line JSON summary.
//!
//! Exit codes: 0 success, 1 computational failure, 2 configuration error.

mod commands;
mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use discstat::io::VERSION_STAMP;
use serde_json::{json, Value};

use config::ExperimentConfig;

/// Overrides the output directory when `--out` is not given.
const OUT_DIR_ENV: &str = "DISCSTAT_OUT_DIR";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] discstat::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use discstat::Error as E;
        match self {
            CliError::Config(_) => 2,
            CliError::Core(E::InvalidInput(_) | E::Mask(_) | E::Io(_)) => 2,
            CliError::Core(_) => 1,
        }
    }
}

#[derive(Parser)]
#[command(name = "discstat", version, about = "Stationary patterns of reaction-diffusion-ODE systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Flat JSON experiment config.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; beats the environment override and the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker thread cap; results do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand, Clone)]
enum Command {
    /// Constant steady states with Jacobian entries.
    Steady(Common),
    /// Nullcline branches sampled over the window.
    Branches(Common),
    /// Bifurcation diffusion values; continuation when `amplitudes` is set.
    Bifurcate(Common),
    /// Jump-discontinuous stationary field.
    Construct(Common),
    /// Signed margins of the stability hypotheses.
    Audit(Common),
    /// Rightmost eigenvalues of the linearization.
    Spectrum(Common),
    /// Explicit time stepping from a perturbed stationary state.
    Simulate(Common),
    /// Predator-prey run on the EY mask.
    Ey(Common),
    /// Decay of a random perturbation of a stationary field.
    Decay(Common),
}

impl Command {
    fn parts(&self) -> (&'static str, &Common) {
        match self {
            Command::Steady(c) => ("steady", c),
            Command::Branches(c) => ("branches", c),
            Command::Bifurcate(c) => ("bifurcate", c),
            Command::Construct(c) => ("construct", c),
            Command::Audit(c) => ("audit", c),
            Command::Spectrum(c) => ("spectrum", c),
            Command::Simulate(c) => ("simulate", c),
            Command::Ey(c) => ("ey", c),
            Command::Decay(c) => ("decay", c),
        }
    }
}

type Runner = fn(&ExperimentConfig, &Path) -> Result<commands::Summary, CliError>;

fn runner(name: &str) -> Runner {
    match name {
        "steady" => commands::steady,
        "branches" => commands::branches,
        "bifurcate" => commands::bifurcate,
        "construct" => commands::construct,
        "audit" => commands::audit,
        "spectrum" => commands::spectrum,
        "simulate" => commands::simulate,
        "ey" => commands::ey,
        _ => commands::decay,
    }
}

fn resolve(name: &str, common: &Common) -> Result<(ExperimentConfig, PathBuf), CliError> {
    let mut cfg = ExperimentConfig::load(&common.config)?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    let out = common
        .out
        .clone()
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .or_else(|| cfg.out.clone())
        .unwrap_or_else(|| PathBuf::from("out").join(name));
    cfg.out = Some(out.clone());
    if let Some(n) = common.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    Ok((cfg, out))
}

fn execute(name: &str, common: &Common) -> Result<(PathBuf, commands::Summary), CliError> {
    let (cfg, out) = resolve(name, common)?;
    let summary = runner(name)(&cfg, &out)?;
    discstat::io::write_bytes(&out.join("config.json"), cfg.to_json().as_bytes())?;
    discstat::io::write_bytes(&out.join("VERSION"), format!("{VERSION_STAMP}\n").as_bytes())?;
    Ok((out, summary))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            eprint!("{e}");
            println!("{}", json!({ "status": "error", "exit_code": 2, "error": e.kind().to_string() }));
            return ExitCode::from(2);
        }
    };
    let (name, common) = cli.command.parts();
    match execute(name, common) {
        Ok((out, summary)) => {
            let mut line = json!({ "command": name, "status": "ok", "out": out });
            if let Value::Object(m) = &mut line {
                m.extend(summary);
            }
            println!("{line}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            let code = e.exit_code();
            eprintln!("discstat {name}: {e}");
            println!(
                "{}",
                json!({ "command": name, "status": "error", "exit_code": code, "error": e.to_string() })
            );
            ExitCode::from(code)
        }
    }
}
