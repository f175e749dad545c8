//! `twistcalc`: verification and density pipelines driven by a config file.

mod commands;
mod config;
mod error;
mod model;
mod report;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{Formats, RunConfig};
use error::CliError;
use report::{Meta, Outcome};

#[derive(Parser, Debug)]
#[command(name = "twistcalc", version, about = "Twisted conjugation and reduced-density checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(clap::Args, Debug)]
struct Common {
    /// Run configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory, overriding `[output] directory`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 0x5eed)]
    seed: u64,
    /// csv, json or both, overriding `[output] formats`.
    #[arg(long, global = true)]
    format: Option<Formats>,
    /// Multiplies every tolerance.
    #[arg(long, global = true, default_value_t = 1.0)]
    tol_scale: f64,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Pinning, round trip, Jacobians, bound certificate and conjugation identities.
    TwistVerify,
    /// Twisted ellipticity constants and sampled margin.
    Ellipticity,
    /// One-body-block density, direct and twisted.
    Density,
    /// Density matrix at point pairs.
    Gamma,
    /// Probability current.
    Current,
    /// Derivative growth of the density along a segment.
    Analyticity,
    /// Parametrix remainder and order gain.
    Parametrix,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::TwistVerify => "twist-verify",
            Command::Ellipticity => "ellipticity",
            Command::Density => "density",
            Command::Gamma => "gamma",
            Command::Current => "current",
            Command::Analyticity => "analyticity",
            Command::Parametrix => "parametrix",
        }
    }

    fn run(self, c: &RunConfig, seed: u64) -> Result<Outcome, CliError> {
        match self {
            Command::TwistVerify => commands::twist_verify(c, seed),
            Command::Ellipticity => commands::ellipticity(c, seed),
            Command::Density => commands::density(c, seed),
            Command::Gamma => commands::gamma(c, seed),
            Command::Current => commands::current(c, seed),
            Command::Analyticity => commands::analyticity(c, seed),
            Command::Parametrix => commands::parametrix(c, seed),
        }
    }
}

fn run(cli: &Cli) -> Result<bool, CliError> {
    let o = &cli.common;
    let path = o.config.as_ref().ok_or_else(|| CliError::config("--config is required"))?;
    if !(o.tol_scale > 0.0 && o.tol_scale.is_finite()) {
        return Err(CliError::config(format!("--tol-scale must be positive, got {}", o.tol_scale)));
    }
    let bytes = std::fs::read(path).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
    let text = std::str::from_utf8(&bytes).map_err(|_| CliError::config("config is not UTF-8"))?;
    let mut cfg = RunConfig::parse(text)?;
    cfg.tolerances = cfg.tolerances.scaled(o.tol_scale);
    let hash = report::config_hash(&bytes);
    let dir = o.out.clone().unwrap_or_else(|| cfg.output.directory.clone());
    let formats = o.format.unwrap_or(cfg.output.formats);

    let outcome = cli.command.run(&cfg, o.seed)?;
    let meta = Meta { command: cli.command.name(), config_hash: &hash, seed: o.seed, tol_scale: o.tol_scale };
    let written = report::write(&dir, formats, &meta, &outcome)?;
    let mut stdout = std::io::stdout().lock();
    let _ = writeln!(stdout, "{}: {} ({})", meta.command, if outcome.passed { "pass" } else { "FAIL" }, outcome.summary);
    for p in written {
        let _ = writeln!(stdout, "  wrote {}", p.display());
    }
    Ok(outcome.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("twistcalc {}: {e}", cli.command.name());
            ExitCode::from(e.exit_code())
        }
    }
}
