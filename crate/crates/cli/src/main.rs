//! `sublaser`: every library computation as a subcommand, driven by one JSON
//! config with flag overrides.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;
use sublaser_core::Execution;

use config::{Format, Operation, RunConfig, Units};
use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "sublaser", version, about = "Noise spectra and protocol figures of merit of injection-locked sub-Poissonian lasers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for `simulate` and `selftest`; overrides `sim.seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file, or directory for `simulate` CSV output.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[arg(long, global = true, value_enum)]
    execution: Option<ExecutionArg>,
    /// Read grid frequencies and report `omega` in units of kappa.
    #[arg(long, global = true)]
    kappa_units: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ExecutionArg {
    Parallel,
    Sequential,
}

impl From<ExecutionArg> for Execution {
    fn from(e: ExecutionArg) -> Self {
        match e {
            ExecutionArg::Parallel => Execution::Parallel,
            ExecutionArg::Sequential => Execution::Sequential,
        }
    }
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Photon number, injection ratio and regime flags.
    SteadyState,
    /// Intracavity quadrature variance spectra.
    Spectrum,
    /// Quadrature variance spectra of the output field.
    ExternalSpectrum,
    /// Stationary phase variance of the locked laser.
    PhaseVariance,
    /// Monte-Carlo spectra of the linearized Langevin equations.
    Simulate,
    /// Duan inseparability spectrum of the two-laser source.
    Duan,
    /// Dense-coding signal-to-noise spectrum.
    DenseCodingSnr,
    /// Dense-coding Shannon information.
    DenseCodingSmi,
    /// Dimensionless Shannon information against signal bandwidth.
    SmiSweep,
    /// Teleportation fidelity spectrum.
    TeleportFidelity,
    /// Analytic versus Monte-Carlo certification at a pinned point.
    Selftest,
    /// Validate the config for the operation it names, without computing.
    CheckConfig,
}

impl Command {
    fn operation(self) -> Option<Operation> {
        Some(match self {
            Command::SteadyState => Operation::SteadyState,
            Command::Spectrum => Operation::Spectrum,
            Command::ExternalSpectrum => Operation::ExternalSpectrum,
            Command::PhaseVariance => Operation::PhaseVariance,
            Command::Simulate => Operation::Simulate,
            Command::Duan => Operation::Duan,
            Command::DenseCodingSnr => Operation::DenseCodingSnr,
            Command::DenseCodingSmi => Operation::DenseCodingSmi,
            Command::SmiSweep => Operation::SmiSweep,
            Command::TeleportFidelity => Operation::TeleportFidelity,
            Command::Selftest => Operation::Selftest,
            Command::CheckConfig => return None,
        })
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let err = CliError::new("usage", e.render().to_string().trim_end());
            eprintln!("{}", err.to_json());
            return ExitCode::from(err.exit_code());
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let Some(op) = cli.command.operation() else {
        let op = cfg
            .operation
            .ok_or_else(|| CliError::config("check-config needs a config with an `operation` field"))?;
        commands::check(op, &cfg)?;
        println!("{}", json!({ "valid": true, "operation": op.name() }));
        return Ok(ExitCode::SUCCESS);
    };

    if cli.kappa_units {
        cfg.units = Some(Units::Kappa);
    }
    if let Some(e) = cli.execution {
        cfg.execution = Some(e.into());
    }
    if cli.seed.is_some() && !matches!(op, Operation::Simulate | Operation::Selftest) {
        return Err(CliError::config(format!("--seed does not apply to `{op}`")));
    }
    let output = cfg.output.clone().unwrap_or_default();
    let format = cli.format.or(output.format).unwrap_or(op.default_format());
    if format == Format::Csv && op == Operation::Selftest {
        return Err(CliError::new("unsupported_format", "`selftest` has no CSV form"));
    }
    cfg.check_sections(op)?;

    let out = commands::run(op, &cfg, cli.seed)?;
    for w in &out.warnings {
        eprintln!("{}", json!({ "warning": w }));
    }
    let target = cli.output.or(output.path);
    output::emit(op, format, target, output::env_dir(), &out)?;
    if let Some(f) = out.failed {
        eprintln!("{}", f.to_json());
        return Ok(ExitCode::from(f.exit_code()));
    }
    Ok(ExitCode::SUCCESS)
}
