mod commands;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use error::CliError;
use squeeze_core::propagator::{IntegratorConfig, Method};

#[derive(Parser, Debug)]
#[command(
    name = "squeeze",
    version,
    about = "Evolution matrices, stability maps and squeezing design for q'' + beta(tau) q = 0"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct GlobalOpts {
    /// Output file, or directory for `scan`. Standard output when absent.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
    /// Format written to standard output when no --out directory is given.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Seed for randomized demonstrations.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Integrator tolerance (relative and absolute).
    #[arg(long, global = true, default_value_t = 1e-10)]
    pub tol: f64,
    /// Integration method.
    #[arg(long, global = true, value_enum, default_value_t = MethodArg::Adaptive)]
    pub method: MethodArg,
    /// Steps per period for the fixed-step methods.
    #[arg(long, global = true, default_value_t = 256)]
    pub steps: usize,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodArg {
    Adaptive,
    Magnus,
    Rk4,
}

impl GlobalOpts {
    pub fn integrator(&self) -> Result<IntegratorConfig, CliError> {
        let method = match self.method {
            MethodArg::Adaptive => Method::Adaptive,
            MethodArg::Magnus => Method::FixedMagnus2,
            MethodArg::Rk4 => Method::FixedRk4,
        };
        let cfg = IntegratorConfig {
            method,
            rel_tol: self.tol,
            abs_tol: self.tol,
            steps_per_period: self.steps,
            renormalize_det: false,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Scan the (beta0, beta1) plane of the Paul profile.
    Scan(commands::ScanArgs),
    /// Propagate a profile over an interval.
    Propagate(commands::PropagateArgs),
    /// Monodromy and motion class of a periodic profile.
    Classify(commands::ClassifyArgs),
    /// Build squeezing plans and symmetric products.
    Compose(commands::ComposeArgs),
    /// Control field from a prescribed theta(tau).
    Invert(commands::InvertArgs),
    /// Convert between dimensionless and laboratory units.
    Units(commands::UnitsArgs),
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Scan(a) => commands::scan(&cli.global, a),
        Command::Propagate(a) => commands::propagate(&cli.global, a),
        Command::Classify(a) => commands::classify(&cli.global, a),
        Command::Compose(a) => commands::compose(&cli.global, a),
        Command::Invert(a) => commands::invert(&cli.global, a),
        Command::Units(a) => commands::units(&cli.global, a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
