//! `dnls-ist`: run the scattering pipeline, the reference stepper and the
//! acceptance presets from the command line.
//!
//! Exit codes: 0 success, 2 usage or I/O error, 3 data error (spectral
//! condition, admissibility, malformed input), 4 convergence or accuracy
//! failure.

mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dnls_ist::IstError;

use commands::{Eq, Via};
use config::{GridSpec, Preset, RunConfig, Samples, TolOverride, Tolerances};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(String),
    #[error(transparent)]
    Ist(#[from] IstError),
    #[error("{0}")]
    DataCheck(String),
    #[error("{0}")]
    Accuracy(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Io(_) | CliError::Ist(IstError::Io(_)) => 2,
            CliError::DataCheck(_) => 3,
            CliError::Ist(e) if e.is_data_error() => 3,
            CliError::Ist(_) | CliError::Accuracy(_) => 4,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "dnls-ist", version, about = "Inverse scattering solver for the derivative NLS equation")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Input CSV: a potential (x,re_q,im_q) or, for `inverse` and `check`,
    /// scattering data (lambda,re_rho,im_rho[,alpha,beta columns])
    #[arg(long, global = true)]
    input: Option<PathBuf>,

    /// Output directory (created if missing)
    #[arg(long, global = true, env = "DNLS_IST_OUT", default_value = ".")]
    output: PathBuf,

    /// Initial potential when no --input is given [default: gaussian-small]
    #[arg(long, global = true, value_enum)]
    preset: Option<Preset>,

    /// Spatial grid for presets, as L:N
    #[arg(long, global = true, default_value = "16:1024")]
    grid: GridSpec,

    /// Tolerance override key=value (keys: ode, krylov, det, roundtrip, truncation); repeatable
    #[arg(long = "tol", global = true)]
    tol: Vec<TolOverride>,

    /// Cap on worker threads
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Potential -> scattering data (rho, alpha, beta)
    Direct,
    /// Scattering data -> potential
    Inverse {
        /// Evaluate at lo:hi:n instead of the dual spatial grid
        #[arg(long, allow_hyphen_values = true)]
        xs: Option<Samples>,
    },
    /// Evolve a potential to time t
    Evolve {
        #[arg(long = "t", default_value_t = 0.5)]
        t: f64,
        #[arg(long, value_enum, default_value = "ist")]
        via: Via,
        #[arg(long = "eq", value_enum, default_value = "dnls2")]
        equation: Eq,
        /// Step of the reference stepper
        #[arg(long, default_value_t = 1e-4)]
        dt: f64,
    },
    /// Reference pseudospectral stepper with conservation diagnostics
    Oracle {
        #[arg(long = "t", default_value_t = 1.0)]
        t: f64,
        #[arg(long = "eq", value_enum, default_value = "dnls2")]
        equation: Eq,
        #[arg(long, default_value_t = 1e-4)]
        dt: f64,
    },
    /// Direct map followed by the inverse map, with error norms
    Roundtrip,
    /// Spectral condition and determinant identity of scattering data
    Check,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let c = cli.common;
    if c.input.is_some() && c.preset.is_some() {
        return Err(CliError::Usage("--input and --preset are mutually exclusive".into()));
    }
    if let Some(n) = c.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        #[cfg(feature = "parallel")]
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    std::fs::create_dir_all(&c.output).map_err(|e| CliError::Io(format!("{}: {e}", c.output.display())))?;
    let cfg = RunConfig {
        grid: c.grid,
        tolerances: Tolerances::with_overrides(&c.tol),
        preset: c.preset,
        input: c.input,
        output: c.output,
        threads: c.threads,
    };
    match cli.command {
        Command::Direct => commands::direct(&cfg),
        Command::Inverse { xs } => commands::inverse(&cfg, xs),
        Command::Evolve { t, via, equation, dt } => commands::evolve(&cfg, t, dt, equation, via),
        Command::Oracle { t, equation, dt } => commands::oracle(&cfg, t, dt, equation),
        Command::Roundtrip => commands::roundtrip(&cfg),
        Command::Check => commands::check(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
