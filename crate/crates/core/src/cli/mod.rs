//! Command-line front end: convergence tables, large-step simulations, PDE
//! and BVP runs, and order-condition checks. Results are written as CSV and
//! optional SVG line charts under `--out`.

mod commands;
pub mod output;
pub mod svg;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use commands::{check_scheme_conditions, sir_simulation_stepper, simulate_until_failure, ConditionReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Numerical(String),
    #[error("i/o: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Numerical(_) | CliError::Io(_) => EXIT_FAILURE,
        }
    }
}

impl From<crate::NsfdError> for CliError {
    fn from(e: crate::NsfdError) -> Self {
        match e {
            crate::NsfdError::ParamOutOfRange(msg) => CliError::Usage(msg),
            e @ crate::NsfdError::NonIntegerStepCount { .. } => CliError::Usage(e.to_string()),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "nsfd", version, about = "Positivity-preserving NSFD integrators")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Output directory.
    #[arg(long, global = true, default_value = "./out")]
    pub out: PathBuf,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Seed for randomly sampled diagnostics.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Svg,
    Both,
}

impl Format {
    pub fn csv(self) -> bool {
        matches!(self, Format::Csv | Format::Both)
    }

    pub fn svg(self) -> bool {
        matches!(self, Format::Svg | Format::Both)
    }
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Terminal errors and observed rates against the exact SIR solution.
    SirConvergence {
        /// first, p1 … p6 or all.
        #[arg(long, default_value = "all")]
        scheme: String,
        /// Comma-separated step sizes; defaults to 0.5,0.25,0.1,1e-2,…,1e-6.
        #[arg(long, value_delimiter = ',')]
        dt: Vec<f64>,
        /// Compare with the published tables and fail on any mismatch.
        #[arg(long)]
        golden: bool,
        /// τ of the saturating perturbation in p3 and p6.
        #[arg(long, default_value_t = crate::sir::DEFAULT_TAU)]
        tau: f64,
        #[arg(long = "T", default_value_t = 1.0)]
        t_end: f64,
    },
    /// SIR trajectories for several steppers, with the exact solution.
    SirSimulate {
        /// p1 … p6, first, nsfd1, nsfd2, euler, trapezoidal.
        #[arg(long, value_delimiter = ',', default_value = "p3,euler,trapezoidal")]
        steppers: Vec<String>,
        #[arg(long, default_value_t = 2.0)]
        dt: f64,
        #[arg(long = "T", default_value_t = 100.0)]
        t_end: f64,
        #[arg(long, default_value_t = crate::sir::DEFAULT_TAU)]
        tau: f64,
    },
    /// Method-of-lines run of a named reaction-advection-diffusion model.
    PdeRun {
        /// fisher, fisher-advection, kpp or fhn.
        #[arg(long, default_value = "fisher")]
        model: String,
        /// Number of subintervals.
        #[arg(long = "M", default_value_t = 32)]
        m: usize,
        #[arg(long, default_value_t = 0.1)]
        dt: f64,
        #[arg(long = "T", default_value_t = 1.0)]
        t_end: f64,
        /// second-order, nsfd1, nsfd2, euler or trapezoidal.
        #[arg(long, default_value = "second-order")]
        stepper: String,
        /// Constant diffusion coefficient.
        #[arg(long, default_value_t = 1e-3)]
        diffusion: f64,
    },
    /// Shooting solve of u'' + λ f(u) = 0, u(0) = u(L) = 0.
    BvpSolve {
        /// bratu (f = e^u) or linear (f = u).
        #[arg(long, default_value = "bratu")]
        model: String,
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        #[arg(long = "L", default_value_t = 1.0)]
        length: f64,
        /// Slope bracket `lo,hi`.
        #[arg(long, value_delimiter = ',', default_value = "0.1,2")]
        bracket: Vec<f64>,
        #[arg(long, default_value_t = 1e-4)]
        dt: f64,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        /// Start the unshifted system from u(0) = ε instead of shifting.
        #[arg(long)]
        epsilon: Option<f64>,
    },
    /// Second-order denominator and perturbation checks at random states.
    CheckConditions {
        /// p1 … p6 or all.
        #[arg(long, default_value = "all")]
        scheme: String,
        #[arg(long, default_value_t = 100)]
        samples: usize,
    },
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, A>(args: I) -> i32
where
    I: IntoIterator<Item = A>,
    A: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match commands::execute(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
