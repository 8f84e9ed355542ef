mod commands;
mod error;
mod model;
mod report;

use std::f64::consts::PI;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nhphase_core::C64;

#[derive(Parser)]
#[command(name = "nhphase", version, about = "Geometric phases and adiabatic cyclic states of periodic non-Hermitian Hamiltonians")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form and numeric phases of the precessing two-level model.
    TwoLevel(CommonArgs),
    /// Closed-form phases and cyclic coefficients over a (theta, phi_i) grid.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Propagates the adiabatic cyclic state over one period and checks it returns to its ray.
    Verify(CommonArgs),
    /// Exact cyclic states from the one-period propagator.
    Floquet(CommonArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Args)]
pub struct CommonArgs {
    /// Level energy, `re` or `re,im`.
    #[arg(long = "E", value_parser = parse_complex, allow_hyphen_values = true)]
    pub energy: Option<C64>,
    #[arg(long, allow_negative_numbers = true)]
    pub theta: Option<f64>,
    /// Imaginary part of the azimuth.
    #[arg(long = "phi-i", allow_negative_numbers = true)]
    pub phi_i: Option<f64>,
    /// Precession frequency.
    #[arg(long, allow_negative_numbers = true)]
    pub omega: Option<f64>,
    /// Frame samples per period (built-in model).
    #[arg(long, default_value_t = 2048)]
    pub samples: usize,
    /// Integration steps per period.
    #[arg(long, default_value_t = 16384)]
    pub steps: usize,
    /// Mode: label 1|2 for the built-in model, 1-based frame position for a file.
    #[arg(long)]
    pub mode: Option<usize>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// JSON file of Hamiltonian samples over one period.
    #[arg(long = "hamiltonian-file")]
    pub hamiltonian_file: Option<PathBuf>,
}

#[derive(Args)]
pub struct GridArgs {
    #[arg(long, default_value_t = PI / 6.0, allow_negative_numbers = true)]
    pub theta_min: f64,
    #[arg(long, default_value_t = 5.0 * PI / 6.0, allow_negative_numbers = true)]
    pub theta_max: f64,
    #[arg(long, default_value_t = 5)]
    pub theta_count: usize,
    #[arg(long, default_value_t = -0.5, allow_negative_numbers = true)]
    pub phi_min: f64,
    #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
    pub phi_max: f64,
    #[arg(long, default_value_t = 5)]
    pub phi_count: usize,
    /// Allow theta = 0 or pi in the grid.
    #[arg(long)]
    pub allow_endpoints: bool,
}

fn parse_complex(s: &str) -> Result<C64, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |x: &str| x.parse::<f64>().map_err(|_| format!("expected `re` or `re,im`, got {s:?}"));
    match parts.as_slice() {
        [re] => Ok(C64::new(num(re)?, 0.0)),
        [re, im] => Ok(C64::new(num(re)?, num(im)?)),
        _ => Err(format!("expected `re` or `re,im`, got {s:?}")),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            // usage errors share the validation exit code
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = match &cli.command {
        Command::TwoLevel(a) => commands::two_level(a),
        Command::Sweep { common, grid } => commands::sweep(common, grid),
        Command::Verify(a) => commands::verify(a),
        Command::Floquet(a) => commands::floquet(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("nhphase: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
