use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fel_core::FractalError;

mod commands;
mod render;
mod table;

/// Nested fractals: vertex sets, harmonic structures, energies and Lipschitz norms.
#[derive(Debug, Parser)]
#[command(name = "fel", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print M, L, vertex counts and the condition report.
    Describe {
        #[command(flatten)]
        fractal: FractalArg,
        /// Also solve for the harmonic structure and print the dimensions.
        #[arg(long)]
        with_ndhs: bool,
        /// Write the definition to this file.
        #[arg(long)]
        export: Option<PathBuf>,
    },
    /// Solve the renormalization fixed point and print ρ.
    SolveNdhs {
        #[command(flatten)]
        fractal: FractalArg,
        /// Write the iteration trace (iter, gap, rho_estimate) as CSV.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Energies E^(m) of one function over a range of levels.
    Energy {
        #[command(flatten)]
        fractal: FractalArg,
        #[arg(long)]
        function: String,
        /// Inclusive range `m0..n`.
        #[arg(long, value_parser = parse_levels)]
        levels: (usize, usize),
        #[command(flatten)]
        output: OutputArg,
    },
    /// Coefficients a_m and b_m of one function.
    Lipschitz {
        #[command(flatten)]
        fractal: FractalArg,
        #[arg(long)]
        function: String,
        #[arg(long)]
        mmax: usize,
        /// Approximation level n of the counting measure.
        #[arg(long)]
        level: usize,
        /// Base of the coefficients used for the norm.
        #[arg(long, default_value = "L", value_parser = ["2", "L"])]
        base: String,
        #[command(flatten)]
        output: OutputArg,
    },
    /// Compare the Lipschitz and Dirichlet norms over a corpus.
    Equivalence {
        #[command(flatten)]
        fractal: FractalArg,
        /// Corpus file; written to when combined with --generate-corpus.
        #[arg(long, required_unless_present = "generate_corpus")]
        corpus: Option<PathBuf>,
        /// Generate K harmonic functions plus the coordinate functions.
        #[arg(long, value_name = "K")]
        generate_corpus: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        mmax: usize,
        #[arg(long)]
        level: usize,
        #[command(flatten)]
        output: OutputArg,
    },
    /// Draw the m-symplices, optionally coloured by a function, as SVG.
    Render {
        #[command(flatten)]
        fractal: FractalArg,
        #[arg(long)]
        level: usize,
        #[arg(long)]
        function: Option<String>,
        #[arg(long, short)]
        output: PathBuf,
    },
}

#[derive(Debug, Args)]
struct FractalArg {
    /// Preset name (gasket2, gasket3, snowflake) or path to a definition file.
    fractal: String,
}

#[derive(Debug, Args)]
struct OutputArg {
    /// Write CSV here instead of standard output.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

fn parse_levels(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s
        .split_once("..=")
        .or_else(|| s.split_once(".."))
        .ok_or_else(|| format!("expected `m0..n`, got `{s}`"))?;
    let a: usize = a.trim().parse().map_err(|_| format!("invalid level `{a}`"))?;
    let b: usize = b.trim().parse().map_err(|_| format!("invalid level `{b}`"))?;
    if a > b {
        return Err(format!("empty level range `{s}`"));
    }
    Ok((a, b))
}

/// 1 for condition violations, 2 for numerical failures, 3 for everything else.
fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<FractalError>() {
        Some(FractalError::ConditionViolation { .. }) => 1,
        Some(e) if e.is_numerical() => 2,
        _ => 3,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(3) } else { ExitCode::SUCCESS };
        }
    };
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
