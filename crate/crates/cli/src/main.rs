//! `maskc`: compile even-dimension unitaries into programs of phase masks
//! interleaved with a fixed mixing transform, then verify, apply, retarget,
//! and benchmark them.
//!
//! Exit codes: 0 success; 1 verify residual over tolerance; 2 invalid input;
//! 3 non-unitary matrix; 4 verification failure of a freshly written
//! program; 5 dimension mismatch. Argument errors from the parser itself
//! also exit 2.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use maskc_cli::{
    cmd_apply, cmd_bench, cmd_compile, cmd_random, cmd_retarget, cmd_verify, CompileArgs, Target,
};

#[derive(Parser)]
#[command(
    name = "maskc",
    version,
    about = "Compile unitary matrices into Fourier-and-phase-mask programs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compile an n-by-n unitary (matrix text) into a program file (JSON).
    Compile {
        /// Input matrix file.
        input: PathBuf,
        /// Output program file.
        #[arg(short, long)]
        output: PathBuf,
        /// Mixing transform the program targets.
        #[arg(long, value_enum, default_value_t = Target::Dft)]
        target: Target,
        /// Coupler global phase; only with --target mmi (default 0).
        #[arg(long, allow_negative_numbers = true)]
        zeta0: Option<f64>,
        /// Absolute residual tolerance (default 1e-9 times the dimension).
        #[arg(long)]
        tol: Option<f64>,
        /// Project near-unitary input to the nearest unitary, with a warning.
        #[arg(long)]
        project_unitary: bool,
    },
    /// Check a program file against a target matrix; print the residual.
    Verify {
        /// Program file.
        program: PathBuf,
        /// Matrix file the program claims to implement.
        matrix: PathBuf,
        /// Absolute residual tolerance (default 1e-9 times the dimension).
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Apply a program to a vector (FFT-based unless --dense).
    Apply {
        /// Program file.
        program: PathBuf,
        /// Input vector file (one complex entry per line).
        vector: PathBuf,
        /// Output vector file; standard output when omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Force the dense per-layer path for cross-checking.
        #[arg(long)]
        dense: bool,
    },
    /// Write a Haar-random n-by-n unitary in matrix text format.
    Random {
        /// Dimension (even for compilable output; odd only warns).
        n: usize,
        /// RNG seed; the output is a pure function of (n, seed).
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output matrix file.
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Time compile and per-layer apply across sizes; emit CSV.
    Bench {
        /// Comma-separated dimensions to measure.
        #[arg(long, value_delimiter = ',', default_values_t = [4usize, 8, 16, 32, 64])]
        sizes: Vec<usize>,
        /// Best-of block count for the timers.
        #[arg(long, default_value_t = 3)]
        repeats: usize,
        /// Seed for the per-size test matrices.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output CSV file; standard output when omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Rewrite a dft program for the physical coupler transform.
    Retarget {
        /// Input program file (transform must be "dft").
        program: PathBuf,
        /// Coupler global phase for the target hardware.
        #[arg(long, allow_negative_numbers = true)]
        zeta0: f64,
        /// Output program file.
        #[arg(short, long)]
        output: PathBuf,
        /// Absolute residual tolerance (default 1e-9 times the dimension).
        #[arg(long)]
        tol: Option<f64>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Compile {
            input,
            output,
            target,
            zeta0,
            tol,
            project_unitary,
        } => cmd_compile(&CompileArgs {
            input,
            output,
            target: *target,
            zeta0: *zeta0,
            tol: *tol,
            project_unitary: *project_unitary,
        }),
        Command::Verify { program, matrix, tol } => cmd_verify(program, matrix, *tol),
        Command::Apply {
            program,
            vector,
            output,
            dense,
        } => cmd_apply(program, vector, output.as_deref(), *dense),
        Command::Random { n, seed, output } => cmd_random(*n, *seed, output),
        Command::Bench {
            sizes,
            repeats,
            seed,
            output,
        } => cmd_bench(sizes, *repeats, *seed, output.as_deref()),
        Command::Retarget {
            program,
            zeta0,
            output,
            tol,
        } => cmd_retarget(program, *zeta0, output, *tol),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code as u8)
        }
    }
}
