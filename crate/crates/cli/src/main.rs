use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gradspace_cli::commands::{certify, run_problem, RunOptions};
use gradspace_cli::problem::Family;
use gradspace_cli::selftest::selftest;

#[derive(Parser)]
#[command(name = "gradspace", version, about = "Minimal-gradient variational solvers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve any problem file.
    Solve(RunArgs),
    /// Minimize a Rayleigh quotient.
    Rayleigh(RunArgs),
    /// Lattice maximum or minimum.
    Lattice(RunArgs),
    /// Minimal metric gradient of a function.
    Gradient(RunArgs),
    /// Re-check the report in `--out` against the problem file.
    Certify(RunArgs),
    /// Run the stored example problems.
    Selftest,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
}

#[derive(Args)]
struct RunArgs {
    problem: PathBuf,
    /// Directory for report.toml and the CSV fields.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Objective and feasibility tolerance.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long = "max-iter")]
    max_iter: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Field format.
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

impl RunArgs {
    fn options(&self) -> RunOptions {
        let Format::Csv = self.format;
        RunOptions {
            out: self.out.clone(),
            tol: self.tol,
            max_iter: self.max_iter,
            seed: self.seed,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 4 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Solve(a) => run_problem(&a.problem, Family::Any, &a.options()),
        Command::Rayleigh(a) => run_problem(&a.problem, Family::Rayleigh, &a.options()),
        Command::Lattice(a) => run_problem(&a.problem, Family::Lattice, &a.options()),
        Command::Gradient(a) => run_problem(&a.problem, Family::Gradient, &a.options()),
        Command::Certify(a) => certify(&a.problem, &a.options()).map(|()| 0),
        Command::Selftest => Ok(if selftest() { 0 } else { 5 }),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
