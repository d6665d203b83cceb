use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use cselfdual::commands::{self, exit, CmdError, CmdResult, Settings};
use cselfdual::report::RunReport;
use cselfdual::selftest::selftest;

/// Metric c-convex analysis on finite spaces.
#[derive(Parser, Debug)]
#[command(name = "cselfdual", version)]
struct Cli {
    /// Absolute tolerance for equality tests and synthesis.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,
    /// Seed for every random generator; required by `selftest`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Write the JSON report to this path.
    #[arg(long, global = true, value_name = "PATH")]
    json_out: Option<PathBuf>,
    /// Iteration cap for the selfdual synthesis.
    #[arg(long, global = true, default_value_t = 10_000)]
    max_iter: usize,
    /// Record wall-clock timings in the report (makes it non-reproducible).
    #[arg(long, global = true)]
    timings: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Check c-monotonicity (and optionally cyclic monotonicity, maximality) of a relation.
    CheckMonotone {
        instance: PathBuf,
        /// Also check c-cyclic monotonicity up to this cycle length.
        #[arg(long)]
        order: Option<usize>,
        /// Also search for admissible extensions.
        #[arg(long)]
        maximal: bool,
    },
    /// Build the selfdual Lagrangian representing a maximal c-monotone relation.
    Represent { instance: PathBuf },
    /// Symmetric transport of a map T and its monotone rearrangement.
    Rearrange { instance: PathBuf },
    /// Solve an inclusion by minimizing I_p or via a c-skew map.
    Invert { instance: PathBuf },
    /// Run the acceptance suite.
    Selftest,
}

fn read(path: &Path) -> Result<String, CmdError> {
    std::fs::read_to_string(path).map_err(|e| CmdError {
        code: exit::INPUT,
        message: format!("cannot read {}: {e}", path.display()),
    })
}

/// The invocation as recorded in reports; the output path is left out so
/// that it does not affect the report bytes.
fn echo() -> Vec<String> {
    let mut out = Vec::new();
    let mut args = std::env::args().skip(1);
    while let Some(a) = args.next() {
        if a == "--json-out" {
            args.next();
        } else if a.starts_with("--json-out=") || a == "--timings" {
        } else {
            out.push(a);
        }
    }
    out
}

fn run(cli: &Cli) -> CmdResult {
    let s = Settings { tol: cli.tol, max_iter: cli.max_iter };
    if !(cli.tol.is_finite() && cli.tol >= 0.0) {
        return Err(CmdError { code: exit::INPUT, message: "--tol must be a finite non-negative number".into() });
    }
    let command = echo();
    match &cli.cmd {
        Cmd::CheckMonotone { instance, order, maximal } => {
            commands::check_monotone(&read(instance)?, command, *order, *maximal, s)
        }
        Cmd::Represent { instance } => commands::represent(&read(instance)?, command, s),
        Cmd::Rearrange { instance } => commands::rearrange(&read(instance)?, command, s),
        Cmd::Invert { instance } => commands::invert(&read(instance)?, command, s),
        Cmd::Selftest => {
            let seed = cli.seed.ok_or_else(|| CmdError {
                code: exit::INPUT,
                message: "selftest needs --seed".into(),
            })?;
            Ok(selftest(seed, cli.max_iter, command, cli.timings))
        }
    }
}

fn write_report(path: &Path, rep: &RunReport) -> Result<(), CmdError> {
    std::fs::write(path, rep.to_json()).map_err(|e| CmdError {
        code: exit::INPUT,
        message: format!("cannot write {}: {e}", path.display()),
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match run(&cli) {
        Ok(rep) => {
            print!("{}", rep.summary());
            match cli.json_out.as_deref().map(|p| write_report(p, &rep)) {
                Some(Err(e)) => {
                    eprintln!("error: {e}");
                    e.code
                }
                _ if rep.passed => exit::PASS,
                _ => exit::ASSERTION,
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            if let Some(p) = &cli.json_out {
                let mut rep = RunReport::new(echo());
                rep.passed = false;
                rep.warn(format!("exit {}: {}", e.code, e.message));
                let _ = write_report(p, &rep);
            }
            e.code
        }
    };
    ExitCode::from(code as u8)
}
