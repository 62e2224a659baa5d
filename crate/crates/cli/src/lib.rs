//! Command-line front end: builds chains from flags or documents, runs the
//! library routines and renders versioned JSON or CSV reports.

// Comparisons like `!(x > 0.0)` are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod args;
mod build;
mod commands;
mod output;
mod sweep;

use std::ffi::OsString;
use std::fs;

use clap::error::ErrorKind;
use clap::Parser;
use lamplighter::Error;

use crate::args::{Cli, Command, Format, OutputArgs, RunArgs};
use crate::build::Settings;

pub use crate::output::Report;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// Why a command produced no report.
#[derive(Debug, Clone, PartialEq)]
pub enum Failure {
    Input(String),
    Numerical(String),
}

impl Failure {
    pub fn code(&self) -> i32 {
        match self {
            Failure::Input(_) => EXIT_INPUT,
            Failure::Numerical(_) => EXIT_NUMERICAL,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Input(m) | Failure::Numerical(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::ConvergenceFailure { .. }
            | Error::DegenerateDirichlet { .. }
            | Error::BracketViolation { .. }
            | Error::ZeroFunction => Failure::Numerical(msg),
            _ => Failure::Input(msg),
        }
    }
}

/// Exit code and captured streams of one invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Runs the command line `args`, whose first item is the program name.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => Outcome {
                    code: EXIT_OK,
                    stdout: text,
                    stderr: String::new(),
                },
                _ => Outcome {
                    code: EXIT_INPUT,
                    stdout: String::new(),
                    stderr: text,
                },
            };
        }
    };
    let (output, run_args) = match &cli.command {
        Command::Gap(a)
        | Command::Cls(a)
        | Command::Verify(a)
        | Command::Profile(a)
        | Command::EpsilonH(a) => (a.output.clone(), Some(a.run.clone())),
        Command::HypercubeCert(a) => (a.output.clone(), None),
        Command::Sweep(a) => (a.output.clone(), Some(a.run.clone())),
    };
    match execute(&cli.command, run_args.as_ref()) {
        Ok(report) => emit(report, &output),
        Err(f) => Outcome {
            code: f.code(),
            stdout: String::new(),
            stderr: format!("error: {}\n", f.message()),
        },
    }
}

fn execute(command: &Command, run: Option<&RunArgs>) -> Result<Report, Failure> {
    let settings = run.map(Settings::from_args).transpose()?;
    let work = || match command {
        Command::Gap(a) => commands::gap(a, &settings.expect("gap has run flags")),
        Command::Cls(a) => commands::cls(a, &settings.expect("cls has run flags")),
        Command::Verify(a) => commands::verify(a, &settings.expect("verify has run flags")),
        Command::Profile(a) => commands::profile(a, &settings.expect("profile has run flags")),
        Command::EpsilonH(a) => commands::epsilon_h(a, &settings.expect("epsilon-h has run flags")),
        Command::HypercubeCert(a) => commands::hypercube_cert(a),
        Command::Sweep(a) => sweep::sweep(a, &settings.expect("sweep has run flags")),
    };
    match settings.and_then(|s| s.workers) {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| Failure::Input(format!("cannot start {w} workers: {e}")))?
            .install(work),
        None => work(),
    }
}

fn emit(report: Report, output: &OutputArgs) -> Outcome {
    let format = output.format.unwrap_or(report.default_format);
    let text = match format {
        Format::Json => output::to_json(&report.body),
        Format::Csv => output::to_csv(&report.body),
    };
    let mut stderr = report
        .notes
        .iter()
        .map(|n| format!("note: {n}\n"))
        .collect::<String>();
    let stdout = match &output.out {
        Some(path) => {
            if let Err(e) = fs::write(path, &text) {
                stderr.push_str(&format!("error: cannot write {}: {e}\n", path.display()));
                return Outcome {
                    code: EXIT_INPUT,
                    stdout: String::new(),
                    stderr,
                };
            }
            String::new()
        }
        None => text,
    };
    Outcome {
        code: report.code,
        stdout,
        stderr,
    }
}
