//! `qutest` command line: `lint` for static checks, `run` for the
//! execution workflow. Exit codes: 0 success, 1 test failures or lint
//! errors, 2 usage errors.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use qutest_core::diag::Severity;
use qutest_core::discover::lint_paths;
use qutest_core::report::{render_console, render_junit_xml, ConsoleOptions};
use qutest_core::runner::{run, RunOptions};

#[derive(Parser)]
#[command(
    name = "qutest",
    version,
    about = "Test OpenQASM 3 programs with tests written in OpenQASM 3"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check .qasm files statically: syntax, pragma grammar, placement.
    Lint {
        /// Files or directories to scan for .qasm files.
        #[arg(required = true)]
        paths: Vec<PathBuf>,
    },
    /// Discover and execute tests, print a report, optionally write XML.
    Run {
        /// Files or directories to scan for .qasm files.
        #[arg(required = true)]
        paths: Vec<PathBuf>,
        /// Show every assertion, not just failing ones.
        #[arg(long)]
        verbose: bool,
        /// Write a JUnit-schema XML report to this file.
        #[arg(long, value_name = "FILE")]
        junit_xml: Option<PathBuf>,
        /// Master seed for tests using `seed: random`; explicit `//% seed:`
        /// pragmas still win.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads for test execution.
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        jobs: Option<u64>,
        /// Disable colored output (NO_COLOR works too).
        #[arg(long)]
        no_color: bool,
    },
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Lint { paths } => lint_command(&paths),
        Command::Run { paths, verbose, junit_xml, seed, jobs, no_color } => {
            run_command(&paths, verbose, junit_xml, seed, jobs.map(|j| j as usize), no_color)
        }
    }
}

fn lint_command(paths: &[PathBuf]) -> ExitCode {
    let files = match lint_paths(paths) {
        Ok(files) => files,
        Err(err) => {
            eprintln!("error: {err}");
            return ExitCode::from(2);
        }
    };
    let mut errors = 0usize;
    let mut warnings = 0usize;
    for (path, diags) in &files {
        for d in diags {
            println!("{}:{}", path.display(), d);
            match d.severity {
                Severity::Error => errors += 1,
                Severity::Warning => warnings += 1,
            }
        }
    }
    println!(
        "{} file(s) checked: {} error(s), {} warning(s)",
        files.len(),
        errors,
        warnings
    );
    if errors > 0 {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}

fn run_command(
    paths: &[PathBuf],
    verbose: bool,
    junit_xml: Option<PathBuf>,
    seed: Option<u64>,
    jobs: Option<usize>,
    no_color: bool,
) -> ExitCode {
    let options = RunOptions { master_seed: seed, jobs, cache_root: PathBuf::from(".") };
    let (report, code) = match run(paths, &options) {
        Ok(outcome) => outcome,
        Err(err) => {
            eprintln!("error: {err}");
            return ExitCode::from(2);
        }
    };
    print!("{}", render_console(&report, &ConsoleOptions::detect(verbose, no_color)));
    if let Some(path) = junit_xml {
        if let Err(err) = std::fs::write(&path, render_junit_xml(&report)) {
            eprintln!("error: cannot write '{}': {err}", path.display());
            return ExitCode::from(2);
        }
    }
    ExitCode::from(code.clamp(0, 255) as u8)
}
