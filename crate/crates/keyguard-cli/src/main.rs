//! keyguard: replay keystroke scenarios against keylogger IMEs, quantify
//! leakage with the defense on or off, and benchmark the hook path.
//!
//! Exit codes: 0 success, 2 invalid scenario, 3 defense desync fault.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use keyguard::analysis::bench::run_latency_bench;
use keyguard::report::{emit_report, ReportFormat, RunReport};
use keyguard::runner::{run_scenario, RunOptions};
use keyguard::scenario::Scenario;
use keyguard::Error;

#[derive(Parser)]
#[command(name = "keyguard", version, about = "Selective keystroke encryption simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Machine,
}

impl Format {
    fn to_report_format(self) -> ReportFormat {
        match self {
            Format::Text => ReportFormat::Text,
            Format::Machine => ReportFormat::Machine,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Replay a scenario and report what the adversary captured
    Run {
        scenario: PathBuf,
        /// Rerun the identical trace with an empty hook registry and
        /// include the passthrough comparison
        #[arg(long)]
        paired: bool,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        /// Write the report to a file instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Time the onKey/onUpdateSelection dispatch paths, hooked vs. unhooked
    Bench {
        scenario: PathBuf,
        /// Timed repetitions of the whole trace (one warmup pair discarded)
        #[arg(long)]
        reps: usize,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Parse and validate a scenario file
    Validate { scenario: PathBuf },
}

const EXIT_INVALID_SCENARIO: u8 = 2;
const EXIT_DESYNC: u8 = 3;

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::ScenarioParse(_) | Error::ScenarioInvalid(_) | Error::Io(_) => {
            EXIT_INVALID_SCENARIO
        }
        Error::DesyncDetected { .. } => EXIT_DESYNC,
        _ => 1,
    }
}

fn deliver(report: &RunReport, format: Format, out: Option<&Path>) -> std::io::Result<()> {
    let rendered = emit_report(report, format.to_report_format());
    match out {
        Some(path) => {
            std::fs::write(path, rendered.as_bytes())?;
            eprintln!("report written to {}", path.display());
        }
        None => print!("{rendered}"),
    }
    Ok(())
}

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        Command::Run {
            scenario,
            paired,
            format,
            out,
        } => {
            let scenario = Scenario::load(&scenario)?;
            let report = run_scenario(
                &scenario,
                &RunOptions {
                    paired_baseline: paired,
                },
            )?;
            deliver(&report, format, out.as_deref())?;
            Ok(if report.desync { EXIT_DESYNC } else { 0 })
        }
        Command::Bench {
            scenario,
            reps,
            format,
            out,
        } => {
            let scenario = Scenario::load(&scenario)?;
            let stats = run_latency_bench(&scenario, reps)?;
            let mut report = run_scenario(&scenario, &RunOptions::default())?;
            report.latency = Some(stats);
            deliver(&report, format, out.as_deref())?;
            Ok(if report.desync { EXIT_DESYNC } else { 0 })
        }
        Command::Validate { scenario: path } => {
            let scenario = Scenario::load(&path)?;
            println!(
                "ok: {} ({} key events, digest {})",
                path.display(),
                scenario.key_event_count(),
                &scenario.digest()[..12]
            );
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
