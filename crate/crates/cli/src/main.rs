use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ptmap::experiment::{
    diff_reports, emit_report, entries, find, parse_report, run_catalog_entry, run_experiment, ExperimentConfig,
    Numeric, Pipeline, ReportFormat, ResultBody, RunOptions, RunReport,
};
use ptmap::Error;

#[derive(Parser)]
#[command(name = "ptmap", version, about = "Parallel transport map experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a JSON config.
    Run {
        config: PathBuf,
        #[command(flatten)]
        flags: RunFlags,
    },
    /// Named examples.
    Catalog {
        #[command(subcommand)]
        action: CatalogAction,
    },
    /// Compare saved reports.
    Report {
        #[command(subcommand)]
        action: ReportAction,
    },
}

#[derive(Subcommand)]
enum CatalogAction {
    List,
    Run {
        name: String,
        #[command(flatten)]
        flags: RunFlags,
    },
}

#[derive(Subcommand)]
enum ReportAction {
    /// Structural diff ignoring timing; exits 1 when the reports differ.
    Diff { a: PathBuf, b: PathBuf },
}

#[derive(Args)]
struct RunFlags {
    /// Grid cells (power of two).
    #[arg(long)]
    n: Option<usize>,
    /// Fiber modes M.
    #[arg(long)]
    modes: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Directory for report.json; the report goes to stdout otherwise.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write one CSV per spectrum (needs --out).
    #[arg(long)]
    csv: bool,
    /// Record wall-clock time in the report.
    #[arg(long)]
    timing: bool,
}

impl RunFlags {
    fn apply(&self, numeric: &mut Numeric) {
        if let Some(n) = self.n {
            numeric.n = n;
        }
        if let Some(m) = self.modes {
            numeric.modes = m;
        }
        if let Some(s) = self.seed {
            numeric.seed = s;
        }
    }
}

fn io_err(path: &Path, e: std::io::Error) -> Error {
    Error::Io(format!("{}: {e}", path.display()))
}

fn run_config(path: &Path, flags: &RunFlags) -> Result<RunReport, Error> {
    let bytes = fs::read(path).map_err(|e| io_err(path, e))?;
    let text = String::from_utf8(bytes.clone()).map_err(|_| Error::Schema("config is not UTF-8".into()))?;
    let mut config = ExperimentConfig::parse(&text)?;
    let opts = RunOptions { timing: flags.timing, source: Some(bytes) };
    if let Pipeline::Catalog(name) = &config.pipeline {
        return run_entry(name, flags, opts);
    }
    flags.apply(&mut config.numeric);
    run_experiment(&config, &opts)
}

fn run_entry(name: &str, flags: &RunFlags, opts: RunOptions) -> Result<RunReport, Error> {
    let entry = find(name)?;
    let mut numeric = entry.config().numeric;
    flags.apply(&mut numeric);
    run_catalog_entry(entry, Some(numeric), &opts)
}

fn deliver(report: &RunReport, flags: &RunFlags) -> Result<ExitCode, Error> {
    match &flags.out {
        Some(dir) => {
            let mut files = emit_report(report, ReportFormat::Json, dir)?;
            if flags.csv {
                files.extend(emit_report(report, ReportFormat::CsvSpectra, dir)?);
            }
            for item in &report.results {
                match &item.body {
                    ResultBody::Verdict { report: v } => println!("{:24} {:?}", item.key, v.verdict),
                    ResultBody::Spectrum { report: s } => {
                        println!("{:24} {} eigenvalues, tr_r {:.6e}", item.key, s.eigenvalues.len(), s.tr_r)
                    }
                    ResultBody::Error { message } => println!("{:24} error: {message}", item.key),
                }
            }
            for f in files {
                println!("wrote {}", f.display());
            }
        }
        None if flags.csv => return Err(Error::Schema("--csv needs --out".into())),
        None => print!("{}", report.to_json()),
    }
    Ok(ExitCode::from(report.exit_status() as u8))
}

fn load_report(path: &Path) -> Result<RunReport, Error> {
    parse_report(&fs::read_to_string(path).map_err(|e| io_err(path, e))?)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, flags } => run_config(&config, &flags).and_then(|r| deliver(&r, &flags)),
        Command::Catalog { action: CatalogAction::List } => {
            for e in entries() {
                println!("{:28} expect {:12} {}", e.name, format!("{:?}", e.expect).to_lowercase(), e.description);
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Catalog { action: CatalogAction::Run { name, flags } } => {
            run_entry(&name, &flags, RunOptions { timing: flags.timing, source: None }).and_then(|r| deliver(&r, &flags))
        }
        Command::Report { action: ReportAction::Diff { a, b } } => (|| {
            let diff = diff_reports(&load_report(&a)?, &load_report(&b)?);
            if diff.identical() {
                println!("identical");
                return Ok(ExitCode::SUCCESS);
            }
            for c in &diff.changes {
                println!("{c}");
            }
            println!("{} changes, max numeric deviation {:.3e}", diff.changes.len(), diff.max_numeric_deviation);
            Ok(ExitCode::from(1))
        })(),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        ExitCode::from(1)
    })
}
