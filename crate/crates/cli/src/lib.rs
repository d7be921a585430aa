//! Batch driver: `simulate`, `analyze`, `fit`, `sample` and `report`.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

pub mod analyze;
pub mod config;
pub mod fit;
pub mod report;
pub mod sample;
pub mod simulate;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad flags, unreadable or invalid configuration, missing input paths.
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Data(fdsi::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(fdsi::Error::NonConvergence(_)) => 4,
            CliError::Data(_) => 3,
        }
    }

    pub(crate) fn config(e: impl std::fmt::Display) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<fdsi::Error> for CliError {
    fn from(e: fdsi::Error) -> Self {
        CliError::Data(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(fdsi::Error::Io(e))
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "fdsi", version, about = "Self-interference INR simulation, analysis and modeling")]
pub struct Cli {
    /// Worker threads (default: all available cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a beamformed INR grid over a spherical-wave channel.
    Simulate(simulate::SimulateArgs),
    /// Neighborhood statistics, per-beam summaries and CDF exports for a grid.
    Analyze(analyze::AnalyzeArgs),
    /// Fit global and neighborhood models to a grid, or one family to samples.
    Fit(fit::FitArgs),
    /// Draw from the embedded models.
    Sample(sample::SampleArgs),
    /// Headline statistics of a grid.
    Report(report::ReportArgs),
}

/// Provenance stamped into every output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: Option<u64>,
}

impl Metadata {
    pub fn new(argv: &[String], seed: Option<u64>) -> Self {
        Self {
            tool: "fdsi".into(),
            version: VERSION.into(),
            command: argv
                .iter()
                .enumerate()
                .map(|(k, a)| match (k, Path::new(a).file_name()) {
                    (0, Some(name)) => name.to_string_lossy().into_owned(),
                    _ => a.clone(),
                })
                .collect::<Vec<_>>()
                .join(" "),
            seed,
        }
    }

    pub fn comment_lines(&self) -> Vec<String> {
        vec![
            format!("{} {}", self.tool, self.version),
            format!("command: {}", self.command),
            format!(
                "seed: {}",
                self.seed.map_or_else(|| "none".to_string(), |s| s.to_string())
            ),
        ]
    }

    pub fn write_comments<W: Write>(&self, out: &mut W, extra: &[String]) -> std::io::Result<()> {
        for line in self.comment_lines().iter().chain(extra) {
            writeln!(out, "# {line}")?;
        }
        Ok(())
    }
}

pub(crate) fn require_file(path: &Path, what: &str) -> CliResult<()> {
    if !path.is_file() {
        return Err(CliError::Config(format!("{what} `{}` does not exist", path.display())));
    }
    Ok(())
}

pub(crate) fn require_parent(path: &Path) -> CliResult<()> {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() && !p.is_dir() => Err(CliError::Config(format!(
            "output directory `{}` does not exist",
            p.display()
        ))),
        _ => Ok(()),
    }
}

pub(crate) fn create(path: &Path) -> CliResult<std::io::BufWriter<std::fs::File>> {
    Ok(std::io::BufWriter::with_capacity(1 << 20, std::fs::File::create(path)?))
}

/// Opens a CSV output and writes the metadata block and header row.
pub(crate) fn table(
    path: &Path,
    meta: &Metadata,
    extra: &[String],
    header: &[&str],
) -> CliResult<std::io::BufWriter<std::fs::File>> {
    let mut out = create(path)?;
    meta.write_comments(&mut out, extra)?;
    writeln!(out, "{}", header.join(","))?;
    Ok(out)
}

pub(crate) fn write_json(path: &Path, value: &impl Serialize) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(fdsi::Error::from)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

pub(crate) fn sidecar(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

/// Runs a parsed command line. `argv` is recorded verbatim in output metadata.
pub fn run(cli: Cli, argv: &[String]) -> CliResult<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be positive".into()));
        }
        if rayon::ThreadPoolBuilder::new().num_threads(n).build_global().is_err() {
            log::debug!("global thread pool already initialized");
        }
    }
    match cli.command {
        Command::Simulate(a) => simulate::cmd_simulate(&a, argv),
        Command::Analyze(a) => analyze::cmd_analyze(&a, argv),
        Command::Fit(a) => fit::cmd_fit(&a, argv),
        Command::Sample(a) => sample::cmd_sample(&a, argv),
        Command::Report(a) => report::cmd_report(&a, argv),
    }
}

/// Parses and runs `argv` (including the program name), returning the exit code.
pub fn main_with_args(argv: Vec<String>) -> i32 {
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli, &argv) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
