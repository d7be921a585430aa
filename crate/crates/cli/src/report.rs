use std::io::Write;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use fdsi::grid::{load_grid, InrGrid};
use fdsi::stats::median;
use serde::{Deserialize, Serialize};

use crate::{create, require_file, require_parent, CliResult, Metadata};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Text,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct ReportArgs {
    #[arg(long)]
    pub grid: PathBuf,
    #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
    pub format: ReportFormat,
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Headline statistics of a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridReport {
    pub pairs: usize,
    pub min_inr_db: f64,
    pub max_inr_db: f64,
    pub median_inr_db: f64,
    /// INR > 0 dB.
    pub fraction_above_0_db: f64,
    /// INR >= 10 dB.
    pub fraction_at_least_10_db: f64,
    /// INR <= 3 dB.
    pub fraction_at_most_3_db: f64,
}

impl GridReport {
    pub fn new(grid: &InrGrid) -> Self {
        let v = grid.values();
        let n = v.len() as f64;
        let frac = |pred: fn(f64) -> bool| v.iter().filter(|x| pred(**x)).count() as f64 / n;
        Self {
            pairs: v.len(),
            min_inr_db: v.iter().copied().fold(f64::INFINITY, f64::min),
            max_inr_db: v.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            median_inr_db: median(v).expect("grids are non-empty"),
            fraction_above_0_db: frac(|x| x > 0.0),
            fraction_at_least_10_db: frac(|x| x >= 10.0),
            fraction_at_most_3_db: frac(|x| x <= 3.0),
        }
    }
}

#[derive(Serialize)]
struct JsonReport<'a> {
    metadata: &'a Metadata,
    grid: String,
    #[serde(flatten)]
    report: &'a GridReport,
}

pub fn cmd_report(args: &ReportArgs, argv: &[String]) -> CliResult<()> {
    require_file(&args.grid, "grid")?;
    if let Some(p) = &args.out {
        require_parent(p)?;
    }
    let grid = load_grid(&args.grid)?;
    let report = GridReport::new(&grid);
    let meta = Metadata::new(argv, None);

    let mut out: Box<dyn Write> = match &args.out {
        Some(p) => Box::new(create(p)?),
        None => Box::new(std::io::stdout().lock()),
    };
    match args.format {
        ReportFormat::Text => {
            meta.write_comments(&mut out, &[])?;
            writeln!(out, "grid: {}", args.grid.display())?;
            writeln!(out, "pairs: {}", report.pairs)?;
            writeln!(out, "min_inr_db: {}", report.min_inr_db)?;
            writeln!(out, "max_inr_db: {}", report.max_inr_db)?;
            writeln!(out, "median_inr_db: {}", report.median_inr_db)?;
            writeln!(out, "fraction_above_0_db: {}", report.fraction_above_0_db)?;
            writeln!(out, "fraction_at_least_10_db: {}", report.fraction_at_least_10_db)?;
            writeln!(out, "fraction_at_most_3_db: {}", report.fraction_at_most_3_db)?;
        }
        ReportFormat::Json => {
            let doc = JsonReport {
                metadata: &meta,
                grid: args.grid.display().to_string(),
                report: &report,
            };
            serde_json::to_writer_pretty(&mut out, &doc).map_err(fdsi::Error::from)?;
            writeln!(out)?;
        }
    }
    out.flush()?;
    Ok(())
}
