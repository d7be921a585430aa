use std::io::Write;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use fdsi::models::{FitTables, Quantity};
use fdsi::neighborhood::NeighborhoodSpec;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::{create, require_parent, CliError, CliResult, Metadata};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SampleFormat {
    /// One value per line.
    Lines,
    Csv,
}

#[derive(Debug, Clone, Args)]
pub struct SampleArgs {
    #[arg(long)]
    pub quantity: Quantity,
    #[arg(long, value_name = "DTHETA,DPHI", default_value = "1,1")]
    pub neighborhood: NeighborhoodSpec,
    /// Nominal INR for the conditioned quantities (dB).
    #[arg(long, allow_hyphen_values = true)]
    pub inr_db: Option<f64>,
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = SampleFormat::Lines)]
    pub format: SampleFormat,
}

/// `n` seeded draws of one model quantity.
pub fn draw(args: &SampleArgs) -> CliResult<Vec<f64>> {
    let conditioned = matches!(args.quantity, Quantity::InrMinCond | Quantity::InrMaxCond);
    if conditioned != args.inr_db.is_some() {
        return Err(CliError::Config(if conditioned {
            format!("--quantity {} requires --inr-db", args.quantity)
        } else {
            format!("--inr-db does not apply to --quantity {}", args.quantity)
        }));
    }
    if args.inr_db.is_some_and(|x| !x.is_finite()) {
        return Err(CliError::Config("--inr-db must be finite".into()));
    }
    let sampler = FitTables::embedded().sampler(args.quantity, args.neighborhood, args.inr_db)?;
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    Ok(sampler.sample_iter(&mut rng).take(args.n).collect())
}

pub fn cmd_sample(args: &SampleArgs, argv: &[String]) -> CliResult<()> {
    if let Some(p) = &args.out {
        require_parent(p)?;
    }
    let values = draw(args)?;
    let meta = Metadata::new(argv, Some(args.seed));
    let mut out: Box<dyn Write> = match &args.out {
        Some(p) => Box::new(create(p)?),
        None => Box::new(std::io::BufWriter::new(std::io::stdout().lock())),
    };
    let inr = args.inr_db.map_or_else(String::new, |x| x.to_string());
    meta.write_comments(
        &mut out,
        &[format!("quantity: {} neighborhood: {} inr_db: {}", args.quantity, args.neighborhood, if inr.is_empty() { "none" } else { &inr })],
    )?;
    match args.format {
        SampleFormat::Lines => {
            for v in &values {
                writeln!(out, "{v}")?;
            }
        }
        SampleFormat::Csv => {
            writeln!(out, "quantity,dtheta_deg,dphi_deg,inr_db,value_db")?;
            let prefix = format!(
                "{},{},{},{inr}",
                args.quantity, args.neighborhood.dtheta_deg, args.neighborhood.dphi_deg
            );
            for v in &values {
                writeln!(out, "{prefix},{v}")?;
            }
        }
    }
    out.flush()?;
    Ok(())
}
