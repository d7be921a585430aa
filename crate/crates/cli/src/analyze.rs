use std::io::Write;
use std::path::{Path, PathBuf};

use clap::Args;
use fdsi::geometry::DirectionGrid;
use fdsi::grid::{load_grid, InrGrid, Side};
use fdsi::neighborhood::{pair_neighborhood_stats, per_beam_summary, threshold_fraction, BeamSummary, NeighborhoodSpec};
use fdsi::stats::EmpiricalCdf;
use serde::Serialize;

use crate::{require_file, table, write_json, CliError, CliResult, Metadata};

#[derive(Debug, Clone, Args)]
pub struct AnalyzeArgs {
    /// Grid to analyze (CSV, or `.bin` cache).
    #[arg(long)]
    pub grid: PathBuf,
    /// Output directory; created if missing.
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Neighborhood `DTHETA,DPHI` in degrees; repeatable. Defaults to 0,0 through 5,5.
    #[arg(long = "neighborhood", value_name = "DTHETA,DPHI")]
    pub neighborhoods: Vec<NeighborhoodSpec>,
    /// Per-beam INR thresholds (dB).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "10,20,30")]
    pub thresholds: Vec<f64>,
    /// Threshold applied to neighborhood minima (dB).
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    pub neighborhood_threshold: f64,
    /// Also write per-pair min/max/range for every neighborhood.
    #[arg(long)]
    pub pair_stats: bool,
    /// Points per exported empirical CDF.
    #[arg(long, default_value_t = 10_000)]
    pub cdf_points: usize,
}

#[derive(Debug, Serialize)]
struct SpecSummary {
    dtheta_deg: u32,
    dphi_deg: u32,
    median_min_db: f64,
    median_max_db: f64,
    median_rng_db: f64,
    mean_rng_db: f64,
    /// Fraction of pairs whose neighborhood offers INR at or below the threshold.
    fraction_min_at_most: f64,
}

#[derive(Debug, Serialize)]
struct AnalysisSummary {
    metadata: Metadata,
    grid: String,
    shape: [usize; 4],
    pairs: usize,
    min_inr_db: f64,
    median_inr_db: f64,
    max_inr_db: f64,
    neighborhood_threshold_db: f64,
    /// Whether tx and rx per-beam summaries agree exactly; absent when the lattices differ.
    tx_rx_symmetric: Option<bool>,
    neighborhoods: Vec<SpecSummary>,
}

fn default_specs() -> Vec<NeighborhoodSpec> {
    (0..=5).map(|d| NeighborhoodSpec::new(d, d)).collect()
}

fn lattice(grid: &InrGrid, side: Side) -> &DirectionGrid {
    match side {
        Side::Tx => grid.tx_grid(),
        Side::Rx => grid.rx_grid(),
    }
}

fn beam_label(grid: &InrGrid, side: Side, beam: usize) -> String {
    let d = lattice(grid, side).direction(beam);
    format!("{},{},{}", side.as_str(), d.azimuth_deg(), d.elevation_deg())
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn write_cdf<W: Write>(out: &mut W, quantity: &str, spec: NeighborhoodSpec, values: &[f64], points: usize) -> CliResult<f64> {
    let cdf = EmpiricalCdf::new(values.to_vec())?;
    for (x, p) in cdf.decimated(points) {
        writeln!(out, "{quantity},{},{},{x},{p}", spec.dtheta_deg, spec.dphi_deg)?;
    }
    Ok(cdf.median())
}

pub fn cmd_analyze(args: &AnalyzeArgs, argv: &[String]) -> CliResult<()> {
    require_file(&args.grid, "grid")?;
    if args.cdf_points == 0 {
        return Err(CliError::Config("--cdf-points must be positive".into()));
    }
    if args.thresholds.iter().any(|t| !t.is_finite()) || !args.neighborhood_threshold.is_finite() {
        return Err(CliError::Config("thresholds must be finite".into()));
    }
    let specs = if args.neighborhoods.is_empty() { default_specs() } else { args.neighborhoods.clone() };
    std::fs::create_dir_all(&args.out_dir)?;
    let grid = load_grid(&args.grid)?;
    let meta = Metadata::new(argv, None);
    analyze_grid(&grid, &specs, args, &meta, &args.out_dir)
}

fn analyze_grid(grid: &InrGrid, specs: &[NeighborhoodSpec], args: &AnalyzeArgs, meta: &Metadata, dir: &Path) -> CliResult<()> {
    let sides = [Side::Tx, Side::Rx];

    let summaries: Vec<Vec<BeamSummary>> = sides.iter().map(|s| per_beam_summary(grid, *s)).collect();
    let mut out = table(&dir.join("beam_summary.csv"), meta, &[], &["side", "az_deg", "el_deg", "max_db", "median_db", "min_db"])?;
    for (side, rows) in sides.iter().zip(&summaries) {
        for (b, s) in rows.iter().enumerate() {
            writeln!(out, "{},{},{},{}", beam_label(grid, *side, b), s.max_db, s.median_db, s.min_db)?;
        }
    }
    out.flush()?;
    let tx_rx_symmetric = (grid.tx_grid() == grid.rx_grid()).then(|| summaries[0] == summaries[1]);

    let mut out = table(&dir.join("threshold_fraction.csv"), meta, &[], &["side", "az_deg", "el_deg", "threshold_db", "fraction"])?;
    for side in sides {
        for t in &args.thresholds {
            for (b, f) in threshold_fraction(grid, side, *t).iter().enumerate() {
                writeln!(out, "{},{t},{f}", beam_label(grid, side, b))?;
            }
        }
    }
    out.flush()?;

    let mut fractions = table(
        &dir.join("neighborhood_fraction.csv"),
        meta,
        &[],
        &["side", "az_deg", "el_deg", "dtheta_deg", "dphi_deg", "threshold_db", "fraction"],
    )?;
    let mut cdf = table(&dir.join("cdf.csv"), meta, &[], &["quantity", "dtheta_deg", "dphi_deg", "value_db", "probability"])?;
    let median_inr_db = write_cdf(&mut cdf, "inr", NeighborhoodSpec::new(0, 0), grid.values(), args.cdf_points)?;

    let thr = args.neighborhood_threshold;
    let mut spec_summaries = Vec::with_capacity(specs.len());
    for spec in specs {
        log::info!("neighborhood {spec}");
        let stats = pair_neighborhood_stats(grid, *spec);
        for side in sides {
            for (b, f) in stats.threshold_fraction(side, thr).iter().enumerate() {
                writeln!(fractions, "{},{},{},{thr},{f}", beam_label(grid, side, b), spec.dtheta_deg, spec.dphi_deg)?;
            }
        }
        let median_min_db = write_cdf(&mut cdf, "inr-min", *spec, stats.inr_min_db(), args.cdf_points)?;
        let median_max_db = write_cdf(&mut cdf, "inr-max", *spec, stats.inr_max_db(), args.cdf_points)?;
        let median_rng_db = write_cdf(&mut cdf, "inr-rng", *spec, stats.inr_rng_db(), args.cdf_points)?;
        let below = stats.inr_min_db().iter().filter(|v| **v <= thr).count();
        spec_summaries.push(SpecSummary {
            dtheta_deg: spec.dtheta_deg,
            dphi_deg: spec.dphi_deg,
            median_min_db,
            median_max_db,
            median_rng_db,
            mean_rng_db: mean(stats.inr_rng_db()),
            fraction_min_at_most: below as f64 / grid.len() as f64,
        });

        if args.pair_stats {
            let path = dir.join(format!("pairs_{}_{}.csv", spec.dtheta_deg, spec.dphi_deg));
            let mut out = table(
                &path,
                meta,
                &[],
                &["tx_az_deg", "tx_el_deg", "rx_az_deg", "rx_el_deg", "inr_db", "inr_min_db", "inr_max_db", "inr_rng_db"],
            )?;
            let rx: Vec<String> = grid
                .rx_grid()
                .directions()
                .map(|d| format!("{},{}", d.azimuth_deg(), d.elevation_deg()))
                .collect();
            for (i, td) in grid.tx_grid().directions().enumerate() {
                for (j, rl) in rx.iter().enumerate() {
                    let k = grid.pair_index(i, j);
                    writeln!(
                        out,
                        "{},{},{rl},{},{},{},{}",
                        td.azimuth_deg(),
                        td.elevation_deg(),
                        grid.values()[k],
                        stats.inr_min_db()[k],
                        stats.inr_max_db()[k],
                        stats.inr_rng_db()[k],
                    )?;
                }
            }
            out.flush()?;
        }
    }
    fractions.flush()?;
    cdf.flush()?;

    let values = grid.values();
    write_json(
        &dir.join("summary.json"),
        &AnalysisSummary {
            metadata: meta.clone(),
            grid: args.grid.display().to_string(),
            shape: grid.shape(),
            pairs: grid.len(),
            min_inr_db: values.iter().copied().fold(f64::INFINITY, f64::min),
            median_inr_db,
            max_inr_db: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            neighborhood_threshold_db: thr,
            tx_rx_symmetric,
            neighborhoods: spec_summaries,
        },
    )
}
