use std::path::PathBuf;

use clap::Args;
use fdsi::beamforming::ArrayModel;
use fdsi::channel::spherical_wave_channel;
use fdsi::geometry::{Direction, GeometryConfig};
use fdsi::grid::{save_grid_binary, save_grid_csv, simulate_grid, InrGrid};
use fdsi::linkmath::LinkBudget;
use serde::Serialize;

use crate::config::{LatticeSpec, SimConfig};
use crate::{require_file, require_parent, sidecar, write_json, CliResult, Metadata};

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    /// JSON run configuration; built-in defaults when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output grid (`.bin` for the binary cache, CSV otherwise).
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    pub ptx_dbm: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub pnoise_dbm: Option<f64>,
}

#[derive(Debug, Serialize)]
struct SimulationMeta<'a> {
    metadata: &'a Metadata,
    geometry: &'a GeometryConfig,
    budget: &'a LinkBudget,
    tx_grid: &'a LatticeSpec,
    rx_grid: &'a LatticeSpec,
    calibration_db: f64,
    shape: [usize; 4],
    pairs: usize,
}

/// Builds the calibrated channel and simulates the full grid. Returns the grid
/// and the calibration gain applied.
pub fn simulate_from_config(cfg: &SimConfig) -> fdsi::Result<(InrGrid, f64)> {
    let upa = cfg.geometry.upa()?;
    let platform = cfg.geometry.platform()?;
    let channel = spherical_wave_channel(&upa, &upa, &platform)?;
    let calibration_db = match cfg.calibration.calibration_db {
        Some(c) => c,
        None => {
            let model = ArrayModel::new(&upa);
            let b = model.conjugate_weights(&Direction::broadside());
            channel.calibration_for_inr(&b, &b, &cfg.budget, cfg.calibration.reference_inr_db)?
        }
    };
    let channel = channel.with_calibration_db(calibration_db);
    let grid = simulate_grid(
        &upa,
        &upa,
        &channel,
        &cfg.budget,
        &cfg.tx_grid.build()?,
        &cfg.rx_grid.build()?,
    )?;
    Ok((grid, calibration_db))
}

pub fn cmd_simulate(args: &SimulateArgs, argv: &[String]) -> CliResult<()> {
    let mut cfg = match &args.config {
        Some(p) => {
            require_file(p, "config file")?;
            SimConfig::from_json_file(p)?
        }
        None => SimConfig::default(),
    };
    if let Some(p) = args.ptx_dbm {
        cfg.budget.ptx_dbm = p;
    }
    if let Some(p) = args.pnoise_dbm {
        cfg.budget.pnoise_dbm = p;
    }
    cfg.validate()?;
    require_parent(&args.out)?;

    let meta = Metadata::new(argv, None);
    let (grid, calibration_db) = simulate_from_config(&cfg)?;
    log::info!("simulated {} beam pairs", grid.len());

    let comments: Vec<String> = meta
        .comment_lines()
        .into_iter()
        .chain([
            format!("geometry: {}", serde_json::to_string(&cfg.geometry).map_err(fdsi::Error::from)?),
            format!("budget: {}", serde_json::to_string(&cfg.budget).map_err(fdsi::Error::from)?),
            format!("calibration_db: {calibration_db}"),
        ])
        .collect();
    if args.out.extension().and_then(|e| e.to_str()) == Some("bin") {
        save_grid_binary(&grid, &args.out)?;
    } else {
        save_grid_csv(&grid, &args.out, &comments)?;
    }
    write_json(
        &sidecar(&args.out, ".meta.json"),
        &SimulationMeta {
            metadata: &meta,
            geometry: &cfg.geometry,
            budget: &cfg.budget,
            tx_grid: &cfg.tx_grid,
            rx_grid: &cfg.rx_grid,
            calibration_db,
            shape: grid.shape(),
            pairs: grid.len(),
        },
    )?;
    Ok(())
}
