use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use fdsi::grid::{load_grid, InrGrid};
use fdsi::neighborhood::{pair_neighborhood_stats, NeighborhoodSpec};
use fdsi::stats::{fit_gamma_db_report, fit_normal_db, FitRecord, GammaFitMethod};
use serde::{Deserialize, Serialize};

use crate::{require_file, require_parent, write_json, CliError, CliResult, Metadata};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FitFamily {
    Normal,
    Gamma,
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    /// Grid to fit (CSV, or `.bin` cache).
    #[arg(long, conflicts_with = "samples", required_unless_present = "samples")]
    pub grid: Option<PathBuf>,
    /// Plain sample file: one value per line, or CSV whose last column holds the value.
    #[arg(long, requires = "family")]
    pub samples: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub family: Option<FitFamily>,
    #[arg(long)]
    pub out: PathBuf,
    /// Largest neighborhood half-width fitted, in degrees.
    #[arg(long, default_value_t = 5)]
    pub max_deg: u32,
    /// Width of the nominal-INR bins for the conditioned fits (dB).
    #[arg(long, default_value_t = 1.0)]
    pub bin_width: f64,
    /// Center of the lowest and highest nominal-INR bin (dB).
    #[arg(long, allow_hyphen_values = true, default_value_t = -20.0)]
    pub bin_min_db: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 40.0)]
    pub bin_max_db: f64,
    /// Bins with fewer samples are reported without a fit.
    #[arg(long, default_value_t = 100)]
    pub min_bin_samples: usize,
}

/// Fit for one neighborhood.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecFit {
    pub dtheta_deg: u32,
    pub dphi_deg: u32,
    pub samples: usize,
    pub fit: Option<FitRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

/// Fit of the distance from a nominal INR bin to the neighborhood extreme.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BinFit {
    pub dtheta_deg: u32,
    pub dphi_deg: u32,
    pub inr_db: f64,
    pub samples: usize,
    pub fit: Option<FitRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

/// Output of `fit --grid`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridFitDocument {
    pub metadata: Metadata,
    pub grid: String,
    pub shape: [usize; 4],
    pub pairs: usize,
    pub bin_width_db: f64,
    pub min_bin_samples: usize,
    pub global: FitRecord,
    pub range: Vec<SpecFit>,
    pub min: Vec<SpecFit>,
    pub max: Vec<SpecFit>,
    pub delta_min: Vec<BinFit>,
    pub delta_max: Vec<BinFit>,
}

/// Output of `fit --samples`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleFitDocument {
    pub metadata: Metadata,
    pub samples_file: String,
    pub samples: usize,
    pub family: FitFamily,
    pub fit: FitRecord,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<GammaFitMethod>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
}

/// Reads one value per line; `#` comments, blank lines and a non-numeric header are skipped.
pub fn read_samples(path: &Path) -> CliResult<Vec<f64>> {
    let text = std::fs::read_to_string(path)?;
    let mut values = Vec::new();
    let mut seen_data = false;
    for (k, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let field = line.rsplit(',').next().unwrap_or(line).trim();
        match field.parse::<f64>() {
            Ok(v) if v.is_finite() => values.push(v),
            _ if !seen_data => {}
            _ => {
                return Err(fdsi::Error::Parse {
                    line: k as u64 + 1,
                    message: format!("`{field}` is not a finite number"),
                }
                .into())
            }
        }
        seen_data = true;
    }
    Ok(values)
}

fn gamma_fit(samples: &[f64], min_samples: usize) -> CliResult<(Option<FitRecord>, Option<String>)> {
    if samples.len() < min_samples.max(10) {
        return Ok((None, Some(format!("{} samples", samples.len()))));
    }
    match fit_gamma_db_report(samples) {
        Ok(r) => Ok((Some(r.fit.record()), None)),
        Err(e @ (fdsi::Error::DegenerateSamples(_) | fdsi::Error::Domain(_))) => Ok((None, Some(e.to_string()))),
        Err(e) => Err(e.into()),
    }
}

/// Global, per-neighborhood and binned conditioned fits of a grid.
pub fn fit_grid(grid: &InrGrid, args: &FitArgs, meta: Metadata, source: String) -> CliResult<GridFitDocument> {
    let global = fit_normal_db(grid.values())?.record();
    let n_bins = ((args.bin_max_db - args.bin_min_db) / args.bin_width + 1e-9).floor() as usize + 1;

    let mut doc = GridFitDocument {
        metadata: meta,
        grid: source,
        shape: grid.shape(),
        pairs: grid.len(),
        bin_width_db: args.bin_width,
        min_bin_samples: args.min_bin_samples,
        global,
        range: Vec::new(),
        min: Vec::new(),
        max: Vec::new(),
        delta_min: Vec::new(),
        delta_max: Vec::new(),
    };
    for dphi in 0..=args.max_deg {
        for dtheta in 0..=args.max_deg {
            let spec = NeighborhoodSpec::new(dtheta, dphi);
            log::info!("fitting neighborhood {spec}");
            let stats = pair_neighborhood_stats(grid, spec);
            let normal = |v: &[f64]| -> CliResult<SpecFit> {
                Ok(SpecFit {
                    dtheta_deg: dtheta,
                    dphi_deg: dphi,
                    samples: v.len(),
                    fit: Some(fit_normal_db(v)?.record()),
                    reason: None,
                })
            };
            doc.min.push(normal(stats.inr_min_db())?);
            doc.max.push(normal(stats.inr_max_db())?);
            if !spec.is_trivial() {
                let positive: Vec<f64> = stats.inr_rng_db().iter().copied().filter(|r| *r > 0.0).collect();
                let (fit, reason) = gamma_fit(&positive, 10)?;
                doc.range.push(SpecFit { dtheta_deg: dtheta, dphi_deg: dphi, samples: positive.len(), fit, reason });
            }
            if dtheta == dphi && dtheta > 0 {
                let mut below = vec![Vec::new(); n_bins];
                let mut above = vec![Vec::new(); n_bins];
                for (k, x) in grid.values().iter().enumerate() {
                    let b = ((x - args.bin_min_db) / args.bin_width).round();
                    if b < 0.0 || b >= n_bins as f64 {
                        continue;
                    }
                    let b = b as usize;
                    let d_min = x - stats.inr_min_db()[k];
                    let d_max = stats.inr_max_db()[k] - x;
                    if d_min > 0.0 {
                        below[b].push(d_min);
                    }
                    if d_max > 0.0 {
                        above[b].push(d_max);
                    }
                }
                for (bins, out) in [(&below, &mut doc.delta_min), (&above, &mut doc.delta_max)] {
                    for (b, v) in bins.iter().enumerate() {
                        let (fit, reason) = gamma_fit(v, args.min_bin_samples)?;
                        out.push(BinFit {
                            dtheta_deg: dtheta,
                            dphi_deg: dphi,
                            inr_db: args.bin_min_db + b as f64 * args.bin_width,
                            samples: v.len(),
                            fit,
                            reason,
                        });
                    }
                }
            }
        }
    }
    Ok(doc)
}

pub fn fit_samples(samples: &[f64], family: FitFamily, meta: Metadata, source: String) -> CliResult<SampleFitDocument> {
    let (fit, method, iterations) = match family {
        FitFamily::Normal => (fit_normal_db(samples)?.record(), None, None),
        FitFamily::Gamma => {
            let r = fit_gamma_db_report(samples)?;
            (r.fit.record(), Some(r.method), Some(r.iterations))
        }
    };
    Ok(SampleFitDocument {
        metadata: meta,
        samples_file: source,
        samples: samples.len(),
        family,
        fit,
        method,
        iterations,
    })
}

pub fn cmd_fit(args: &FitArgs, argv: &[String]) -> CliResult<()> {
    require_parent(&args.out)?;
    if !(args.bin_width > 0.0 && args.bin_width.is_finite()) {
        return Err(CliError::Config("--bin-width must be positive".into()));
    }
    if !(args.bin_min_db.is_finite() && args.bin_max_db.is_finite() && args.bin_min_db <= args.bin_max_db) {
        return Err(CliError::Config("--bin-min-db must not exceed --bin-max-db".into()));
    }
    let meta = Metadata::new(argv, None);
    match (&args.grid, &args.samples) {
        (Some(g), None) => {
            require_file(g, "grid")?;
            let grid = load_grid(g)?;
            let doc = fit_grid(&grid, args, meta, g.display().to_string())?;
            write_json(&args.out, &doc)
        }
        (None, Some(s)) => {
            require_file(s, "samples file")?;
            let family = args.family.ok_or_else(|| CliError::Config("--samples requires --family".into()))?;
            let values = read_samples(s)?;
            let doc = fit_samples(&values, family, meta, s.display().to_string())?;
            write_json(&args.out, &doc)
        }
        _ => Err(CliError::Config("pass exactly one of --grid and --samples".into())),
    }
}
