//! Fitted statistical models of INR and its angular spread.
//!
//! Parameter tables are compiled in from `tables.json`. Range and conditioned
//! reduction fits are Gamma in dB, neighborhood min/max fits are normal in dB.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use rand::Rng;
use rand_distr::{Distribution, Gamma, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::DirectionGrid;
use crate::grid::InrGrid;
use crate::neighborhood::NeighborhoodSpec;
use crate::stats::{gamma_cdf, normal_cdf, GammaFitDb, NormalFitDb, Parametrization};

const EMBEDDED: &str = include_str!("tables.json");

/// Largest tabulated angular deviation, in degrees.
pub const TABLE_MAX_DEG: u32 = 5;

#[derive(Debug, Clone, Deserialize)]
struct RawRangeCell {
    dtheta: u32,
    dphi: u32,
    shape: f64,
    beta: f64,
}

#[derive(Debug, Clone, Deserialize)]
struct RawNormalCell {
    dtheta: u32,
    dphi: u32,
    mu_db: f64,
    sigma2_db: f64,
}

#[derive(Debug, Clone, Deserialize)]
struct RawRange {
    parametrization: Parametrization,
    cells: Vec<RawRangeCell>,
}

#[derive(Debug, Clone, Deserialize)]
struct RawNormalTable {
    cells: Vec<RawNormalCell>,
}

#[derive(Debug, Clone, Deserialize)]
struct RawDeltaRow {
    dtheta: u32,
    dphi: u32,
    cells: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, Deserialize)]
struct RawDelta {
    parametrization: Parametrization,
    inr_db: Vec<f64>,
    rows: Vec<RawDeltaRow>,
}

#[derive(Debug, Clone, Deserialize)]
struct RawTables {
    global: NormalFitDb,
    range: RawRange,
    min: RawNormalTable,
    max: RawNormalTable,
    delta_min: RawDelta,
    delta_max: RawDelta,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GlobalFit {
    pub normal: NormalFitDb,
}

/// Which conditioned reduction/increase table to consult.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DeltaKind {
    Min,
    Max,
}

/// Gamma fits of the neighborhood min (or max) offset, keyed by diagonal
/// spec and nominal INR column.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaTable {
    parametrization: Parametrization,
    inr_db: Vec<f64>,
    rows: BTreeMap<u32, Vec<(f64, f64)>>,
}

impl DeltaTable {
    pub fn parametrization(&self) -> Parametrization {
        self.parametrization
    }

    pub fn inr_columns_db(&self) -> &[f64] {
        &self.inr_db
    }

    pub fn diagonal_specs(&self) -> impl Iterator<Item = NeighborhoodSpec> + '_ {
        self.rows.keys().map(|d| NeighborhoodSpec::new(*d, *d))
    }

    /// Stored `(shape, second)` pair exactly as tabulated.
    pub fn raw_cell(&self, spec: NeighborhoodSpec, column: usize) -> Option<(f64, f64)> {
        if spec.dtheta_deg != spec.dphi_deg {
            return None;
        }
        self.rows.get(&spec.dtheta_deg)?.get(column).copied()
    }
}

/// Result of a conditioned-fit lookup.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaLookup {
    pub fit: GammaFitDb,
    /// The requested INR lay outside the tabulated columns and was clamped.
    pub clamped: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitTables {
    global: GlobalFit,
    range_parametrization: Parametrization,
    range: BTreeMap<NeighborhoodSpec, (f64, f64)>,
    min: BTreeMap<NeighborhoodSpec, NormalFitDb>,
    max: BTreeMap<NeighborhoodSpec, NormalFitDb>,
    delta_min: DeltaTable,
    delta_max: DeltaTable,
}

fn delta_from_raw(raw: RawDelta, what: &str) -> Result<DeltaTable> {
    if raw.inr_db.len() < 2 || raw.inr_db.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidConfig(format!("{what}: INR columns must increase")));
    }
    let mut rows = BTreeMap::new();
    for r in raw.rows {
        if r.dtheta != r.dphi {
            return Err(Error::InvalidConfig(format!("{what}: rows must be diagonal")));
        }
        if r.cells.len() != raw.inr_db.len() {
            return Err(Error::InvalidConfig(format!(
                "{what}: row ({},{}) has {} cells, expected {}",
                r.dtheta,
                r.dphi,
                r.cells.len(),
                raw.inr_db.len()
            )));
        }
        for c in &r.cells {
            GammaFitDb::from_table(c[0], c[1], raw.parametrization)?;
        }
        rows.insert(r.dtheta, r.cells.iter().map(|c| (c[0], c[1])).collect());
    }
    Ok(DeltaTable {
        parametrization: raw.parametrization,
        inr_db: raw.inr_db,
        rows,
    })
}

impl FitTables {
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawTables = serde_json::from_str(text)?;
        NormalFitDb::new(raw.global.mu_db, raw.global.sigma2_db)?;
        let mut range = BTreeMap::new();
        for c in raw.range.cells {
            GammaFitDb::from_table(c.shape, c.beta, raw.range.parametrization)?;
            range.insert(NeighborhoodSpec::new(c.dtheta, c.dphi), (c.shape, c.beta));
        }
        let normal = |t: RawNormalTable| -> Result<BTreeMap<_, _>> {
            t.cells
                .into_iter()
                .map(|c| Ok((NeighborhoodSpec::new(c.dtheta, c.dphi), NormalFitDb::new(c.mu_db, c.sigma2_db)?)))
                .collect()
        };
        Ok(Self {
            global: GlobalFit { normal: raw.global },
            range_parametrization: raw.range.parametrization,
            range,
            min: normal(raw.min)?,
            max: normal(raw.max)?,
            delta_min: delta_from_raw(raw.delta_min, "delta_min")?,
            delta_max: delta_from_raw(raw.delta_max, "delta_max")?,
        })
    }

    /// The compiled-in tables.
    pub fn embedded() -> &'static FitTables {
        static TABLES: OnceLock<FitTables> = OnceLock::new();
        TABLES.get_or_init(|| FitTables::from_json(EMBEDDED).expect("embedded tables are valid"))
    }

    /// Same numbers, second Gamma parameter reread under `p`.
    pub fn with_gamma_parametrization(&self, p: Parametrization) -> Self {
        let mut t = self.clone();
        t.range_parametrization = p;
        t.delta_min.parametrization = p;
        t.delta_max.parametrization = p;
        t
    }

    pub fn global(&self) -> GlobalFit {
        self.global
    }

    pub fn range_parametrization(&self) -> Parametrization {
        self.range_parametrization
    }

    pub fn range_raw(&self) -> &BTreeMap<NeighborhoodSpec, (f64, f64)> {
        &self.range
    }

    pub fn min_table(&self) -> &BTreeMap<NeighborhoodSpec, NormalFitDb> {
        &self.min
    }

    pub fn max_table(&self) -> &BTreeMap<NeighborhoodSpec, NormalFitDb> {
        &self.max
    }

    pub fn delta_table(&self, kind: DeltaKind) -> &DeltaTable {
        match kind {
            DeltaKind::Min => &self.delta_min,
            DeltaKind::Max => &self.delta_max,
        }
    }

    fn check_domain(spec: NeighborhoodSpec) -> Result<()> {
        if spec.dtheta_deg > TABLE_MAX_DEG || spec.dphi_deg > TABLE_MAX_DEG {
            return Err(Error::OutOfTable(format!(
                "neighborhood ({spec}) outside tabulated 0..{TABLE_MAX_DEG} degrees"
            )));
        }
        Ok(())
    }

    pub fn range_fit(&self, spec: NeighborhoodSpec) -> Result<GammaFitDb> {
        Self::check_domain(spec)?;
        if spec.is_trivial() {
            return Err(Error::OutOfTable(
                "no range fit at (0,0): the range is identically 0 dB".into(),
            ));
        }
        let (a, b) = self.range[&spec];
        GammaFitDb::from_table(a, b, self.range_parametrization)
    }

    pub fn min_fit(&self, spec: NeighborhoodSpec) -> Result<NormalFitDb> {
        Self::check_domain(spec)?;
        Ok(self.min[&spec])
    }

    pub fn max_fit(&self, spec: NeighborhoodSpec) -> Result<NormalFitDb> {
        Self::check_domain(spec)?;
        Ok(self.max[&spec])
    }

    /// Conditioned Gamma fit at a nominal INR, linearly interpolating
    /// `(shape, second)` between the bracketing columns.
    pub fn delta_fit_lookup(&self, kind: DeltaKind, spec: NeighborhoodSpec, inr_db: f64) -> Result<DeltaLookup> {
        if !inr_db.is_finite() {
            return Err(Error::Domain(format!("nominal INR {inr_db} is not finite")));
        }
        let table = self.delta_table(kind);
        if spec.dtheta_deg != spec.dphi_deg {
            return Err(Error::OutOfTable(format!(
                "conditioned fits exist only for equal angular deviations, got ({spec})"
            )));
        }
        let row = table.rows.get(&spec.dtheta_deg).ok_or_else(|| {
            Error::OutOfTable(format!("no conditioned fit for neighborhood ({spec})"))
        })?;
        let cols = &table.inr_db;
        let (lo, hi) = (cols[0], cols[cols.len() - 1]);
        let clamped = inr_db < lo || inr_db > hi;
        if clamped {
            log::warn!("nominal INR {inr_db} dB outside [{lo}, {hi}] dB; using the boundary fit");
        }
        let x = inr_db.clamp(lo, hi);
        let k = cols.partition_point(|c| *c <= x).clamp(1, cols.len() - 1);
        let (x0, x1) = (cols[k - 1], cols[k]);
        let (a0, b0) = row[k - 1];
        let (a1, b1) = row[k];
        let (shape, second) = if x == x0 {
            (a0, b0)
        } else if x == x1 {
            (a1, b1)
        } else {
            let t = (x - x0) / (x1 - x0);
            (a0 + t * (a1 - a0), b0 + t * (b1 - b0))
        };
        Ok(DeltaLookup {
            fit: GammaFitDb::from_table(shape, second, table.parametrization)?,
            clamped,
        })
    }

    /// `P(INR <= threshold)` under the global fit.
    pub fn global_prob_below(&self, threshold_db: f64) -> f64 {
        normal_cdf(threshold_db, &self.global.normal)
    }

    pub fn expected_range_db(&self, spec: NeighborhoodSpec) -> Result<f64> {
        Ok(self.range_fit(spec)?.mean())
    }

    /// Unconditioned `P(INR^min <= threshold)`.
    pub fn prob_min_below(&self, spec: NeighborhoodSpec, threshold_db: f64) -> Result<f64> {
        Ok(normal_cdf(threshold_db, &self.min_fit(spec)?))
    }

    /// `P(INR^min <= threshold)` around a pair offering `inr_db`.
    pub fn prob_min_below_conditioned(&self, spec: NeighborhoodSpec, inr_db: f64, threshold_db: f64) -> Result<f64> {
        let fit = self.delta_fit_lookup(DeltaKind::Min, spec, inr_db)?.fit;
        // min = inr - D, so min <= t  <=>  D >= inr - t
        Ok(1.0 - gamma_cdf(inr_db - threshold_db, &fit))
    }

    /// Unconditioned `P(INR^max <= threshold)`.
    pub fn prob_max_below(&self, spec: NeighborhoodSpec, threshold_db: f64) -> Result<f64> {
        Ok(normal_cdf(threshold_db, &self.max_fit(spec)?))
    }

    /// `P(INR^max <= threshold)` around a pair offering `inr_db`.
    pub fn prob_max_below_conditioned(&self, spec: NeighborhoodSpec, inr_db: f64, threshold_db: f64) -> Result<f64> {
        let fit = self.delta_fit_lookup(DeltaKind::Max, spec, inr_db)?.fit;
        Ok(gamma_cdf(threshold_db - inr_db, &fit))
    }

    pub fn prob_range_below(&self, spec: NeighborhoodSpec, threshold_db: f64) -> Result<f64> {
        Ok(gamma_cdf(threshold_db, &self.range_fit(spec)?))
    }

    /// Prepared sampler for one model quantity.
    pub fn sampler(&self, quantity: Quantity, spec: NeighborhoodSpec, inr_db: Option<f64>) -> Result<ModelSampler> {
        let need_inr = || {
            inr_db.ok_or_else(|| Error::InvalidConfig(format!("{quantity} needs a nominal INR")))
        };
        Ok(match quantity {
            Quantity::Global => ModelSampler::Normal(self.global.normal.distribution()),
            Quantity::InrMin => ModelSampler::Normal(self.min_fit(spec)?.distribution()),
            Quantity::InrMax => ModelSampler::Normal(self.max_fit(spec)?.distribution()),
            Quantity::Range => ModelSampler::Gamma(self.range_fit(spec)?.distribution()),
            Quantity::InrMinCond => {
                let inr = need_inr()?;
                let g = self.delta_fit_lookup(DeltaKind::Min, spec, inr)?.fit;
                ModelSampler::Offset { base_db: inr, sign: -1.0, gamma: g.distribution() }
            }
            Quantity::InrMaxCond => {
                let inr = need_inr()?;
                let g = self.delta_fit_lookup(DeltaKind::Max, spec, inr)?.fit;
                ModelSampler::Offset { base_db: inr, sign: 1.0, gamma: g.distribution() }
            }
        })
    }

    /// Composed draw: a global INR, then the neighborhood min (or max) around it.
    pub fn sample_composed<R: Rng + ?Sized>(&self, kind: DeltaKind, spec: NeighborhoodSpec, rng: &mut R) -> Result<f64> {
        let inr = self.global.normal.distribution().sample(rng);
        match kind {
            DeltaKind::Min => sample_inr_min_conditioned_with(self, spec, inr, rng),
            DeltaKind::Max => sample_inr_max_conditioned_with(self, spec, inr, rng),
        }
    }
}

/// Model quantities that can be drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Quantity {
    Global,
    InrMin,
    InrMax,
    InrMinCond,
    InrMaxCond,
    Range,
}

impl Quantity {
    pub const ALL: [Quantity; 6] = [
        Quantity::Global,
        Quantity::InrMin,
        Quantity::InrMax,
        Quantity::InrMinCond,
        Quantity::InrMaxCond,
        Quantity::Range,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Quantity::Global => "global",
            Quantity::InrMin => "inr-min",
            Quantity::InrMax => "inr-max",
            Quantity::InrMinCond => "inr-min-cond",
            Quantity::InrMaxCond => "inr-max-cond",
            Quantity::Range => "range",
        }
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Quantity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Quantity::ALL
            .into_iter()
            .find(|q| q.as_str() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown quantity `{s}`")))
    }
}

#[derive(Debug, Clone, Copy)]
pub enum ModelSampler {
    Normal(Normal<f64>),
    Gamma(Gamma<f64>),
    Offset { base_db: f64, sign: f64, gamma: Gamma<f64> },
}

impl Distribution<f64> for ModelSampler {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            ModelSampler::Normal(d) => d.sample(rng),
            ModelSampler::Gamma(d) => d.sample(rng),
            ModelSampler::Offset { base_db, sign, gamma } => base_db + sign * gamma.sample(rng),
        }
    }
}

fn sample_inr_min_conditioned_with<R: Rng + ?Sized>(t: &FitTables, spec: NeighborhoodSpec, inr_db: f64, rng: &mut R) -> Result<f64> {
    let fit = t.delta_fit_lookup(DeltaKind::Min, spec, inr_db)?.fit;
    Ok(inr_db - fit.distribution().sample(rng))
}

fn sample_inr_max_conditioned_with<R: Rng + ?Sized>(t: &FitTables, spec: NeighborhoodSpec, inr_db: f64, rng: &mut R) -> Result<f64> {
    let fit = t.delta_fit_lookup(DeltaKind::Max, spec, inr_db)?.fit;
    Ok(inr_db + fit.distribution().sample(rng))
}

/// Grid of i.i.d. draws from the global fit, filled in flat order.
pub fn iid_global_grid<R: Rng + ?Sized>(tx_grid: &DirectionGrid, rx_grid: &DirectionGrid, rng: &mut R) -> Result<InrGrid> {
    let d = global_fit().normal.distribution();
    let values = (0..tx_grid.len() * rx_grid.len()).map(|_| d.sample(rng)).collect();
    InrGrid::new(tx_grid.clone(), rx_grid.clone(), values)
}

pub fn global_fit() -> GlobalFit {
    FitTables::embedded().global()
}

pub fn global_prob_below(threshold_db: f64) -> f64 {
    FitTables::embedded().global_prob_below(threshold_db)
}

pub fn expected_range_db(spec: NeighborhoodSpec) -> Result<f64> {
    FitTables::embedded().expected_range_db(spec)
}

pub fn delta_fit_lookup(kind: DeltaKind, spec: NeighborhoodSpec, inr_db: f64) -> Result<DeltaLookup> {
    FitTables::embedded().delta_fit_lookup(kind, spec, inr_db)
}

pub fn sample_global_inr<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    global_fit().normal.distribution().sample(rng)
}

pub fn sample_inr_min<R: Rng + ?Sized>(spec: NeighborhoodSpec, rng: &mut R) -> Result<f64> {
    Ok(FitTables::embedded().min_fit(spec)?.distribution().sample(rng))
}

pub fn sample_inr_max<R: Rng + ?Sized>(spec: NeighborhoodSpec, rng: &mut R) -> Result<f64> {
    Ok(FitTables::embedded().max_fit(spec)?.distribution().sample(rng))
}

pub fn sample_range<R: Rng + ?Sized>(spec: NeighborhoodSpec, rng: &mut R) -> Result<f64> {
    Ok(FitTables::embedded().range_fit(spec)?.distribution().sample(rng))
}

pub fn sample_inr_min_conditioned<R: Rng + ?Sized>(spec: NeighborhoodSpec, inr_db: f64, rng: &mut R) -> Result<f64> {
    sample_inr_min_conditioned_with(FitTables::embedded(), spec, inr_db, rng)
}

pub fn sample_inr_max_conditioned<R: Rng + ?Sized>(spec: NeighborhoodSpec, inr_db: f64, rng: &mut R) -> Result<f64> {
    sample_inr_max_conditioned_with(FitTables::embedded(), spec, inr_db, rng)
}

pub fn prob_min_below(spec: NeighborhoodSpec, threshold_db: f64) -> Result<f64> {
    FitTables::embedded().prob_min_below(spec, threshold_db)
}

pub fn prob_min_below_conditioned(spec: NeighborhoodSpec, inr_db: f64, threshold_db: f64) -> Result<f64> {
    FitTables::embedded().prob_min_below_conditioned(spec, inr_db, threshold_db)
}

pub fn prob_max_below(spec: NeighborhoodSpec, threshold_db: f64) -> Result<f64> {
    FitTables::embedded().prob_max_below(spec, threshold_db)
}

pub fn prob_max_below_conditioned(spec: NeighborhoodSpec, inr_db: f64, threshold_db: f64) -> Result<f64> {
    FitTables::embedded().prob_max_below_conditioned(spec, inr_db, threshold_db)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn s(a: u32, b: u32) -> NeighborhoodSpec {
        NeighborhoodSpec::new(a, b)
    }

    #[test]
    fn table_shapes() {
        let t = FitTables::embedded();
        assert_eq!(t.range_raw().len(), 35);
        assert_eq!(t.min_table().len(), 36);
        assert_eq!(t.max_table().len(), 36);
        for k in [DeltaKind::Min, DeltaKind::Max] {
            let d = t.delta_table(k);
            assert_eq!(d.inr_columns_db(), &[-20.0, -10.0, 0.0, 10.0, 20.0, 30.0, 40.0]);
            assert_eq!(d.diagonal_specs().count(), 5);
            assert_eq!(d.parametrization(), Parametrization::Scale);
        }
        let g = t.global().normal;
        assert_eq!(t.min_fit(s(0, 0)).unwrap(), g);
        assert_eq!(t.max_fit(s(0, 0)).unwrap(), g);
    }

    #[test]
    fn lookups() {
        let t = FitTables::embedded();
        assert_eq!(t.range_fit(s(1, 1)).unwrap(), GammaFitDb::new(4.52, 4.10).unwrap());
        // rows are dphi, columns dtheta
        assert_eq!(t.range_fit(s(0, 1)).unwrap(), GammaFitDb::new(2.59, 3.19).unwrap());
        assert_eq!(t.range_fit(s(1, 0)).unwrap(), GammaFitDb::new(2.74, 3.40).unwrap());
        assert_eq!(t.min_fit(s(1, 1)).unwrap(), NormalFitDb::new(8.32, 148.79).unwrap());
        assert_eq!(t.max_fit(s(2, 2)).unwrap(), NormalFitDb::new(30.15, 33.27).unwrap());
        assert!(t.range_fit(s(0, 0)).is_err());
        assert!(t.min_fit(s(6, 0)).is_err());
    }

    #[test]
    fn expected_range() {
        assert!((expected_range_db(s(1, 1)).unwrap() - 18.532).abs() < 1e-9);
        assert!((expected_range_db(s(0, 1)).unwrap() - 8.2621).abs() < 1e-9);
        assert!(matches!(expected_range_db(s(0, 0)), Err(Error::OutOfTable(_))));
    }

    #[test]
    fn delta_lookup_cells_and_interpolation() {
        let l = delta_fit_lookup(DeltaKind::Min, s(2, 2), 20.0).unwrap();
        assert_eq!(l.fit, GammaFitDb::new(8.67, 2.93).unwrap());
        assert!(!l.clamped);
        let l = delta_fit_lookup(DeltaKind::Max, s(1, 1), 0.0).unwrap();
        assert_eq!(l.fit, GammaFitDb::new(22.22, 0.83).unwrap());
        let mid = delta_fit_lookup(DeltaKind::Min, s(2, 2), 15.0).unwrap().fit;
        assert!((mid.shape - 0.5 * (10.28 + 8.67)).abs() < 1e-12);
        assert!((mid.scale_db - 0.5 * (2.21 + 2.93)).abs() < 1e-12);
        let edge = delta_fit_lookup(DeltaKind::Min, s(2, 2), 40.0).unwrap();
        assert_eq!(edge.fit, GammaFitDb::new(4.15, 4.03).unwrap());
        assert!(!edge.clamped);
        let c = delta_fit_lookup(DeltaKind::Min, s(2, 2), 55.0).unwrap();
        assert!(c.clamped);
        assert_eq!(c.fit, edge.fit);
        let c = delta_fit_lookup(DeltaKind::Max, s(3, 3), -31.0).unwrap();
        assert!(c.clamped);
        assert_eq!(c.fit, GammaFitDb::new(132.69, 0.36).unwrap());
        assert!(matches!(delta_fit_lookup(DeltaKind::Min, s(1, 2), 0.0), Err(Error::OutOfTable(_))));
        assert!(delta_fit_lookup(DeltaKind::Min, s(0, 0), 0.0).is_err());
    }

    #[test]
    fn global_probabilities() {
        assert!((global_prob_below(20.32) - 0.5).abs() < 1e-15);
        assert!((global_prob_below(0.0) - 0.007828330048575966).abs() < 1e-12);
        assert!((global_prob_below(10.0) - 0.1098283993946927).abs() < 1e-12);
    }

    #[test]
    fn min_probabilities() {
        assert!((prob_min_below(s(2, 2), -3.07).unwrap() - 0.5).abs() < 1e-15);
        let p = prob_min_below(s(2, 2), 0.0).unwrap();
        assert!((p - 0.6016).abs() < 1e-3, "{p}");
        assert_eq!(prob_min_below_conditioned(s(2, 2), 20.0, 20.0).unwrap(), 1.0);
        assert_eq!(prob_min_below_conditioned(s(2, 2), 20.0, 25.0).unwrap(), 1.0);
        let p = prob_min_below_conditioned(s(2, 2), 20.0, 0.0).unwrap();
        assert!(p > 0.0 && p < 1.0);
        assert_eq!(prob_max_below_conditioned(s(1, 1), 0.0, -1.0).unwrap(), 0.0);
        assert!(prob_max_below_conditioned(s(1, 1), 0.0, 18.44).unwrap() > 0.4);
    }

    #[test]
    fn conditioned_draws_bound_the_nominal_value() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for k in 0..2000 {
            let inr = -25.0 + 0.035 * k as f64;
            let d = 1 + (k % 5) as u32;
            assert!(sample_inr_min_conditioned(s(d, d), inr, &mut rng).unwrap() <= inr);
            assert!(sample_inr_max_conditioned(s(d, d), inr, &mut rng).unwrap() >= inr);
        }
    }

    #[test]
    fn composed_means() {
        let t = FitTables::embedded();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n = 200_000;
        let m = (0..n)
            .map(|_| sample_inr_min_conditioned(s(2, 2), 20.0, &mut rng).unwrap())
            .sum::<f64>()
            / n as f64;
        assert!((m - (20.0 - 8.67 * 2.93)).abs() < 0.05, "{m}");
        let m = (0..n)
            .map(|_| sample_inr_max_conditioned(s(1, 1), 0.0, &mut rng).unwrap())
            .sum::<f64>()
            / n as f64;
        assert!((m - 22.22 * 0.83).abs() < 0.05, "{m}");
        let m = (0..n)
            .map(|_| t.sample_composed(DeltaKind::Min, s(2, 2), &mut rng).unwrap())
            .sum::<f64>()
            / n as f64;
        assert!(m < t.global().normal.mu_db);
    }

    #[test]
    fn row_monotonicity() {
        let t = FitTables::embedded();
        let mut prev = (f64::INFINITY, f64::NEG_INFINITY);
        for d in 0..=TABLE_MAX_DEG {
            let lo = t.min_fit(s(d, d)).unwrap().mu_db;
            let hi = t.max_fit(s(d, d)).unwrap().mu_db;
            assert!(lo <= prev.0 && hi >= prev.1);
            prev = (lo, hi);
        }
        for k in [DeltaKind::Min, DeltaKind::Max] {
            for spec in t.delta_table(k).diagonal_specs() {
                for inr in t.delta_table(k).inr_columns_db() {
                    let mean = t.delta_fit_lookup(k, spec, *inr).unwrap().fit.mean();
                    assert!(mean > 0.0);
                }
            }
        }
    }

    #[test]
    fn samplers() {
        let t = FitTables::embedded();
        assert!(t.sampler(Quantity::InrMinCond, s(1, 1), None).is_err());
        assert!(t.sampler(Quantity::Range, s(0, 0), None).is_err());
        let smp = t.sampler(Quantity::InrMaxCond, s(1, 1), Some(3.0)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert!((0..100).all(|_| smp.sample(&mut rng) >= 3.0));
        for q in Quantity::ALL {
            assert_eq!(q.as_str().parse::<Quantity>().unwrap(), q);
        }
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..10).map(|_| sample_inr_min(s(1, 1), &mut rng).unwrap()).collect::<Vec<_>>()
        };
        assert_eq!(draw(4), draw(4));
    }
}
