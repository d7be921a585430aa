//! Special functions, empirical CDFs and dB-domain distribution fits.

use std::collections::BTreeMap;
use std::f64::consts::SQRT_2;

use rand::Rng;
use rand_distr::{Distribution, Gamma, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const FRAC_2_SQRT_PI: f64 = std::f64::consts::FRAC_2_SQRT_PI;

/// Power series `2/sqrt(pi) e^{-x^2} sum 2^n x^{2n+1} / (2n+1)!!`; all terms positive.
fn erf_series(x: f64) -> f64 {
    let x2 = x * x;
    let mut term = x;
    let mut sum = x;
    let mut n = 0.0;
    while term.abs() > 1e-17 * sum.abs() {
        n += 1.0;
        term *= 2.0 * x2 / (2.0 * n + 1.0);
        sum += term;
    }
    FRAC_2_SQRT_PI * (-x2).exp() * sum
}

/// Continued fraction for `erfc(x)`, `x >= 2` (modified Lentz).
fn erfc_fraction(x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut f = x;
    let mut c = x;
    let mut d = 0.0;
    for n in 1..500 {
        let a = 0.5 * n as f64;
        d = x + a * d;
        d = if d.abs() < TINY { 1.0 / TINY } else { 1.0 / d };
        c = x + a / c;
        if c.abs() < TINY {
            c = TINY;
        }
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    0.5 * FRAC_2_SQRT_PI * (-x * x).exp() / f
}

pub fn erf(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    let a = x.abs();
    let v = if a < 2.0 { erf_series(a) } else { 1.0 - erfc_fraction(a) };
    v.copysign(x)
}

pub fn erfc(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x >= 2.0 {
        erfc_fraction(x)
    } else if x <= -2.0 {
        2.0 - erfc_fraction(-x)
    } else {
        1.0 - erf(x)
    }
}

pub fn ln_gamma(x: f64) -> f64 {
    statrs::function::gamma::ln_gamma(x)
}

pub fn digamma(x: f64) -> f64 {
    statrs::function::gamma::digamma(x)
}

/// Derivative of the digamma function, for `x > 0`.
pub fn trigamma(x: f64) -> f64 {
    let mut x = x;
    let mut acc = 0.0;
    while x < 10.0 {
        acc += 1.0 / (x * x);
        x += 1.0;
    }
    // 1/x + 1/(2x^2) + sum B_2k / x^(2k+1)
    let r = 1.0 / x;
    let r2 = r * r;
    acc + r
        + 0.5 * r2
        + r * r2
            * (1.0 / 6.0
                - r2 * (1.0 / 30.0
                    - r2 * (1.0 / 42.0 - r2 * (1.0 / 30.0 - r2 * (5.0 / 66.0 - r2 * 691.0 / 2730.0)))))
}

/// Regularized lower incomplete gamma `P(a, x)`.
pub fn lower_incomplete_gamma_regularized(a: f64, x: f64) -> Result<f64> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::Domain(format!("incomplete gamma needs a > 0, got {a}")));
    }
    if !(x >= 0.0) {
        return Err(Error::Domain(format!("incomplete gamma needs x >= 0, got {x}")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x == f64::INFINITY {
        return Ok(1.0);
    }
    Ok(statrs::function::gamma::gamma_lr(a, x))
}

/// How the second Gamma parameter of a stored table is to be read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parametrization {
    Scale,
    Rate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalFitDb {
    pub mu_db: f64,
    pub sigma2_db: f64,
}

impl NormalFitDb {
    pub fn new(mu_db: f64, sigma2_db: f64) -> Result<Self> {
        if !mu_db.is_finite() || !(sigma2_db > 0.0 && sigma2_db.is_finite()) {
            return Err(Error::Domain(format!(
                "invalid normal fit (mu {mu_db}, variance {sigma2_db})"
            )));
        }
        Ok(Self { mu_db, sigma2_db })
    }

    pub fn sigma_db(&self) -> f64 {
        self.sigma2_db.sqrt()
    }

    pub fn cdf(&self, x_db: f64) -> f64 {
        normal_cdf(x_db, self)
    }

    pub fn distribution(&self) -> Normal<f64> {
        Normal::new(self.mu_db, self.sigma_db()).expect("validated normal fit")
    }

    pub fn record(&self) -> FitRecord {
        FitRecord {
            family: Family::NormalDb,
            params: BTreeMap::from([
                ("mu_db".to_string(), self.mu_db),
                ("sigma2_db".to_string(), self.sigma2_db),
            ]),
            parametrization: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaFitDb {
    pub shape: f64,
    pub scale_db: f64,
}

impl GammaFitDb {
    pub fn new(shape: f64, scale_db: f64) -> Result<Self> {
        if !(shape > 0.0 && shape.is_finite()) || !(scale_db > 0.0 && scale_db.is_finite()) {
            return Err(Error::Domain(format!(
                "invalid gamma fit (shape {shape}, scale {scale_db})"
            )));
        }
        Ok(Self { shape, scale_db })
    }

    /// Builds a fit from a stored `(shape, second)` pair.
    pub fn from_table(shape: f64, second: f64, p: Parametrization) -> Result<Self> {
        match p {
            Parametrization::Scale => Self::new(shape, second),
            Parametrization::Rate => Self::new(shape, 1.0 / second),
        }
    }

    pub fn mean(&self) -> f64 {
        self.shape * self.scale_db
    }

    pub fn variance(&self) -> f64 {
        self.shape * self.scale_db * self.scale_db
    }

    pub fn cdf(&self, x_db: f64) -> f64 {
        gamma_cdf(x_db, self)
    }

    pub fn distribution(&self) -> Gamma<f64> {
        Gamma::new(self.shape, self.scale_db).expect("validated gamma fit")
    }

    pub fn record(&self) -> FitRecord {
        FitRecord {
            family: Family::GammaDb,
            params: BTreeMap::from([
                ("shape".to_string(), self.shape),
                ("scale_db".to_string(), self.scale_db),
            ]),
            parametrization: Some(Parametrization::Scale),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    NormalDb,
    GammaDb,
}

/// Serialized form of a fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitRecord {
    pub family: Family,
    pub params: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parametrization: Option<Parametrization>,
}

impl FitRecord {
    fn param(&self, name: &str) -> Result<f64> {
        self.params
            .get(name)
            .copied()
            .ok_or_else(|| Error::InvalidConfig(format!("fit record lacks `{name}`")))
    }

    pub fn to_normal(&self) -> Result<NormalFitDb> {
        if self.family != Family::NormalDb {
            return Err(Error::InvalidConfig("not a normal_db record".into()));
        }
        NormalFitDb::new(self.param("mu_db")?, self.param("sigma2_db")?)
    }

    pub fn to_gamma(&self) -> Result<GammaFitDb> {
        if self.family != Family::GammaDb {
            return Err(Error::InvalidConfig("not a gamma_db record".into()));
        }
        let p = self.parametrization.unwrap_or(Parametrization::Scale);
        let second = match p {
            Parametrization::Scale => self.param("scale_db")?,
            Parametrization::Rate => self.param("rate")?,
        };
        GammaFitDb::from_table(self.param("shape")?, second, p)
    }
}

/// `0.5 [1 + erf((x - mu) / (sigma sqrt 2))]`, evaluated through `erfc` for tail accuracy.
pub fn normal_cdf(x_db: f64, fit: &NormalFitDb) -> f64 {
    0.5 * erfc(-(x_db - fit.mu_db) / (fit.sigma_db() * SQRT_2))
}

/// `P(shape, x / scale)`; zero for `x <= 0`.
pub fn gamma_cdf(x_db: f64, fit: &GammaFitDb) -> f64 {
    if x_db <= 0.0 {
        return 0.0;
    }
    lower_incomplete_gamma_regularized(fit.shape, x_db / fit.scale_db).unwrap_or(f64::NAN)
}

/// Mean and population variance.
pub fn fit_normal_db(samples: &[f64]) -> Result<NormalFitDb> {
    if samples.len() < 2 {
        return Err(Error::DegenerateSamples(format!(
            "normal fit needs at least 2 samples, got {}",
            samples.len()
        )));
    }
    if samples.iter().any(|x| !x.is_finite()) {
        return Err(Error::DegenerateSamples("non-finite sample".into()));
    }
    let n = samples.len() as f64;
    let mu = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|x| (x - mu) * (x - mu)).sum::<f64>() / n;
    if !(var > 0.0) {
        return Err(Error::DegenerateSamples("samples have zero variance".into()));
    }
    NormalFitDb::new(mu, var)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GammaFitMethod {
    MaximumLikelihood,
    MomentsFallback,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaFitReport {
    pub fit: GammaFitDb,
    pub method: GammaFitMethod,
    pub iterations: usize,
}

pub const GAMMA_MLE_TOLERANCE: f64 = 1e-10;
pub const GAMMA_MLE_MAX_ITER: usize = 100;

pub fn fit_gamma_db(samples: &[f64]) -> Result<GammaFitDb> {
    fit_gamma_db_report(samples).map(|r| r.fit)
}

/// Gamma MLE by Newton iteration on `ln a - digamma(a) = ln(mean) - mean(ln x)`.
pub fn fit_gamma_db_report(samples: &[f64]) -> Result<GammaFitReport> {
    if samples.len() < 10 {
        return Err(Error::DegenerateSamples(format!(
            "gamma fit needs at least 10 samples, got {}",
            samples.len()
        )));
    }
    if let Some(x) = samples.iter().find(|x| !(**x > 0.0 && x.is_finite())) {
        return Err(Error::Domain(format!(
            "gamma fit needs strictly positive samples, found {x}"
        )));
    }
    if samples.iter().all(|x| *x == samples[0]) {
        return Err(Error::DegenerateSamples("samples have zero spread".into()));
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let mean_ln = samples.iter().map(|x| x.ln()).sum::<f64>() / n;
    let s = mean.ln() - mean_ln;
    if !(s > 0.0) {
        return Err(Error::DegenerateSamples("samples have zero spread".into()));
    }

    let mut alpha = (3.0 - s + ((s - 3.0).powi(2) + 24.0 * s).sqrt()) / (12.0 * s);
    for it in 1..=GAMMA_MLE_MAX_ITER {
        let f = alpha.ln() - digamma(alpha) - s;
        let df = 1.0 / alpha - trigamma(alpha);
        let mut next = alpha - f / df;
        if !(next > 0.0) || !next.is_finite() {
            next = alpha / 2.0;
        }
        let done = (next - alpha).abs() <= GAMMA_MLE_TOLERANCE * alpha;
        alpha = next;
        if done {
            return Ok(GammaFitReport {
                fit: GammaFitDb::new(alpha, mean / alpha)?,
                method: GammaFitMethod::MaximumLikelihood,
                iterations: it,
            });
        }
    }

    let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    if !(var > 0.0) {
        return Err(Error::NonConvergence(
            "gamma MLE did not converge and moments are degenerate".into(),
        ));
    }
    log::warn!("gamma MLE did not converge; using method of moments");
    Ok(GammaFitReport {
        fit: GammaFitDb::new(mean * mean / var, var / mean)?,
        method: GammaFitMethod::MomentsFallback,
        iterations: GAMMA_MLE_MAX_ITER,
    })
}

/// Median with the midpoint convention for even counts. Reorders `values`.
pub fn median_in_place(values: &mut [f64]) -> Option<f64> {
    let n = values.len();
    if n == 0 {
        return None;
    }
    let (lo, upper, _) = values.select_nth_unstable_by(n / 2, f64::total_cmp);
    let upper = *upper;
    if n % 2 == 1 {
        return Some(upper);
    }
    let lower = lo.iter().copied().max_by(f64::total_cmp).expect("n >= 2");
    Some(0.5 * (lower + upper))
}

pub fn median(values: &[f64]) -> Option<f64> {
    median_in_place(&mut values.to_vec())
}

/// Sorted-sample step function.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf {
    sorted: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn new(mut samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::DegenerateSamples("empirical CDF of no samples".into()));
        }
        if samples.iter().any(|x| !x.is_finite()) {
            return Err(Error::DegenerateSamples("non-finite sample".into()));
        }
        samples.sort_unstable_by(f64::total_cmp);
        Ok(Self { sorted: samples })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }

    pub fn min(&self) -> f64 {
        self.sorted[0]
    }

    pub fn max(&self) -> f64 {
        self.sorted[self.sorted.len() - 1]
    }

    /// Fraction of samples `<= x`.
    pub fn cdf(&self, x: f64) -> f64 {
        self.sorted.partition_point(|v| *v <= x) as f64 / self.len() as f64
    }

    /// Fraction of samples `>= x`.
    pub fn fraction_at_least(&self, x: f64) -> f64 {
        1.0 - self.sorted.partition_point(|v| *v < x) as f64 / self.len() as f64
    }

    /// Inverse of `cdf`; when `q n` is an integer the two neighbouring order
    /// statistics are averaged.
    pub fn quantile(&self, q: f64) -> f64 {
        let n = self.len();
        let q = q.clamp(0.0, 1.0);
        let h = q * n as f64;
        let k = h.round();
        if (h - k).abs() < 1e-9 * n as f64 && k >= 1.0 && (k as usize) < n {
            let k = k as usize;
            return 0.5 * (self.sorted[k - 1] + self.sorted[k]);
        }
        let idx = (h.ceil() as usize).clamp(1, n) - 1;
        self.sorted[idx]
    }

    pub fn median(&self) -> f64 {
        self.quantile(0.5)
    }

    /// At most `points` `(value, probability)` pairs tracing the CDF.
    pub fn decimated(&self, points: usize) -> Vec<(f64, f64)> {
        let n = self.len();
        if n <= points {
            return self
                .sorted
                .iter()
                .enumerate()
                .map(|(i, x)| (*x, (i + 1) as f64 / n as f64))
                .collect();
        }
        (0..points)
            .map(|i| {
                let idx = ((i + 1) * n) / points - 1;
                (self.sorted[idx], (idx + 1) as f64 / n as f64)
            })
            .collect()
    }
}

/// Kolmogorov-Smirnov distance between sorted samples and a continuous CDF.
pub fn ks_statistic(sorted: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let f = cdf(*x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

pub fn sample_normal<R: Rng + ?Sized>(fit: &NormalFitDb, rng: &mut R) -> f64 {
    fit.distribution().sample(rng)
}

pub fn sample_gamma<R: Rng + ?Sized>(fit: &GammaFitDb, rng: &mut R) -> f64 {
    fit.distribution().sample(rng)
}
