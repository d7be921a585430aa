//! Array response vectors, conjugate beamforming weights and beam patterns.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::geometry::{dot, element_positions, Direction, DirectionGrid, UpaConfig};
use crate::linkmath::{amplitude_to_db, power_to_db};

/// Unit-norm beamforming weights together with the direction they steer to.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamWeights {
    weights: Vec<Complex64>,
    steering: Direction,
}

impl BeamWeights {
    pub fn weights(&self) -> &[Complex64] {
        &self.weights
    }

    pub fn steering(&self) -> Direction {
        self.steering
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Builds weights from an arbitrary vector, rescaling it to unit norm.
    pub fn from_vec(mut weights: Vec<Complex64>, steering: Direction) -> Option<Self> {
        let n = weights.iter().map(|w| w.norm_sqr()).sum::<f64>().sqrt();
        if !(n > 0.0 && n.is_finite()) {
            return None;
        }
        weights.iter_mut().for_each(|w| *w /= n);
        Some(Self { weights, steering })
    }

    /// Unconjugated inner product `w^T a`.
    pub fn response(&self, a: &[Complex64]) -> Complex64 {
        self.weights.iter().zip(a).map(|(w, x)| w * x).sum()
    }
}

/// Precomputed element layout for repeated array-response evaluation.
#[derive(Debug, Clone)]
pub struct ArrayModel {
    cfg: UpaConfig,
    positions: Vec<[f64; 3]>,
    wavenumber: f64,
}

impl ArrayModel {
    pub fn new(cfg: &UpaConfig) -> Self {
        Self {
            cfg: *cfg,
            positions: element_positions(cfg),
            wavenumber: 2.0 * PI / cfg.wavelength_m(),
        }
    }

    pub fn config(&self) -> &UpaConfig {
        &self.cfg
    }

    /// Element `n` is `exp(+j k <p_n, u(d)>) / sqrt(N)`.
    pub fn response(&self, d: &Direction) -> Vec<Complex64> {
        let u = d.unit_vector();
        let scale = 1.0 / (self.positions.len() as f64).sqrt();
        self.positions
            .iter()
            .map(|p| Complex64::from_polar(scale, self.wavenumber * dot(p, &u)))
            .collect()
    }

    pub fn conjugate_weights(&self, d: &Direction) -> BeamWeights {
        let weights = self.response(d).into_iter().map(|a| a.conj()).collect();
        BeamWeights {
            weights,
            steering: *d,
        }
    }

    /// Normalized array factor `|w^T a(d)|`, equal to 1 at the steering direction.
    pub fn array_factor(&self, w: &BeamWeights, d: &Direction) -> f64 {
        w.response(&self.response(d)).norm()
    }
}

pub fn array_response(cfg: &UpaConfig, d: &Direction) -> Vec<Complex64> {
    ArrayModel::new(cfg).response(d)
}

pub fn conjugate_weights(cfg: &UpaConfig, d: &Direction) -> BeamWeights {
    ArrayModel::new(cfg).conjugate_weights(d)
}

/// Chain gains (dB) applied on top of the ideal array gain `10 log10(N)`.
///
/// The transmit default makes a broadside beam radiate 60 dBm EIRP from a
/// -15 dBm input on the 16 x 16 array, i.e. 75 dB of total transmit gain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainGains {
    pub tx_db: f64,
    pub rx_db: f64,
}

impl ChainGains {
    /// Transmit chain gain that maps `ptx_dbm` to `eirp_dbm` at beam peak.
    pub fn for_eirp(cfg: &UpaConfig, ptx_dbm: f64, eirp_dbm: f64) -> Self {
        let tx_db = eirp_dbm - ptx_dbm - power_to_db(cfg.num_elements() as f64);
        Self { tx_db, rx_db: tx_db }
    }
}

impl Default for ChainGains {
    fn default() -> Self {
        Self::for_eirp(&UpaConfig::default(), -15.0, 60.0)
    }
}

/// Power gain in dB: `20 log10(|w^T a(d)| sqrt(N) g0)` with `g0` given in dB.
pub fn beam_gain_db(model: &ArrayModel, w: &BeamWeights, d: &Direction, chain_gain_db: f64) -> f64 {
    amplitude_to_db(model.array_factor(w, d))
        + power_to_db(model.config().num_elements() as f64)
        + chain_gain_db
}

/// Gain pattern (dB) over every direction of `probe_grid`, in flat-index order.
pub fn beam_gain_pattern(
    cfg: &UpaConfig,
    w: &BeamWeights,
    probe_grid: &DirectionGrid,
    chain_gain_db: f64,
) -> Vec<f64> {
    let model = ArrayModel::new(cfg);
    probe_grid
        .directions()
        .map(|d| beam_gain_db(&model, w, &d, chain_gain_db))
        .collect()
}

/// EIRP of a transmit beam evaluated toward `d`.
pub fn eirp_dbm(cfg: &UpaConfig, w: &BeamWeights, d: &Direction, ptx_dbm: f64, gains: &ChainGains) -> f64 {
    ptx_dbm + beam_gain_db(&ArrayModel::new(cfg), w, d, gains.tx_db)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PatternCut {
    Azimuth,
    Elevation,
}

/// Half-power (3 dB) beamwidth in degrees from a uniform scan of one
/// principal cut through the steering direction.
///
/// Crossing points are linearly interpolated between scan samples. Returns
/// `None` if the pattern never drops 3 dB within +-90 degrees of the peak.
pub fn half_power_beamwidth_deg(
    cfg: &UpaConfig,
    w: &BeamWeights,
    cut: PatternCut,
    step_deg: f64,
) -> Option<f64> {
    let model = ArrayModel::new(cfg);
    let center = w.steering();
    let gain_at = |offset: f64| -> Option<f64> {
        let d = match cut {
            PatternCut::Azimuth => Direction::new(center.azimuth_deg() + offset, center.elevation_deg()),
            PatternCut::Elevation => {
                let el = center.elevation_deg() + offset;
                if !(-90.0..=90.0).contains(&el) {
                    return None;
                }
                Direction::new(center.azimuth_deg(), el)
            }
        }
        .ok()?;
        Some(power_to_db(model.array_factor(w, &d).powi(2)))
    };
    let peak = gain_at(0.0)?;
    let target = peak - 3.0;
    let edge = |sign: f64| -> Option<f64> {
        let mut prev = (0.0, peak);
        let steps = (90.0 / step_deg).ceil() as usize;
        for k in 1..=steps {
            let off = k as f64 * step_deg;
            let g = gain_at(sign * off)?;
            if g <= target {
                let t = (prev.1 - target) / (prev.1 - g);
                return Some(prev.0 + t * (off - prev.0));
            }
            prev = (off, g);
        }
        None
    };
    Some(edge(-1.0)? + edge(1.0)?)
}
