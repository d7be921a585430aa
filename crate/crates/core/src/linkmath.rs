//! Power bookkeeping: isolation, self-interference power, INR and SINR.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// INR at or below which a beam pair is considered usable for full duplex.
pub const DESIRED_INR_DB: f64 = 0.0;

/// Half-width of the band around 0 dB INR that is neither noise- nor
/// self-interference-limited.
pub const REGIME_MARGIN_DB: f64 = 3.0;

pub fn power_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

pub fn db_to_power(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn amplitude_to_db(amplitude: f64) -> f64 {
    20.0 * amplitude.log10()
}

/// Transmit input power, receiver noise power and radiated power.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinkBudget {
    pub ptx_dbm: f64,
    pub pnoise_dbm: f64,
    pub eirp_dbm: f64,
}

impl Default for LinkBudget {
    fn default() -> Self {
        Self {
            ptx_dbm: -15.0,
            pnoise_dbm: -68.0,
            eirp_dbm: 60.0,
        }
    }
}

impl LinkBudget {
    pub fn is_finite(&self) -> bool {
        self.ptx_dbm.is_finite() && self.pnoise_dbm.is_finite() && self.eirp_dbm.is_finite()
    }
}

/// Isolation between transmit input and receive output for one beam pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Isolation {
    Db(f64),
    /// The coupling vanished; isolation is unbounded.
    BelowFloor,
}

impl Isolation {
    pub fn db(self) -> f64 {
        match self {
            Isolation::Db(x) => x,
            Isolation::BelowFloor => f64::INFINITY,
        }
    }
}

/// `10 log10(1 / |c|^2)`.
pub fn isolation_db(coupling: Complex64) -> Isolation {
    let mag = coupling.norm();
    if mag > 0.0 {
        Isolation::Db(-amplitude_to_db(mag))
    } else {
        Isolation::BelowFloor
    }
}

pub fn self_interference_dbm(budget: &LinkBudget, isolation_db: f64) -> f64 {
    budget.ptx_dbm - isolation_db
}

pub fn inr_db(budget: &LinkBudget, psi_dbm: f64) -> f64 {
    psi_dbm - budget.pnoise_dbm
}

/// `SNR / (1 + INR)` in dB.
pub fn sinr_db(snr_db: f64, inr_db: f64) -> f64 {
    snr_db - power_to_db(1.0 + db_to_power(inr_db))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    NoiseLimited,
    Transitional,
    SelfInterferenceLimited,
}

pub fn classify_regime(inr_db: f64) -> Regime {
    if inr_db > REGIME_MARGIN_DB {
        Regime::SelfInterferenceLimited
    } else if inr_db < -REGIME_MARGIN_DB {
        Regime::NoiseLimited
    } else {
        Regime::Transitional
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iso(mag: f64) -> f64 {
        isolation_db(Complex64::new(mag, 0.0)).db()
    }

    #[test]
    fn isolation_examples() {
        assert_eq!(iso(1.0), 0.0);
        assert!((iso(1e-3) - 60.0).abs() < 1e-12);
        assert!((iso(10f64.powf(-53.0 / 20.0)) - 53.0).abs() < 1e-12);
        assert_eq!(isolation_db(Complex64::new(0.0, 0.0)), Isolation::BelowFloor);
        // Phase does not matter.
        assert!((isolation_db(Complex64::from_polar(1e-3, 1.1)).db() - 60.0).abs() < 1e-12);
    }

    #[test]
    fn power_chain() {
        let b = LinkBudget::default();
        assert_eq!(self_interference_dbm(&b, 53.0), -68.0);
        assert_eq!(self_interference_dbm(&b, 0.0), -15.0);
        assert_eq!(self_interference_dbm(&b, 100.0), -115.0);
        assert_eq!(inr_db(&b, -68.0), 0.0);
        assert_eq!(inr_db(&b, -28.0), 40.0);
    }

    #[test]
    fn sinr_examples() {
        assert!((sinr_db(0.0, 0.0) + 3.010299956639812).abs() < 1e-12);
        // linear 100 / (1 + 100)
        let expected = 10.0 * (100.0f64 / 101.0).log10();
        assert!((sinr_db(20.0, 20.0) - expected).abs() < 1e-12);
        assert!((sinr_db(20.0, 20.0) + 0.0432).abs() < 1e-4);
        assert!((sinr_db(15.0, -200.0) - 15.0).abs() < 1e-6);
        assert_eq!(sinr_db(15.0, f64::NEG_INFINITY), 15.0);
    }

    #[test]
    fn sinr_never_exceeds_snr() {
        for snr in [-10.0, 0.0, 12.5, 40.0] {
            for inr in (-60..=60).map(|x| x as f64) {
                assert!(sinr_db(snr, inr) <= snr);
            }
        }
    }

    #[test]
    fn inr_is_monotone_in_coupling_and_linear_in_ptx() {
        let b = LinkBudget::default();
        let inr = |b: &LinkBudget, mag: f64| inr_db(b, self_interference_dbm(b, iso(mag)));
        let mut prev = f64::NEG_INFINITY;
        for k in 1..100 {
            let x = inr(&b, k as f64 * 1e-4);
            assert!(x > prev);
            prev = x;
        }
        let hotter = LinkBudget {
            ptx_dbm: b.ptx_dbm + 7.0,
            ..b
        };
        assert!((inr(&hotter, 1e-3) - inr(&b, 1e-3) - 7.0).abs() < 1e-12);
    }

    #[test]
    fn regimes() {
        assert_eq!(classify_regime(20.0), Regime::SelfInterferenceLimited);
        assert_eq!(classify_regime(-20.0), Regime::NoiseLimited);
        assert_eq!(classify_regime(0.0), Regime::Transitional);
        assert_eq!(classify_regime(3.0), Regime::Transitional);
    }
}
