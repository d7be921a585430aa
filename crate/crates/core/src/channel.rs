//! Spherical-wave near-field channel between two colocated panels and
//! beamformed coupling through it.

use std::f64::consts::PI;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::beamforming::BeamWeights;
use crate::error::{Error, Result};
use crate::geometry::{distance, element_positions, PlatformGeometry, UpaConfig, Vec3};
use crate::linkmath::{amplitude_to_db, LinkBudget};

/// Complex coupling matrix, `rx_elements x tx_elements`, stored row-major.
///
/// `calibration_db` is a uniform amplitude gain (20 log10 scale) applied to
/// every beamformed coupling; the stored entries stay normalized.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrix {
    rx_elements: usize,
    tx_elements: usize,
    entries: Vec<Complex64>,
    calibration_db: f64,
}

impl ChannelMatrix {
    pub fn from_entries(
        rx_elements: usize,
        tx_elements: usize,
        entries: Vec<Complex64>,
        calibration_db: f64,
    ) -> Result<Self> {
        if entries.len() != rx_elements * tx_elements {
            return Err(Error::DimensionMismatch {
                expected: rx_elements * tx_elements,
                actual: entries.len(),
            });
        }
        if entries.iter().any(|h| !(h.re.is_finite() && h.im.is_finite())) {
            return Err(Error::Domain("channel entries must be finite".into()));
        }
        Ok(Self {
            rx_elements,
            tx_elements,
            entries,
            calibration_db,
        })
    }

    pub fn rx_elements(&self) -> usize {
        self.rx_elements
    }

    pub fn tx_elements(&self) -> usize {
        self.tx_elements
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn entry(&self, rx: usize, tx: usize) -> Complex64 {
        self.entries[rx * self.tx_elements + tx]
    }

    pub fn calibration_db(&self) -> f64 {
        self.calibration_db
    }

    pub fn with_calibration_db(mut self, calibration_db: f64) -> Self {
        self.calibration_db = calibration_db;
        self
    }

    pub fn calibration_gain(&self) -> f64 {
        10f64.powf(self.calibration_db / 20.0)
    }

    pub fn transpose(&self) -> Self {
        let mut entries = Vec::with_capacity(self.entries.len());
        for n in 0..self.tx_elements {
            for m in 0..self.rx_elements {
                entries.push(self.entry(m, n));
            }
        }
        Self {
            rx_elements: self.tx_elements,
            tx_elements: self.rx_elements,
            entries,
            calibration_db: self.calibration_db,
        }
    }

    /// Square with `H == H^T` exactly.
    pub fn is_symmetric(&self) -> bool {
        self.rx_elements == self.tx_elements
            && (0..self.rx_elements).all(|m| (0..m).all(|n| self.entry(m, n) == self.entry(n, m)))
    }

    /// `H f`, without calibration.
    pub fn project(&self, f: &[Complex64]) -> Result<Vec<Complex64>> {
        if f.len() != self.tx_elements {
            return Err(Error::DimensionMismatch {
                expected: self.tx_elements,
                actual: f.len(),
            });
        }
        Ok(self
            .entries
            .chunks_exact(self.tx_elements)
            .map(|row| row.iter().zip(f).map(|(h, x)| h * x).sum())
            .collect())
    }

    /// Calibration that makes the pair `(w, f)` produce `target_inr_db` under `budget`.
    pub fn calibration_for_inr(
        &self,
        w: &BeamWeights,
        f: &BeamWeights,
        budget: &LinkBudget,
        target_inr_db: f64,
    ) -> Result<f64> {
        let raw = coupling_gain(w, &self.clone().with_calibration_db(0.0), f)?;
        if raw.norm() == 0.0 {
            return Err(Error::DegenerateGeometry(
                "reference beam pair has zero coupling; cannot calibrate".into(),
            ));
        }
        Ok(target_inr_db - budget.ptx_dbm + budget.pnoise_dbm - amplitude_to_db(raw.norm()))
    }
}

fn global_positions(cfg: &UpaConfig, pose: &crate::geometry::PanelPose) -> Vec<Vec3> {
    element_positions(cfg)
        .iter()
        .map(|p| pose.to_global(p))
        .collect()
}

/// Entry `(m, n)` is `(r0 / r_mn) exp(-j 2 pi r_mn / lambda)` where `r_mn`
/// is the exact distance between receive element `m` and transmit element
/// `n`, and `r0` the center-to-center distance.
pub fn spherical_wave_channel(
    tx: &UpaConfig,
    rx: &UpaConfig,
    geom: &PlatformGeometry,
) -> Result<ChannelMatrix> {
    tx.validate()?;
    rx.validate()?;
    if tx.carrier_hz != rx.carrier_hz {
        return Err(Error::InvalidConfig(format!(
            "transmit and receive carriers differ ({} vs {} Hz)",
            tx.carrier_hz, rx.carrier_hz
        )));
    }
    let tx_pos = global_positions(tx, &geom.tx);
    let rx_pos = global_positions(rx, &geom.rx);
    let r0 = distance(&geom.tx.center, &geom.rx.center);
    if r0 <= 0.0 {
        return Err(Error::DegenerateGeometry("panel centers coincide".into()));
    }
    let k = 2.0 * PI / tx.wavelength_m();
    let mut entries = Vec::with_capacity(tx_pos.len() * rx_pos.len());
    for (m, pr) in rx_pos.iter().enumerate() {
        for (n, pt) in tx_pos.iter().enumerate() {
            let r = distance(pr, pt);
            if r <= 0.0 {
                return Err(Error::DegenerateGeometry(format!(
                    "receive element {m} coincides with transmit element {n}"
                )));
            }
            entries.push(Complex64::from_polar(r0 / r, -k * r));
        }
    }
    ChannelMatrix::from_entries(rx_pos.len(), tx_pos.len(), entries, 0.0)
}

/// `w^T H f` scaled by the channel calibration.
pub fn coupling_gain(w: &BeamWeights, h: &ChannelMatrix, f: &BeamWeights) -> Result<Complex64> {
    if w.len() != h.rx_elements {
        return Err(Error::DimensionMismatch {
            expected: h.rx_elements,
            actual: w.len(),
        });
    }
    let hf = h.project(f.weights())?;
    Ok(w.response(&hf) * h.calibration_gain())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelDumpHeader {
    pub rx_elements: usize,
    pub tx_elements: usize,
    pub calibration_db: f64,
    pub dtype: String,
    pub order: String,
}

fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

/// Writes little-endian complex64 (f32 real, f32 imaginary) entries in
/// receive-major order plus a `<path>.json` sidecar.
pub fn write_channel_dump(h: &ChannelMatrix, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = BufWriter::new(File::create(path)?);
    for e in &h.entries {
        out.write_all(&(e.re as f32).to_le_bytes())?;
        out.write_all(&(e.im as f32).to_le_bytes())?;
    }
    out.flush()?;
    let header = ChannelDumpHeader {
        rx_elements: h.rx_elements,
        tx_elements: h.tx_elements,
        calibration_db: h.calibration_db,
        dtype: "complex64-le".into(),
        order: "rx-major".into(),
    };
    std::fs::write(sidecar_path(path), serde_json::to_string_pretty(&header)?)?;
    Ok(())
}

pub fn read_channel_dump(path: impl AsRef<Path>) -> Result<ChannelMatrix> {
    let path = path.as_ref();
    let header: ChannelDumpHeader =
        serde_json::from_str(&std::fs::read_to_string(sidecar_path(path))?)?;
    let mut bytes = Vec::new();
    BufReader::new(File::open(path)?).read_to_end(&mut bytes)?;
    let count = header.rx_elements * header.tx_elements;
    if bytes.len() != count * 8 {
        return Err(Error::DimensionMismatch {
            expected: count * 8,
            actual: bytes.len(),
        });
    }
    let entries = bytes
        .chunks_exact(8)
        .map(|c| {
            let re = f32::from_le_bytes([c[0], c[1], c[2], c[3]]);
            let im = f32::from_le_bytes([c[4], c[5], c[6], c[7]]);
            Complex64::new(re as f64, im as f64)
        })
        .collect();
    ChannelMatrix::from_entries(
        header.rx_elements,
        header.tx_elements,
        entries,
        header.calibration_db,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beamforming::ArrayModel;
    use crate::geometry::{Direction, PanelPose};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn single() -> UpaConfig {
        UpaConfig::new(1, 1, 0.5, 28e9).unwrap()
    }

    #[test]
    fn single_element_pair() {
        let geom = PlatformGeometry::triangular(0.3, 60.0, true).unwrap();
        let h = spherical_wave_channel(&single(), &single(), &geom).unwrap();
        assert_eq!(h.entries().len(), 1);
        let e = h.entry(0, 0);
        assert!((e.norm() - 1.0).abs() < 1e-15);
        let lambda = single().wavelength_m();
        let expected = (-2.0 * PI * 0.3 / lambda).rem_euclid(2.0 * PI);
        let got = e.arg().rem_euclid(2.0 * PI);
        let diff = (got - expected).abs();
        assert!(diff.min(2.0 * PI - diff) < 1e-9, "{got} vs {expected}");
    }

    #[test]
    fn swapping_panels_transposes() {
        let tx = UpaConfig::new(2, 3, 0.5, 28e9).unwrap();
        let rx = UpaConfig::new(4, 2, 0.5, 28e9).unwrap();
        let geom = PlatformGeometry::triangular(0.3, 60.0, false).unwrap();
        let h = spherical_wave_channel(&tx, &rx, &geom).unwrap();
        let g = spherical_wave_channel(&rx, &tx, &geom.swapped()).unwrap();
        assert_eq!(g, h.transpose());
    }

    #[test]
    fn mirrored_platform_gives_symmetric_channel() {
        let cfg = UpaConfig::new(4, 4, 0.5, 28e9).unwrap();
        let h = spherical_wave_channel(&cfg, &cfg, &PlatformGeometry::default()).unwrap();
        assert_eq!(h, h.transpose());
    }

    #[test]
    fn magnitudes_bounded_by_extreme_distances() {
        // Brute force over all 65536 element pairs of the default panels.
        let cfg = UpaConfig::default();
        let geom = PlatformGeometry::default();
        let h = spherical_wave_channel(&cfg, &cfg, &geom).unwrap();
        let tx = global_positions(&cfg, &geom.tx);
        let rx = global_positions(&cfg, &geom.rx);
        let (mut rmin, mut rmax) = (f64::INFINITY, 0.0f64);
        for p in &rx {
            for q in &tx {
                let r = distance(p, q);
                rmin = rmin.min(r);
                rmax = rmax.max(r);
            }
        }
        let r0 = 0.30;
        for e in h.entries() {
            let m = e.norm();
            assert!(m >= r0 / rmax - 1e-12 && m <= r0 / rmin + 1e-12);
        }
    }

    #[test]
    fn coincident_elements_are_rejected() {
        let pose = PanelPose {
            center: [0.0, 0.0, 0.0],
            boresight: [1.0, 0.0, 0.0],
            up: [0.0, 0.0, 1.0],
            mirrored: false,
        };
        let geom = PlatformGeometry {
            tx: pose,
            rx: pose,
            panel_angle_deg: 60.0,
            separation_m: 0.0,
        };
        assert!(matches!(
            spherical_wave_channel(&single(), &single(), &geom),
            Err(Error::DegenerateGeometry(_))
        ));
    }

    #[test]
    fn scalar_channel_coupling() {
        let g = Complex64::new(0.3, -0.4);
        let h = ChannelMatrix::from_entries(1, 1, vec![g], 0.0).unwrap();
        let d = Direction::broadside();
        let w = BeamWeights::from_vec(vec![Complex64::from_polar(1.0, 0.7)], d).unwrap();
        let f = BeamWeights::from_vec(vec![Complex64::from_polar(1.0, -0.2)], d).unwrap();
        let c = coupling_gain(&w, &h, &f).unwrap();
        let expected = w.weights()[0] * g * f.weights()[0];
        assert!((c - expected).norm() < 1e-15);

        let h6 = h.clone().with_calibration_db(6.0);
        let c6 = coupling_gain(&w, &h6, &f).unwrap();
        assert!((c6.norm() / c.norm() - 10f64.powf(0.3)).abs() < 1e-12);
    }

    #[test]
    fn coupling_rejects_wrong_dimensions() {
        let cfg = UpaConfig::new(2, 2, 0.5, 28e9).unwrap();
        let h = spherical_wave_channel(&cfg, &cfg, &PlatformGeometry::default()).unwrap();
        let w = ArrayModel::new(&cfg).conjugate_weights(&Direction::broadside());
        let small = ArrayModel::new(&single()).conjugate_weights(&Direction::broadside());
        assert!(matches!(
            coupling_gain(&small, &h, &w),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            coupling_gain(&w, &h, &small),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn coupling_invariant_under_global_phase() {
        let cfg = UpaConfig::new(4, 4, 0.5, 28e9).unwrap();
        let h = spherical_wave_channel(&cfg, &cfg, &PlatformGeometry::default()).unwrap();
        let model = ArrayModel::new(&cfg);
        let d1 = Direction::new(10.0, 3.0).unwrap();
        let d2 = Direction::new(-25.0, -4.0).unwrap();
        let w = model.conjugate_weights(&d2);
        let f = model.conjugate_weights(&d1);
        let rot = Complex64::from_polar(1.0, 1.234);
        let f_rot =
            BeamWeights::from_vec(f.weights().iter().map(|x| x * rot).collect(), d1).unwrap();
        let a = coupling_gain(&w, &h, &f).unwrap().norm();
        let b = coupling_gain(&w, &h, &f_rot).unwrap().norm();
        assert!((a - b).abs() < 1e-14 * a.max(1e-300));
    }

    #[test]
    fn triple_product_matches_double_sum() {
        let cfg = UpaConfig::default();
        let h = spherical_wave_channel(&cfg, &cfg, &PlatformGeometry::default())
            .unwrap()
            .with_calibration_db(-13.0);
        let model = ArrayModel::new(&cfg);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..5 {
            let d1 = Direction::new(rng.random_range(-60.0..60.0), rng.random_range(-10.0..10.0))
                .unwrap();
            let d2 = Direction::new(rng.random_range(-60.0..60.0), rng.random_range(-10.0..10.0))
                .unwrap();
            let w = model.conjugate_weights(&d2);
            let f = model.conjugate_weights(&d1);
            let fast = coupling_gain(&w, &h, &f).unwrap();
            let mut slow = Complex64::new(0.0, 0.0);
            for m in 0..256 {
                for n in 0..256 {
                    slow += w.weights()[m] * h.entry(m, n) * f.weights()[n];
                }
            }
            slow *= 10f64.powf(-13.0 / 20.0);
            assert!((fast.norm() - slow.norm()).abs() <= 1e-9 * slow.norm());
        }
    }

    #[test]
    fn calibration_hits_target_inr() {
        let cfg = UpaConfig::new(4, 4, 0.5, 28e9).unwrap();
        let h = spherical_wave_channel(&cfg, &cfg, &PlatformGeometry::default()).unwrap();
        let model = ArrayModel::new(&cfg);
        let b = model.conjugate_weights(&Direction::broadside());
        let budget = LinkBudget::default();
        let cal = h.calibration_for_inr(&b, &b, &budget, 40.0).unwrap();
        let h = h.with_calibration_db(cal);
        let c = coupling_gain(&b, &h, &b).unwrap();
        let inr = budget.ptx_dbm + amplitude_to_db(c.norm()) - budget.pnoise_dbm;
        assert!((inr - 40.0).abs() < 1e-9);
    }

    #[test]
    fn dump_round_trip() {
        let cfg = UpaConfig::new(2, 3, 0.5, 28e9).unwrap();
        let h = spherical_wave_channel(&cfg, &cfg, &PlatformGeometry::default())
            .unwrap()
            .with_calibration_db(-7.5);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("h.bin");
        write_channel_dump(&h, &path).unwrap();
        assert_eq!(std::fs::metadata(&path).unwrap().len(), 36 * 8);
        let back = read_channel_dump(&path).unwrap();
        assert_eq!(back.calibration_db(), -7.5);
        for (a, b) in h.entries().iter().zip(back.entries()) {
            assert!((a - b).norm() < 1e-6);
        }
    }
}
