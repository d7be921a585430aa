//! Angular conventions, array layout, platform geometry and the steering lattice.
//!
//! Each array has its own local frame: broadside along +x, azimuth increasing
//! toward +y and elevation increasing toward +z. Angles are carried in degrees
//! everywhere and converted to radians only at trig call sites.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

pub type Vec3 = [f64; 3];

pub(crate) fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn cross(a: &Vec3, b: &Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub(crate) fn norm(a: &Vec3) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn distance(a: &Vec3, b: &Vec3) -> f64 {
    let d = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
    (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
}

/// Wraps an azimuth into [-180, 180).
pub fn normalize_azimuth(azimuth_deg: f64) -> f64 {
    (azimuth_deg + 180.0).rem_euclid(360.0) - 180.0
}

/// Absolute angular difference in degrees, wrapped into [0, 180].
pub fn angle_diff(alpha_deg: f64, beta_deg: f64) -> f64 {
    let zeta = (alpha_deg - beta_deg).abs().rem_euclid(360.0);
    if zeta <= 180.0 {
        zeta
    } else {
        360.0 - zeta
    }
}

/// A steering direction in an array's local azimuth-elevation convention.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Direction {
    azimuth_deg: f64,
    elevation_deg: f64,
}

impl Direction {
    pub fn new(azimuth_deg: f64, elevation_deg: f64) -> Result<Self> {
        if !azimuth_deg.is_finite() || !elevation_deg.is_finite() {
            return Err(Error::Domain(format!(
                "non-finite direction ({azimuth_deg}, {elevation_deg})"
            )));
        }
        if !(-90.0..=90.0).contains(&elevation_deg) {
            return Err(Error::Domain(format!(
                "elevation {elevation_deg} outside [-90, 90]"
            )));
        }
        Ok(Self {
            azimuth_deg: normalize_azimuth(azimuth_deg),
            elevation_deg,
        })
    }

    pub const fn broadside() -> Self {
        Self {
            azimuth_deg: 0.0,
            elevation_deg: 0.0,
        }
    }

    pub fn azimuth_deg(&self) -> f64 {
        self.azimuth_deg
    }

    pub fn elevation_deg(&self) -> f64 {
        self.elevation_deg
    }

    /// `[cos(el) cos(az), cos(el) sin(az), sin(el)]` in the array-local frame.
    pub fn unit_vector(&self) -> Vec3 {
        let (sin_az, cos_az) = self.azimuth_deg.to_radians().sin_cos();
        let (sin_el, cos_el) = self.elevation_deg.to_radians().sin_cos();
        [cos_el * cos_az, cos_el * sin_az, sin_el]
    }
}

pub fn direction_unit_vector(d: Direction) -> Vec3 {
    d.unit_vector()
}

/// Uniform planar array description.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UpaConfig {
    pub rows: usize,
    pub cols: usize,
    pub element_spacing_wavelengths: f64,
    pub carrier_hz: f64,
}

impl Default for UpaConfig {
    fn default() -> Self {
        Self {
            rows: 16,
            cols: 16,
            element_spacing_wavelengths: 0.5,
            carrier_hz: 28e9,
        }
    }
}

impl UpaConfig {
    pub fn new(
        rows: usize,
        cols: usize,
        element_spacing_wavelengths: f64,
        carrier_hz: f64,
    ) -> Result<Self> {
        let cfg = Self {
            rows,
            cols,
            element_spacing_wavelengths,
            carrier_hz,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.rows == 0 || self.cols == 0 {
            return Err(Error::InvalidConfig(format!(
                "array must have at least one row and column, got {}x{}",
                self.rows, self.cols
            )));
        }
        if !(self.element_spacing_wavelengths > 0.0 && self.element_spacing_wavelengths.is_finite())
        {
            return Err(Error::InvalidConfig(format!(
                "element spacing must be positive, got {}",
                self.element_spacing_wavelengths
            )));
        }
        if !(self.carrier_hz > 0.0 && self.carrier_hz.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "carrier frequency must be positive, got {}",
                self.carrier_hz
            )));
        }
        Ok(())
    }

    pub fn num_elements(&self) -> usize {
        self.rows * self.cols
    }

    pub fn wavelength_m(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_hz
    }

    pub fn element_spacing_m(&self) -> f64 {
        self.element_spacing_wavelengths * self.wavelength_m()
    }

    /// Diagonal of the element footprint.
    pub fn aperture_m(&self) -> f64 {
        let r = (self.rows - 1) as f64;
        let c = (self.cols - 1) as f64;
        self.element_spacing_m() * (r * r + c * c).sqrt()
    }
}

/// Element positions on the local y-z plane, centered on the origin.
///
/// Element `n = row * cols + col` sits at `y = (col - (cols-1)/2) d`,
/// `z = (row - (rows-1)/2) d`.
pub fn element_positions(cfg: &UpaConfig) -> Vec<Vec3> {
    let d = cfg.element_spacing_m();
    let row_mid = (cfg.rows as f64 - 1.0) / 2.0;
    let col_mid = (cfg.cols as f64 - 1.0) / 2.0;
    let mut out = Vec::with_capacity(cfg.num_elements());
    for row in 0..cfg.rows {
        for col in 0..cfg.cols {
            out.push([
                0.0,
                (col as f64 - col_mid) * d,
                (row as f64 - row_mid) * d,
            ]);
        }
    }
    out
}

/// Rule-of-thumb far-field distance `2 D^2 / lambda`.
pub fn far_field_distance(cfg: &UpaConfig) -> f64 {
    let d = cfg.aperture_m();
    2.0 * d * d / cfg.wavelength_m()
}

/// Rule-of-thumb reactive near-field boundary `0.62 sqrt(D^3 / lambda)`.
pub fn nearfield_boundary(cfg: &UpaConfig) -> f64 {
    let d = cfg.aperture_m();
    0.62 * (d * d * d / cfg.wavelength_m()).sqrt()
}

/// Placement and orientation of one panel in the platform frame.
///
/// The local frame is `x = boresight`, `z = up` and `y = up x boresight`.
/// A mirrored panel uses `y = -(up x boresight)`, i.e. its azimuth axis is
/// the mirror image of an unmirrored panel's.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PanelPose {
    pub center: Vec3,
    pub boresight: Vec3,
    pub up: Vec3,
    pub mirrored: bool,
}

impl PanelPose {
    pub fn validate(&self) -> Result<()> {
        if (norm(&self.boresight) - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidConfig(format!(
                "boresight {:?} is not unit norm",
                self.boresight
            )));
        }
        if (norm(&self.up) - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidConfig(format!(
                "up vector {:?} is not unit norm",
                self.up
            )));
        }
        if dot(&self.boresight, &self.up).abs() > 1e-12 {
            return Err(Error::InvalidConfig(
                "boresight and up vectors must be orthogonal".into(),
            ));
        }
        Ok(())
    }

    /// Local (x, y, z) axes expressed in the platform frame.
    pub fn axes(&self) -> [Vec3; 3] {
        let mut y = cross(&self.up, &self.boresight);
        if self.mirrored {
            y = [-y[0], -y[1], -y[2]];
        }
        [self.boresight, y, self.up]
    }

    pub fn to_global(&self, local: &Vec3) -> Vec3 {
        let [x, y, z] = self.axes();
        let mut out = self.center;
        for k in 0..3 {
            out[k] += local[0] * x[k] + local[1] * y[k] + local[2] * z[k];
        }
        out
    }
}

/// Two panels on a shared platform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlatformGeometry {
    pub tx: PanelPose,
    pub rx: PanelPose,
    pub panel_angle_deg: f64,
    pub separation_m: f64,
}

impl Default for PlatformGeometry {
    fn default() -> Self {
        Self::triangular(0.30, 60.0, true).expect("default platform is valid")
    }
}

impl PlatformGeometry {
    /// Panels on two adjacent faces of a triangular mount whose faces meet at
    /// `panel_angle_deg`. Boresights point outward at `+-(180 - angle)/2`
    /// azimuth and the panel centers sit `separation_m` apart along y.
    /// `rx_mirrored` makes the receive panel the exact mirror image of the
    /// transmit panel across the x-z plane.
    pub fn triangular(separation_m: f64, panel_angle_deg: f64, rx_mirrored: bool) -> Result<Self> {
        if !(panel_angle_deg > 0.0 && panel_angle_deg < 180.0) {
            return Err(Error::InvalidConfig(format!(
                "panel angle must lie in (0, 180), got {panel_angle_deg}"
            )));
        }
        if !(separation_m > 0.0 && separation_m.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "panel separation must be positive, got {separation_m}"
            )));
        }
        let half_turn = ((180.0 - panel_angle_deg) / 2.0).to_radians();
        let (s, c) = half_turn.sin_cos();
        let half = separation_m / 2.0;
        let up = [0.0, 0.0, 1.0];
        let tx = PanelPose {
            center: [0.0, half, 0.0],
            boresight: [c, s, 0.0],
            up,
            mirrored: false,
        };
        let rx = PanelPose {
            center: [0.0, -half, 0.0],
            boresight: [c, -s, 0.0],
            up,
            mirrored: rx_mirrored,
        };
        let geom = Self {
            tx,
            rx,
            panel_angle_deg,
            separation_m,
        };
        geom.validate()?;
        Ok(geom)
    }

    pub fn validate(&self) -> Result<()> {
        self.tx.validate()?;
        self.rx.validate()?;
        let sep = distance(&self.tx.center, &self.rx.center);
        if (sep - self.separation_m).abs() > 1e-9 {
            return Err(Error::InvalidConfig(format!(
                "panel centers are {sep} m apart but separation is {} m",
                self.separation_m
            )));
        }
        Ok(())
    }

    pub fn tx_center(&self) -> Vec3 {
        self.tx.center
    }

    pub fn rx_center(&self) -> Vec3 {
        self.rx.center
    }

    pub fn tx_boresight(&self) -> Vec3 {
        self.tx.boresight
    }

    pub fn rx_boresight(&self) -> Vec3 {
        self.rx.boresight
    }

    /// The same platform with the roles of the two panels exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            tx: self.rx,
            rx: self.tx,
            ..*self
        }
    }
}

/// Geometry section of the JSON run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    #[serde(default = "default_rows")]
    pub rows: usize,
    #[serde(default = "default_rows")]
    pub cols: usize,
    #[serde(default = "default_spacing")]
    pub spacing_wl: f64,
    #[serde(default = "default_carrier")]
    pub carrier_hz: f64,
    #[serde(default = "default_separation")]
    pub separation_m: f64,
    #[serde(default = "default_panel_angle")]
    pub panel_angle_deg: f64,
    #[serde(default = "default_true")]
    pub rx_mirrored: bool,
}

fn default_rows() -> usize {
    16
}
fn default_spacing() -> f64 {
    0.5
}
fn default_carrier() -> f64 {
    28e9
}
fn default_separation() -> f64 {
    0.30
}
fn default_panel_angle() -> f64 {
    60.0
}
fn default_true() -> bool {
    true
}

impl Default for GeometryConfig {
    fn default() -> Self {
        Self {
            rows: default_rows(),
            cols: default_rows(),
            spacing_wl: default_spacing(),
            carrier_hz: default_carrier(),
            separation_m: default_separation(),
            panel_angle_deg: default_panel_angle(),
            rx_mirrored: true,
        }
    }
}

impl GeometryConfig {
    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn upa(&self) -> Result<UpaConfig> {
        UpaConfig::new(self.rows, self.cols, self.spacing_wl, self.carrier_hz)
    }

    pub fn platform(&self) -> Result<PlatformGeometry> {
        PlatformGeometry::triangular(self.separation_m, self.panel_angle_deg, self.rx_mirrored)
    }
}

/// Uniform azimuth x elevation lattice of steering directions.
///
/// Flat index is azimuth-major: `flat = az_index * n_el + el_index`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionGrid {
    azimuths: Vec<f64>,
    elevations: Vec<f64>,
    az_step: f64,
    el_step: f64,
}

fn lattice_axis(min: f64, max: f64, step: f64, what: &str) -> Result<Vec<f64>> {
    if !(min.is_finite() && max.is_finite()) {
        return Err(Error::InvalidGrid(format!("{what} bounds must be finite")));
    }
    if max < min {
        return Err(Error::InvalidGrid(format!(
            "{what} max {max} is below min {min}"
        )));
    }
    let steps = (max - min) / step;
    let n = steps.round();
    if (steps - n).abs() > 1e-9 * n.max(1.0) {
        return Err(Error::InvalidGrid(format!(
            "{what} range [{min}, {max}] is not divisible by step {step}"
        )));
    }
    Ok((0..=n as usize).map(|k| min + k as f64 * step).collect())
}

impl DirectionGrid {
    pub fn build(az_min: f64, az_max: f64, el_min: f64, el_max: f64, step: f64) -> Result<Self> {
        Self::build_with_steps(az_min, az_max, step, el_min, el_max, step)
    }

    pub fn build_with_steps(
        az_min: f64,
        az_max: f64,
        az_step: f64,
        el_min: f64,
        el_max: f64,
        el_step: f64,
    ) -> Result<Self> {
        if !(az_step > 0.0 && el_step > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "steps must be positive, got {az_step} and {el_step}"
            )));
        }
        if az_min < -180.0 || az_max >= 180.0 {
            return Err(Error::InvalidGrid(format!(
                "azimuths [{az_min}, {az_max}] exceed [-180, 180)"
            )));
        }
        if el_min < -90.0 || el_max > 90.0 {
            return Err(Error::InvalidGrid(format!(
                "elevations [{el_min}, {el_max}] exceed [-90, 90]"
            )));
        }
        let azimuths = lattice_axis(az_min, az_max, az_step, "azimuth")?;
        if (azimuths.len() as f64 - 1.0) * az_step >= 360.0 {
            return Err(Error::InvalidGrid(
                "azimuth lattice wraps onto itself".into(),
            ));
        }
        let elevations = lattice_axis(el_min, el_max, el_step, "elevation")?;
        Ok(Self {
            azimuths,
            elevations,
            az_step,
            el_step,
        })
    }

    /// The 121 x 21 lattice spanning -60..60 azimuth and -10..10 elevation in 1 degree steps.
    pub fn measurement_default() -> Self {
        Self::build(-60.0, 60.0, -10.0, 10.0, 1.0).expect("default lattice is valid")
    }

    pub fn azimuths(&self) -> &[f64] {
        &self.azimuths
    }

    pub fn elevations(&self) -> &[f64] {
        &self.elevations
    }

    pub fn az_step(&self) -> f64 {
        self.az_step
    }

    pub fn el_step(&self) -> f64 {
        self.el_step
    }

    pub fn n_az(&self) -> usize {
        self.azimuths.len()
    }

    pub fn n_el(&self) -> usize {
        self.elevations.len()
    }

    pub fn len(&self) -> usize {
        self.n_az() * self.n_el()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// True when the azimuth lattice closes the full circle, so neighborhoods wrap.
    pub fn azimuth_wraps(&self) -> bool {
        self.n_az() > 1 && ((self.n_az() as f64) * self.az_step - 360.0).abs() < 1e-9
    }

    pub fn flat_index(&self, az_index: usize, el_index: usize) -> usize {
        az_index * self.n_el() + el_index
    }

    pub fn coords(&self, flat: usize) -> (usize, usize) {
        (flat / self.n_el(), flat % self.n_el())
    }

    pub fn direction(&self, flat: usize) -> Direction {
        let (a, e) = self.coords(flat);
        Direction::new(self.azimuths[a], self.elevations[e]).expect("lattice directions are valid")
    }

    pub fn directions(&self) -> impl Iterator<Item = Direction> + '_ {
        (0..self.len()).map(move |k| self.direction(k))
    }

    fn nearest_axis_index(values: &[f64], step: f64, x: f64, wrap: bool) -> usize {
        if wrap {
            return values
                .iter()
                .enumerate()
                .min_by(|a, b| angle_diff(*a.1, x).total_cmp(&angle_diff(*b.1, x)))
                .map(|(k, _)| k)
                .unwrap_or(0);
        }
        let k = ((x - values[0]) / step).round();
        k.clamp(0.0, (values.len() - 1) as f64) as usize
    }

    /// Lattice coordinates of `d`, or an error naming the nearest lattice point.
    pub fn locate(&self, d: &Direction) -> Result<(usize, usize)> {
        let wrap = self.azimuth_wraps();
        let ai = Self::nearest_axis_index(&self.azimuths, self.az_step, d.azimuth_deg(), wrap);
        let ei = Self::nearest_axis_index(&self.elevations, self.el_step, d.elevation_deg(), false);
        let (na, ne) = (self.azimuths[ai], self.elevations[ei]);
        if angle_diff(na, d.azimuth_deg()) > 1e-9 || (ne - d.elevation_deg()).abs() > 1e-9 {
            return Err(Error::OffLattice {
                azimuth_deg: d.azimuth_deg(),
                elevation_deg: d.elevation_deg(),
                nearest_azimuth_deg: na,
                nearest_elevation_deg: ne,
            });
        }
        Ok((ai, ei))
    }

    pub fn index_of(&self, d: &Direction) -> Result<usize> {
        let (a, e) = self.locate(d)?;
        Ok(self.flat_index(a, e))
    }
}

pub fn build_measurement_grid(
    az_min: f64,
    az_max: f64,
    el_min: f64,
    el_max: f64,
    step: f64,
) -> Result<DirectionGrid> {
    DirectionGrid::build(az_min, az_max, el_min, el_max, step)
}
