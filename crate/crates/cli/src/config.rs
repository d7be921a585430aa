//! JSON run configuration for `simulate`.

use std::path::Path;

use fdsi::geometry::{DirectionGrid, GeometryConfig};
use fdsi::linkmath::LinkBudget;
use serde::{Deserialize, Serialize};

use crate::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LatticeSpec {
    pub az_min_deg: f64,
    pub az_max_deg: f64,
    pub el_min_deg: f64,
    pub el_max_deg: f64,
    pub step_deg: f64,
}

impl Default for LatticeSpec {
    fn default() -> Self {
        Self {
            az_min_deg: -60.0,
            az_max_deg: 60.0,
            el_min_deg: -10.0,
            el_max_deg: 10.0,
            step_deg: 1.0,
        }
    }
}

impl LatticeSpec {
    pub fn build(&self) -> fdsi::Result<DirectionGrid> {
        DirectionGrid::build(
            self.az_min_deg,
            self.az_max_deg,
            self.el_min_deg,
            self.el_max_deg,
            self.step_deg,
        )
    }
}

/// Absolute scaling of the simulated channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CalibrationSpec {
    /// INR the broadside transmit/receive beam pair is scaled to.
    pub reference_inr_db: f64,
    /// Fixed calibration gain; overrides `reference_inr_db` when set.
    pub calibration_db: Option<f64>,
}

impl Default for CalibrationSpec {
    fn default() -> Self {
        Self {
            reference_inr_db: 40.0,
            calibration_db: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub geometry: GeometryConfig,
    pub budget: LinkBudget,
    pub tx_grid: LatticeSpec,
    pub rx_grid: LatticeSpec,
    pub calibration: CalibrationSpec,
}

impl SimConfig {
    pub fn from_json_file(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config `{}`: {e}", path.display())))?;
        let cfg: Self = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("invalid config `{}`: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> CliResult<()> {
        self.geometry.upa().map_err(CliError::config)?;
        self.geometry.platform().map_err(CliError::config)?;
        self.tx_grid.build().map_err(CliError::config)?;
        self.rx_grid.build().map_err(CliError::config)?;
        if !self.budget.is_finite() {
            return Err(CliError::Config("link budget must be finite".into()));
        }
        if !self.calibration.reference_inr_db.is_finite()
            || self.calibration.calibration_db.is_some_and(|c| !c.is_finite())
        {
            return Err(CliError::Config("calibration must be finite".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_partial_configs() {
        let c: SimConfig = serde_json::from_str("{}").unwrap();
        assert_eq!(c, SimConfig::default());
        assert_eq!(c.tx_grid.build().unwrap().len(), 2541);
        let c: SimConfig =
            serde_json::from_str(r#"{"budget": {"ptx_dbm": -10}, "geometry": {"rows": 8}}"#).unwrap();
        assert_eq!(c.budget.ptx_dbm, -10.0);
        assert_eq!(c.budget.pnoise_dbm, -68.0);
        assert_eq!(c.geometry.rows, 8);
        assert_eq!(c.geometry.cols, 16);
        assert!(serde_json::from_str::<SimConfig>(r#"{"bogus": 1}"#).is_err());
        assert!(serde_json::from_str::<SimConfig>(r#"{"budget": {"ptx": 1}}"#).is_err());
    }
}
