//! `--config` JSON: optional sections overriding library defaults.

use std::path::Path;

use serde::{Deserialize, Serialize};
use tactile_core::grasp::GraspParams;
use tactile_core::membrane::SimOptions;
use tactile_core::{CalibrationModel, EstimatorParams, FlowParams};

use crate::error::{io, json};
use crate::{Error, Result};

/// Every section is optional. `flow`, `estimator` and `calibration` also
/// override the same-named fields inside `grasp`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub flow: FlowParams,
    pub estimator: EstimatorParams,
    pub calibration: CalibrationModel,
    pub sim: SimOptions,
    pub grasp: GraspParams,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(io(path))?;
        let cfg: Self = serde_json::from_str(&text).map_err(json(path))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.flow.validate()?;
        self.estimator.validate()?;
        if !self.calibration.is_finite() {
            return Err(Error::Invalid("calibration coefficients must be finite".into()));
        }
        if !(self.sim.noise_sigma >= 0.0 && self.sim.noise_sigma.is_finite()) {
            return Err(Error::Invalid("sim.noise_sigma must be non-negative".into()));
        }
        if self.sim.roi_side == 0 {
            return Err(Error::Invalid("sim.roi_side must be positive".into()));
        }
        self.grasp.payload.validate()?;
        Ok(())
    }

    /// Grasp parameters with the shared sections and `seed` applied.
    pub fn grasp_params(&self, seed: u64) -> GraspParams {
        GraspParams {
            rng_seed: seed,
            flow: self.flow,
            estimator: self.estimator,
            calibration: self.calibration,
            ..self.grasp.clone()
        }
    }
}
