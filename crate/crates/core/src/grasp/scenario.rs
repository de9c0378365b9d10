//! Maps fingertip misalignment to a membrane deformation.

use crate::membrane::DeformationSpec;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct GraspScenario {
    /// True object surface angles, degrees.
    pub surface_angle_left: f64,
    pub surface_angle_right: f64,
    /// Starting fingertip pitches, degrees.
    pub initial_pitch_left: f64,
    pub initial_pitch_right: f64,
    /// Newtons.
    pub object_weight: f64,
    /// Misalignment at which contact vanishes, degrees.
    pub contact_falloff_delta0: f64,
    /// Contact fraction of a perfectly aligned fingertip.
    pub max_area: f64,
    /// Newtons.
    pub preload: f64,
}

impl Default for GraspScenario {
    fn default() -> Self {
        Self {
            surface_angle_left: 45.0,
            surface_angle_right: 45.0,
            initial_pitch_left: 45.0,
            initial_pitch_right: 45.0,
            object_weight: 5.0,
            contact_falloff_delta0: 15.0,
            max_area: 0.9,
            preload: 5.0,
        }
    }
}

impl GraspScenario {
    pub fn new(surfaces: [f64; 2], initial_pitches: [f64; 2], object_weight: f64) -> Self {
        Self {
            surface_angle_left: surfaces[0],
            surface_angle_right: surfaces[1],
            initial_pitch_left: initial_pitches[0],
            initial_pitch_right: initial_pitches[1],
            object_weight,
            ..Self::default()
        }
    }

    pub fn surfaces(&self) -> [f64; 2] {
        [self.surface_angle_left, self.surface_angle_right]
    }

    pub fn initial_pitches(&self) -> [f64; 2] {
        [self.initial_pitch_left, self.initial_pitch_right]
    }

    pub fn validate(&self) -> Result<()> {
        let angles = [
            self.surface_angle_left,
            self.surface_angle_right,
            self.initial_pitch_left,
            self.initial_pitch_right,
        ];
        if angles.iter().any(|a| !(0.0..=90.0).contains(a)) {
            return Err(Error::InvalidParams("angles must lie in [0, 90] degrees"));
        }
        if !(self.object_weight >= 0.0 && self.object_weight.is_finite()) {
            return Err(Error::InvalidParams("object_weight must be non-negative"));
        }
        if !(self.contact_falloff_delta0 > 0.0 && self.contact_falloff_delta0.is_finite()) {
            return Err(Error::InvalidParams("contact_falloff_delta0 must be positive"));
        }
        if !(self.max_area > 0.0 && self.max_area <= 1.0) {
            return Err(Error::InvalidParams("max_area must lie in (0, 1]"));
        }
        if !(self.preload >= 0.0 && self.preload.is_finite()) {
            return Err(Error::InvalidParams("preload must be non-negative"));
        }
        Ok(())
    }

    /// Contact fraction for a misalignment of `delta` degrees.
    pub fn contact_fraction(&self, delta: f64) -> f64 {
        (1.0 - delta.abs() / self.contact_falloff_delta0).max(0.0) * self.max_area
    }
}

/// How the scenario turns load and misalignment into membrane motion.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct ContactModel {
    /// Membrane shear per newton of applied load, pixels.
    pub shear_px_per_newton: f64,
    /// Side of the window the contact fraction refers to, pixels.
    pub extent: f64,
}

impl Default for ContactModel {
    fn default() -> Self {
        Self {
            shear_px_per_newton: 1.0,
            extent: crate::grid::DEFAULT_ROI_SIDE as f64,
        }
    }
}

/// Deformation seen by one fingertip at `pitch` against a surface at
/// `surface` degrees while `load_fraction` of the preload is applied.
///
/// The contact patch is a tilt ramp covering the aligned fraction of the
/// window, on the side the fingertip leans towards; the load shears it along
/// the gripping axis.
pub fn fingertip_spec(scenario: &GraspScenario, model: &ContactModel, pitch: f64, surface: f64, load_fraction: f64) -> DeformationSpec {
    let delta = pitch - surface;
    let fraction = scenario.contact_fraction(delta);
    let axis = if delta >= 0.0 { [0.0, 1.0] } else { [0.0, -1.0] };
    let shear = load_fraction * scenario.preload * model.shear_px_per_newton;
    DeformationSpec::tilt_ramp(axis, fraction, [0.0, shear]).with_ramp_extent(model.extent)
}

/// Left and right fingertip deformations for the given pitches.
pub fn scenario_observe(
    scenario: &GraspScenario,
    model: &ContactModel,
    pitch_left: f64,
    pitch_right: f64,
    load_fraction: f64,
) -> (DeformationSpec, DeformationSpec) {
    (
        fingertip_spec(scenario, model, pitch_left, scenario.surface_angle_left, load_fraction),
        fingertip_spec(scenario, model, pitch_right, scenario.surface_angle_right, load_fraction),
    )
}
