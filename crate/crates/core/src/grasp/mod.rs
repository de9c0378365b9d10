//! Two-fingertip grasp controller closing the loop through the simulated
//! sensor: every contact reading comes from rendering the membrane,
//! estimating flow against the reference frame and running the contact
//! estimator.

mod align;
mod payload;
mod scenario;

use alloc::vec::Vec;

pub use align::{align_step, best_of, observed, AlignConfig, AlignStep};
pub use payload::{payload_limit, PayloadModel};
pub use scenario::{fingertip_spec, scenario_observe, ContactModel, GraspScenario};

use crate::contact::{estimate, ContactState, EstimatorParams};
use crate::flow::{dis_flow, FlowParams};
use crate::imaging::{generate_marker_pattern, Frame, MarkerPattern, DEFAULT_FRAME_SIDE};
use crate::membrane::render_with;
use crate::{CalibrationModel, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Phase {
    Approach,
    Align,
    Preload,
    Lift,
    Hold,
    Released,
    Failed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Finger {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum FailureReason {
    /// Alignment used up its observation budget without finding contact.
    NoContact,
    /// A fingertip ended below the minimum lift area.
    InsufficientContact,
    /// The object is heavier than the payload limit at the final pitches.
    PayloadExceeded,
}

impl FailureReason {
    pub fn code(&self) -> &'static str {
        match self {
            Self::NoContact => "no_contact",
            Self::InsufficientContact => "insufficient_contact",
            Self::PayloadExceeded => "payload_exceeded",
        }
    }
}

/// One fingertip at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct FingertipState {
    pub finger: Finger,
    /// Degrees.
    pub pitch: f64,
    pub phase: Phase,
    pub contact: ContactState,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraspOutcome {
    pub success: bool,
    pub reason: Option<FailureReason>,
    pub final_pitch: [f64; 2],
    /// Contact fractions measured under preload.
    pub final_area: [f64; 2],
    /// Observations spent from approach to the end of alignment.
    pub align_observations: [usize; 2],
    /// Smaller of the two payload limits at the final pitches, newtons.
    pub payload_limit: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraspTrace {
    /// Time-ordered fingertip states.
    pub states: Vec<FingertipState>,
    pub outcome: GraspOutcome,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct GraspParams {
    /// Seeds both fingertip marker patterns and the sensor noise.
    pub rng_seed: u64,
    pub frame_side: usize,
    /// Per-pixel Gaussian noise on rendered frames, grey levels.
    pub noise_sigma: f64,
    /// Initial alignment step, degrees.
    pub initial_step: f64,
    /// Alignment observation budget per fingertip.
    pub max_observations: usize,
    /// Share of the preload applied while aligning.
    pub align_load_fraction: f64,
    /// Both fingertips need at least this contact fraction to lift.
    pub min_lift_area: f64,
    /// Seconds between observations.
    pub observation_period: f64,
    pub align: AlignConfig,
    pub contact_model: ContactModel,
    pub payload: PayloadModel,
    pub flow: FlowParams,
    pub estimator: EstimatorParams,
    pub calibration: CalibrationModel,
}

impl Default for GraspParams {
    fn default() -> Self {
        Self {
            rng_seed: 0,
            frame_side: DEFAULT_FRAME_SIDE,
            noise_sigma: 0.0,
            initial_step: 8.0,
            max_observations: 24,
            align_load_fraction: 0.8,
            min_lift_area: 0.1,
            observation_period: 0.04,
            align: AlignConfig::default(),
            contact_model: ContactModel::default(),
            payload: PayloadModel::default(),
            flow: FlowParams::default(),
            estimator: EstimatorParams::default(),
            calibration: CalibrationModel::REFERENCE,
        }
    }
}

// The sensing chain of one fingertip.
struct Sensor<'a> {
    reference: Frame,
    finger: Finger,
    surface: f64,
    noise_seed: u64,
    frames: u64,
    scenario: &'a GraspScenario,
    params: &'a GraspParams,
}

impl Sensor<'_> {
    fn observe(&mut self, pitch: f64, load_fraction: f64, t: f64) -> Result<ContactState> {
        let p = self.params;
        let spec = fingertip_spec(self.scenario, &p.contact_model, pitch, self.surface, load_fraction);
        let seed = self.noise_seed.wrapping_add(self.frames);
        self.frames += 1;
        let frame = render_with(&self.reference, &spec, p.noise_sigma, seed);
        let flow = dis_flow(&self.reference, &frame, &p.flow, None)?;
        estimate(&flow, &p.estimator, &p.calibration, t)
    }
}

struct Clock {
    t: f64,
    period: f64,
}

impl Clock {
    fn tick(&mut self) -> f64 {
        let t = self.t;
        self.t += self.period;
        t
    }
}

/// Runs approach, alignment, preload and lift for both fingertips.
///
/// Errors only come from invalid inputs; grasp failures are reported in the
/// trace outcome.
pub fn run_grasp(scenario: &GraspScenario, params: &GraspParams) -> Result<GraspTrace> {
    scenario.validate()?;
    params.payload.validate()?;
    params.flow.validate()?;
    params.estimator.validate()?;
    if !(params.initial_step > 0.0) {
        return Err(crate::Error::InvalidParams("initial_step must be positive"));
    }
    let side = params.frame_side;
    let mut built = Vec::with_capacity(2);
    for (i, finger) in [Finger::Left, Finger::Right].into_iter().enumerate() {
        let pattern = MarkerPattern::new(params.rng_seed.wrapping_mul(2).wrapping_add(i as u64), side, side);
        built.push(Sensor {
            reference: generate_marker_pattern(&pattern)?,
            finger,
            surface: scenario.surfaces()[i],
            noise_seed: params.rng_seed.wrapping_mul(0x9E37_79B9).wrapping_add(1000 * i as u64),
            frames: 0,
            scenario,
            params,
        });
    }
    let mut clock = Clock {
        t: 0.0,
        period: params.observation_period,
    };
    let mut states = Vec::new();
    let mut final_pitch = scenario.initial_pitches();
    let mut align_observations = [0usize; 2];
    let mut reason = None;

    for (i, sensor) in built.iter_mut().enumerate() {
        let mut history: Vec<(f64, f64)> = Vec::new();
        let mut pitch = scenario.initial_pitches()[i];
        let mut step = params.initial_step;
        loop {
            let s = align_step(pitch, &history, step, &params.align);
            step = s.step;
            if s.done || history.len() >= params.max_observations {
                final_pitch[i] = match best_of(&history, params.align.min_improvement) {
                    _ if s.done => s.pitch,
                    Some(((best, _), _)) => best,
                    None => pitch,
                };
                break;
            }
            pitch = s.pitch;
            if observed(&history, pitch) {
                continue;
            }
            let t = clock.tick();
            let contact = sensor.observe(pitch, params.align_load_fraction, t)?;
            history.push((pitch, contact.area_fraction));
            states.push(FingertipState {
                finger: sensor.finger,
                pitch,
                phase: if history.len() == 1 { Phase::Approach } else { Phase::Align },
                contact,
            });
        }
        align_observations[i] = history.len();
        if history.iter().all(|h| h.1 <= 0.0) {
            reason.get_or_insert(FailureReason::NoContact);
        }
    }

    let mut final_area = [0.0; 2];
    for (i, sensor) in built.iter_mut().enumerate() {
        let t = clock.tick();
        let contact = sensor.observe(final_pitch[i], 1.0, t)?;
        final_area[i] = contact.area_fraction;
        states.push(FingertipState {
            finger: sensor.finger,
            pitch: final_pitch[i],
            phase: Phase::Preload,
            contact,
        });
    }

    let limit = payload_limit(&params.payload, final_pitch[0]).min(payload_limit(&params.payload, final_pitch[1]));
    if reason.is_none() {
        if final_area.iter().any(|&a| a < params.min_lift_area) {
            reason = Some(FailureReason::InsufficientContact);
        } else if limit < scenario.object_weight {
            reason = Some(FailureReason::PayloadExceeded);
        }
    }
    let success = reason.is_none();
    let phases: &[Phase] = if success {
        &[Phase::Lift, Phase::Hold, Phase::Released]
    } else {
        &[Phase::Failed]
    };
    for &phase in phases {
        let t = clock.tick();
        for (i, sensor) in built.iter_mut().enumerate() {
            let load = if phase == Phase::Released { 0.0 } else { 1.0 };
            let contact = sensor.observe(final_pitch[i], load, t)?;
            states.push(FingertipState {
                finger: sensor.finger,
                pitch: final_pitch[i],
                phase,
                contact,
            });
        }
    }

    Ok(GraspTrace {
        states,
        outcome: GraspOutcome {
            success,
            reason,
            final_pitch,
            final_area,
            align_observations,
            payload_limit: limit,
        },
    })
}
