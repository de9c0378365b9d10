//! Grasp trace exports.

use std::io::Write;

use serde::Serialize;
use tactile_core::grasp::{Finger, FingertipState, GraspOutcome, GraspTrace, Phase};

use crate::records::CsvOut;

/// One JSONL line. The contact mask is left out.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StateLine {
    pub t_s: f64,
    pub finger: Finger,
    pub phase: Phase,
    pub pitch_deg: f64,
    pub area_fraction: f64,
    pub mean_dx_px: f64,
    pub mean_dy_px: f64,
    #[serde(rename = "force_x_N")]
    pub force_x_n: f64,
    #[serde(rename = "force_y_N")]
    pub force_y_n: f64,
}

impl From<&FingertipState> for StateLine {
    fn from(s: &FingertipState) -> Self {
        Self {
            t_s: s.contact.timestamp,
            finger: s.finger,
            phase: s.phase,
            pitch_deg: s.pitch,
            area_fraction: s.contact.area_fraction,
            mean_dx_px: s.contact.mean_displacement[0],
            mean_dy_px: s.contact.mean_displacement[1],
            force_x_n: s.contact.shear_force[0],
            force_y_n: s.contact.shear_force[1],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutcomeReport {
    pub success: bool,
    /// `"hold"` on success, otherwise the failure code.
    pub outcome: &'static str,
    pub final_pitch_deg: [f64; 2],
    pub final_area: [f64; 2],
    pub align_observations: [usize; 2],
    #[serde(rename = "payload_limit_N")]
    pub payload_limit_n: f64,
}

impl From<&GraspOutcome> for OutcomeReport {
    fn from(o: &GraspOutcome) -> Self {
        Self {
            success: o.success,
            outcome: outcome_code(o),
            final_pitch_deg: o.final_pitch,
            final_area: o.final_area,
            align_observations: o.align_observations,
            payload_limit_n: o.payload_limit,
        }
    }
}

pub fn outcome_code(o: &GraspOutcome) -> &'static str {
    match o.reason {
        Some(r) => r.code(),
        None => "hold",
    }
}

pub fn write_jsonl<W: Write>(mut out: W, trace: &GraspTrace) -> std::io::Result<()> {
    for s in &trace.states {
        serde_json::to_writer(&mut out, &StateLine::from(s))?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

#[derive(Serialize)]
struct SummaryRow<'a> {
    event: &'a str,
    finger: &'a str,
    t_s: Option<f64>,
    phase: &'a str,
    pitch_deg: Option<f64>,
    area_fraction: Option<f64>,
    detail: &'a str,
}

pub const SUMMARY_HEADER: [&str; 7] = ["event", "finger", "t_s", "phase", "pitch_deg", "area_fraction", "detail"];

fn finger_name(f: Finger) -> &'static str {
    match f {
        Finger::Left => "left",
        Finger::Right => "right",
    }
}

fn phase_name(p: Phase) -> &'static str {
    match p {
        Phase::Approach => "approach",
        Phase::Align => "align",
        Phase::Preload => "preload",
        Phase::Lift => "lift",
        Phase::Hold => "hold",
        Phase::Released => "released",
        Phase::Failed => "failed",
    }
}

/// `transition` rows for each fingertip's phase changes, `final` rows per
/// fingertip, then one `outcome` row.
pub fn write_summary<W: Write>(out: W, trace: &GraspTrace) -> csv::Result<()> {
    let mut csv = CsvOut::new(out, &SUMMARY_HEADER)?;
    for finger in [Finger::Left, Finger::Right] {
        let mut last = None;
        for s in trace.states.iter().filter(|s| s.finger == finger) {
            if last == Some(s.phase) {
                continue;
            }
            last = Some(s.phase);
            csv.row(&SummaryRow {
                event: "transition",
                finger: finger_name(finger),
                t_s: Some(s.contact.timestamp),
                phase: phase_name(s.phase),
                pitch_deg: Some(s.pitch),
                area_fraction: Some(s.contact.area_fraction),
                detail: "",
            })?;
        }
    }
    let o = &trace.outcome;
    for (i, finger) in [Finger::Left, Finger::Right].into_iter().enumerate() {
        csv.row(&SummaryRow {
            event: "final",
            finger: finger_name(finger),
            t_s: None,
            phase: "",
            pitch_deg: Some(o.final_pitch[i]),
            area_fraction: Some(o.final_area[i]),
            detail: "",
        })?;
    }
    csv.row(&SummaryRow {
        event: "outcome",
        finger: "",
        t_s: None,
        phase: "",
        pitch_deg: None,
        area_fraction: None,
        detail: outcome_code(o),
    })?;
    csv.finish()?;
    Ok(())
}
