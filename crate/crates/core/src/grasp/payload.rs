//! Maximum payload as a function of fingertip pitch.

use alloc::vec::Vec;

use crate::{Error, Result};

/// Measured `(pitch in degrees, max load in newtons)` anchors.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct PayloadModel {
    pub anchors: Vec<(f64, f64)>,
}

impl Default for PayloadModel {
    fn default() -> Self {
        Self {
            anchors: alloc::vec![(30.0, 8.0), (45.0, 11.0), (60.0, 18.0)],
        }
    }
}

impl PayloadModel {
    /// Anchors must be non-empty, finite, strictly increasing in pitch and
    /// non-decreasing in load.
    pub fn validate(&self) -> Result<()> {
        if self.anchors.is_empty() {
            return Err(Error::InvalidParams("payload model needs at least one anchor"));
        }
        if self.anchors.iter().any(|(p, l)| !p.is_finite() || !l.is_finite()) {
            return Err(Error::InvalidParams("payload anchors must be finite"));
        }
        for w in self.anchors.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::InvalidParams("payload anchors must be sorted by pitch"));
            }
            if w[1].1 < w[0].1 {
                return Err(Error::InvalidParams("payload loads must be non-decreasing in pitch"));
            }
        }
        Ok(())
    }

    /// Largest anchor load.
    pub fn max_load(&self) -> f64 {
        self.anchors.iter().map(|a| a.1).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Piecewise-linear interpolation over the anchors, clamped to the end
/// values outside their pitch range.
pub fn payload_limit(model: &PayloadModel, pitch: f64) -> f64 {
    let a = &model.anchors;
    let (first, last) = (a[0], a[a.len() - 1]);
    if pitch <= first.0 {
        return first.1;
    }
    if pitch >= last.0 {
        return last.1;
    }
    let i = a.partition_point(|&(p, _)| p <= pitch);
    let ((p0, l0), (p1, l1)) = (a[i - 1], a[i]);
    l0 + (l1 - l0) * (pitch - p0) / (p1 - p0)
}
