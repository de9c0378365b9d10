//! Calibration log and model files.

use std::path::Path;

use serde::{Deserialize, Serialize};
use tactile_core::calibration::{CubicFit, TimedSeries};
use tactile_core::CalibrationModel;

use crate::error::{io, json};
use crate::records::read_rows;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesRow {
    pub t_s: f64,
    pub value: f64,
}

/// Reads a `t_s,value` log. Timestamps must be strictly increasing.
pub fn read_series(path: &Path) -> Result<TimedSeries> {
    let rows: Vec<SeriesRow> = read_rows(path)?;
    if rows.iter().any(|r| !r.t_s.is_finite() || !r.value.is_finite()) {
        return Err(Error::Invalid(format!("{}: non-finite sample", path.display())));
    }
    let rate = match rows.as_slice() {
        [first, .., last] => (rows.len() - 1) as f64 / (last.t_s - first.t_s),
        _ => 0.0,
    };
    let samples = rows.into_iter().map(|r| (r.t_s, r.value)).collect();
    Ok(TimedSeries::new(samples, rate)?)
}

/// Model JSON as written by `calibrate`. Only the coefficients are needed on input.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_squared: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_pairs: Option<usize>,
}

impl ModelFile {
    pub fn model(&self) -> CalibrationModel {
        CalibrationModel::new(self.c1, self.c2, self.c3)
    }
}

impl From<&CubicFit> for ModelFile {
    fn from(fit: &CubicFit) -> Self {
        Self {
            c1: fit.model.c1,
            c2: fit.model.c2,
            c3: fit.model.c3,
            r_squared: Some(fit.r_squared),
            n_pairs: Some(fit.n_pairs),
        }
    }
}

pub fn load_model(path: &Path) -> Result<CalibrationModel> {
    let text = std::fs::read_to_string(path).map_err(io(path))?;
    let file: ModelFile = serde_json::from_str(&text).map_err(json(path))?;
    let model = file.model();
    if !model.is_finite() {
        return Err(Error::Invalid(format!("{}: non-finite coefficients", path.display())));
    }
    Ok(model)
}
