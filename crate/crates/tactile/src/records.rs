//! CSV row types shared by the subcommands.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use tactile_core::membrane::GroundTruth;
use tactile_core::ContactState;

use crate::error::{csv as csv_err, io};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruthRow {
    pub frame: usize,
    pub time_s: f64,
    pub area_fraction: f64,
    pub mean_dx_px: f64,
    pub mean_dy_px: f64,
    #[serde(rename = "force_x_N")]
    pub force_x_n: f64,
    #[serde(rename = "force_y_N")]
    pub force_y_n: f64,
}

impl TruthRow {
    pub const HEADER: [&'static str; 7] = [
        "frame",
        "time_s",
        "area_fraction",
        "mean_dx_px",
        "mean_dy_px",
        "force_x_N",
        "force_y_N",
    ];

    pub fn new(frame: usize, time_s: f64, truth: &GroundTruth) -> Self {
        Self {
            frame,
            time_s,
            area_fraction: truth.area_fraction,
            mean_dx_px: truth.mean_displacement[0],
            mean_dy_px: truth.mean_displacement[1],
            force_x_n: truth.shear_force[0],
            force_y_n: truth.shear_force[1],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContactRow {
    pub t_s: f64,
    pub area_fraction: f64,
    pub mean_dx_px: f64,
    pub mean_dy_px: f64,
    #[serde(rename = "force_x_N")]
    pub force_x_n: f64,
    #[serde(rename = "force_y_N")]
    pub force_y_n: f64,
}

impl ContactRow {
    pub const HEADER: [&'static str; 6] = ["t_s", "area_fraction", "mean_dx_px", "mean_dy_px", "force_x_N", "force_y_N"];
}

impl From<&ContactState> for ContactRow {
    fn from(s: &ContactState) -> Self {
        Self {
            t_s: s.timestamp,
            area_fraction: s.area_fraction,
            mean_dx_px: s.mean_displacement[0],
            mean_dy_px: s.mean_displacement[1],
            force_x_n: s.shear_force[0],
            force_y_n: s.shear_force[1],
        }
    }
}

/// A header-first CSV writer: the header is written even when no rows follow.
pub struct CsvOut<W: Write> {
    inner: csv::Writer<W>,
}

impl<W: Write> CsvOut<W> {
    pub fn new(out: W, header: &[&str]) -> csv::Result<Self> {
        let mut inner = csv::WriterBuilder::new().has_headers(false).from_writer(out);
        inner.write_record(header)?;
        Ok(Self { inner })
    }

    pub fn row<T: Serialize>(&mut self, row: &T) -> csv::Result<()> {
        self.inner.serialize(row)
    }

    pub fn finish(mut self) -> std::io::Result<()> {
        self.inner.flush()
    }
}

pub fn read_rows<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let file = std::fs::File::open(path).map_err(io(path))?;
    csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(file)
        .deserialize()
        .collect::<csv::Result<Vec<T>>>()
        .map_err(csv_err(path))
}
