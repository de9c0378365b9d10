//! `<name>.meta.json` sidecars carrying frame scale and timestamp.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tactile_core::imaging::DEFAULT_SCALE_MM_PER_PX;
use tactile_core::Frame;

use crate::error::{io, json, Error};
use crate::pgm::{read_pgm, write_pgm};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FrameMeta {
    pub scale_mm_per_px: f64,
    pub timestamp_s: f64,
}

impl Default for FrameMeta {
    fn default() -> Self {
        Self {
            scale_mm_per_px: DEFAULT_SCALE_MM_PER_PX,
            timestamp_s: 0.0,
        }
    }
}

/// `dir/name.pgm` → `dir/name.meta.json`.
pub fn sidecar_path(image: &Path) -> PathBuf {
    let stem = image.file_stem().unwrap_or_default().to_string_lossy();
    image.with_file_name(format!("{stem}.meta.json"))
}

/// Reads a PGM and applies its sidecar when one exists.
pub fn load_frame(path: &Path) -> Result<Frame> {
    let bytes = std::fs::read(path).map_err(io(path))?;
    let frame = read_pgm(&bytes).map_err(|source| Error::Pgm {
        path: path.to_owned(),
        source,
    })?;
    let side = sidecar_path(path);
    if !side.exists() {
        return Ok(frame);
    }
    let text = std::fs::read_to_string(&side).map_err(io(&side))?;
    let meta: FrameMeta = serde_json::from_str(&text).map_err(json(&side))?;
    if !(meta.scale_mm_per_px > 0.0 && meta.scale_mm_per_px.is_finite()) {
        return Err(Error::Invalid(format!("{}: scale_mm_per_px must be positive", side.display())));
    }
    Ok(frame.with_scale(meta.scale_mm_per_px).with_timestamp(meta.timestamp_s))
}

/// Writes the PGM and its sidecar.
pub fn save_frame(path: &Path, frame: &Frame) -> Result<()> {
    std::fs::write(path, write_pgm(frame)).map_err(io(path))?;
    let meta = FrameMeta {
        scale_mm_per_px: frame.scale,
        timestamp_s: frame.timestamp,
    };
    let side = sidecar_path(path);
    let text = serde_json::to_string_pretty(&meta).map_err(json(&side))?;
    std::fs::write(&side, text + "\n").map_err(io(&side))
}
