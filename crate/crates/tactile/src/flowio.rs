//! `VIKF` binary flow dumps and a CSV export.

use std::io::Write;

use tactile_core::FlowField;

pub const MAGIC: &[u8; 4] = b"VIKF";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FlowIoError {
    #[error("not a VIKF flow dump")]
    BadMagic,
    #[error("truncated flow dump: expected {expected} bytes, found {found}")]
    Truncated { expected: usize, found: usize },
    #[error("flow dump has a zero dimension")]
    ZeroDimension,
}

/// Magic, little-endian `u32` width and height, then row-major `f32` (dx, dy) pairs.
pub fn write_vikf(flow: &FlowField) -> Vec<u8> {
    let (w, h) = flow.dims();
    let mut out = Vec::with_capacity(12 + 8 * w * h);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(w as u32).to_le_bytes());
    out.extend_from_slice(&(h as u32).to_le_bytes());
    for d in flow.data() {
        out.extend_from_slice(&d[0].to_le_bytes());
        out.extend_from_slice(&d[1].to_le_bytes());
    }
    out
}

pub fn read_vikf(bytes: &[u8]) -> Result<FlowField, FlowIoError> {
    if bytes.len() < 12 || &bytes[..4] != MAGIC {
        return Err(FlowIoError::BadMagic);
    }
    let word = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap()) as usize;
    let (w, h) = (word(4), word(8));
    if w == 0 || h == 0 {
        return Err(FlowIoError::ZeroDimension);
    }
    let expected = 12 + 8 * w * h;
    if bytes.len() < expected {
        return Err(FlowIoError::Truncated {
            expected,
            found: bytes.len(),
        });
    }
    let float = |i: usize| f32::from_le_bytes(bytes[i..i + 4].try_into().unwrap());
    let data = (0..w * h).map(|k| [float(12 + 8 * k), float(16 + 8 * k)]).collect();
    Ok(FlowField::from_vec(w, h, data).expect("length matches dimensions"))
}

/// One `x,y,dx,dy` row per pixel, row-major.
pub fn write_flow_csv<W: Write>(mut out: W, flow: &FlowField) -> std::io::Result<()> {
    writeln!(out, "x,y,dx,dy")?;
    let w = flow.width();
    for (k, d) in flow.data().iter().enumerate() {
        writeln!(out, "{},{},{},{}", k % w, k / w, d[0], d[1])?;
    }
    out.flush()
}
