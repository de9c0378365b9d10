//! Seeded random deformation suites used for accuracy checks and benchmarks.
//!
//! Every generated field keeps its maximum displacement at or below 5 px and
//! keeps the indentation disk inside the centred ROI.

use alloc::vec::Vec;

use super::DeformationSpec;
use crate::grid::DEFAULT_ROI_SIDE;
use crate::math;
use crate::rng::Xoshiro256;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SuiteKind {
    /// Indentation plus a uniform shear.
    IndentationShear,
    /// Partial-contact tilt ramps.
    Tilt,
    /// Alternates the two, starting with an indentation.
    Mixed,
}

fn roi_side(width: usize, height: usize) -> f64 {
    DEFAULT_ROI_SIDE.min(width).min(height) as f64
}

/// Indentation (radius 18–41 % of the ROI side, amplitude 0.03–0.06) off the
/// image centre by up to 9 % of the ROI side, plus a shear of at most 2.8 px in
/// a random direction.
pub fn indentation_shear(rng: &mut Xoshiro256, width: usize, height: usize) -> DeformationSpec {
    let side = roi_side(width, height);
    let c = [(width as f64 - 1.0) / 2.0, (height as f64 - 1.0) / 2.0];
    let max_offset = 0.09 * side;
    let offset = [rng.uniform(-max_offset, max_offset), rng.uniform(-max_offset, max_offset)];
    let radius = rng.uniform(0.18, 0.41) * side;
    let amplitude = rng.uniform(0.03, 0.06);
    let shear_mag = rng.uniform(0.0, 2.8);
    let angle = rng.uniform(0.0, core::f64::consts::TAU);
    DeformationSpec::composite(alloc::vec![
        DeformationSpec::indentation([c[0] + offset[0], c[1] + offset[1]], radius, amplitude),
        DeformationSpec::uniform_shear([shear_mag * math::cos(angle), shear_mag * math::sin(angle)]),
    ])
}

/// Tilt ramp along a random image axis with contact over 25–75 % of the ROI
/// and a 3–5 px shear parallel to the axis.
pub fn tilt(rng: &mut Xoshiro256, width: usize, height: usize) -> DeformationSpec {
    let side = roi_side(width, height);
    let axis = match rng.below(4) {
        0 => [1.0, 0.0],
        1 => [-1.0, 0.0],
        2 => [0.0, 1.0],
        _ => [0.0, -1.0],
    };
    let fraction = rng.uniform(0.25, 0.75);
    let mag = rng.uniform(3.0, 5.0);
    let sign = if rng.below(2) == 0 { 1.0 } else { -1.0 };
    DeformationSpec::tilt_ramp(axis, fraction, [sign * mag * axis[0], sign * mag * axis[1]])
        .with_ramp_extent(side)
}

pub fn random_suite(seed: u64, n: usize, width: usize, height: usize, kind: SuiteKind) -> Vec<DeformationSpec> {
    let mut rng = Xoshiro256::seed_from_u64(seed);
    (0..n)
        .map(|i| match kind {
            SuiteKind::IndentationShear => indentation_shear(&mut rng, width, height),
            SuiteKind::Tilt => tilt(&mut rng, width, height),
            SuiteKind::Mixed if i % 2 == 0 => indentation_shear(&mut rng, width, height),
            SuiteKind::Mixed => tilt(&mut rng, width, height),
        })
        .collect()
}
