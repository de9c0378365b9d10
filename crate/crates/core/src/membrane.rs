//! Synthetic deformable-membrane simulator.
//!
//! A [`DeformationSpec`] describes an imposed displacement field with a known
//! closed form. The simulator renders the deformed marker image and supplies
//! the analytic ground truth (field, contact mask, contact area, force) that
//! the flow engine and the estimator are checked against.

use alloc::vec::Vec;

use crate::calibration::CalibrationModel;
use crate::flow::FlowField;
use crate::grid::{Mask, Roi, DEFAULT_ROI_SIDE};
use crate::imaging::{Frame, Plane};
use crate::math;
use crate::rng::Xoshiro256;
use crate::{Error, Result, Vec2};

pub mod suite;

/// Mean displacements below this magnitude map to zero force.
pub const FORCE_EPS_PX: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum DeformationKind {
    UniformShear,
    Indentation,
    TiltRamp,
    Composite,
}

/// Parametric membrane deformation. Fields not used by `kind` are ignored.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct DeformationSpec {
    pub kind: DeformationKind,
    /// Shear displacement (uniform shear, tilt ramp), pixels.
    pub shear: Vec2,
    /// Indentation centre, pixels.
    pub center: Vec2,
    /// Indentation radius, pixels.
    pub radius: f64,
    /// Indentation expansion coefficient.
    pub amplitude: f64,
    /// Tilt direction; contact lies on the side opposite to this axis.
    pub ramp_axis: Vec2,
    /// Fraction of `ramp_extent` in contact, in `[0, 1]`.
    pub ramp_fraction: f64,
    /// Span, centred on the image centre along `ramp_axis`, over which
    /// `ramp_fraction` is measured. `None` uses the full image span.
    pub ramp_extent: Option<f64>,
    pub children: Vec<DeformationSpec>,
}

impl Default for DeformationSpec {
    fn default() -> Self {
        Self {
            kind: DeformationKind::UniformShear,
            shear: [0.0, 0.0],
            center: [0.0, 0.0],
            radius: 1.0,
            amplitude: 0.0,
            ramp_axis: [1.0, 0.0],
            ramp_fraction: 0.0,
            ramp_extent: None,
            children: Vec::new(),
        }
    }
}

impl DeformationSpec {
    pub fn uniform_shear(shear: Vec2) -> Self {
        Self {
            kind: DeformationKind::UniformShear,
            shear,
            ..Self::default()
        }
    }

    pub fn indentation(center: Vec2, radius: f64, amplitude: f64) -> Self {
        Self {
            kind: DeformationKind::Indentation,
            center,
            radius,
            amplitude,
            ..Self::default()
        }
    }

    pub fn tilt_ramp(ramp_axis: Vec2, ramp_fraction: f64, shear: Vec2) -> Self {
        Self {
            kind: DeformationKind::TiltRamp,
            ramp_axis,
            ramp_fraction,
            shear,
            ..Self::default()
        }
    }

    pub fn with_ramp_extent(mut self, extent: f64) -> Self {
        self.ramp_extent = Some(extent);
        self
    }

    pub fn composite(children: Vec<DeformationSpec>) -> Self {
        Self {
            kind: DeformationKind::Composite,
            children,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite2 = |v: Vec2| v[0].is_finite() && v[1].is_finite();
        if !finite2(self.shear) || !finite2(self.center) || !self.amplitude.is_finite() {
            return Err(Error::InvalidParams("deformation parameters must be finite"));
        }
        match self.kind {
            DeformationKind::UniformShear => Ok(()),
            DeformationKind::Indentation => {
                if self.radius > 0.0 && self.radius.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidParams("indentation radius must be positive"))
                }
            }
            DeformationKind::TiltRamp => {
                if !(0.0..=1.0).contains(&self.ramp_fraction) {
                    return Err(Error::InvalidParams("ramp_fraction must lie in [0, 1]"));
                }
                if math::hypot(self.ramp_axis[0], self.ramp_axis[1]) == 0.0 || !finite2(self.ramp_axis) {
                    return Err(Error::InvalidParams("ramp_axis must be a non-zero vector"));
                }
                match self.ramp_extent {
                    Some(e) if !(e > 0.0 && e.is_finite()) => {
                        Err(Error::InvalidParams("ramp_extent must be positive"))
                    }
                    _ => Ok(()),
                }
            }
            DeformationKind::Composite => {
                for c in &self.children {
                    if c.kind == DeformationKind::Composite {
                        return Err(Error::InvalidParams("composite children cannot be composite"));
                    }
                    c.validate()?;
                }
                Ok(())
            }
        }
    }

    /// Evaluates the analytic field for a `width × height` frame.
    pub fn field(&self, width: usize, height: usize) -> AnalyticField<'_> {
        AnalyticField {
            spec: self,
            width,
            height,
        }
    }
}

/// Tilt-ramp geometry resolved against a particular frame.
#[derive(Debug, Clone, Copy)]
struct Ramp {
    axis: Vec2,
    origin: Vec2,
    boundary: f64,
    length: f64,
}

impl Ramp {
    fn new(spec: &DeformationSpec, width: usize, height: usize) -> Self {
        let n = math::hypot(spec.ramp_axis[0], spec.ramp_axis[1]);
        let axis = [spec.ramp_axis[0] / n, spec.ramp_axis[1] / n];
        let origin = [(width as f64 - 1.0) / 2.0, (height as f64 - 1.0) / 2.0];
        let (boundary, edge) = match spec.ramp_extent {
            Some(span) => ((spec.ramp_fraction - 0.5) * span, -span / 2.0),
            None => {
                let span = axis[0].abs() * width as f64 + axis[1].abs() * height as f64;
                // Lowest projection of any pixel centre: the image edge the
                // ramp reaches at full strength.
                let edge = -(axis[0].abs() * (width as f64 - 1.0) + axis[1].abs() * (height as f64 - 1.0)) / 2.0;
                ((spec.ramp_fraction - 0.5) * span, edge)
            }
        };
        Self {
            axis,
            origin,
            boundary,
            length: boundary - edge,
        }
    }

    #[inline]
    fn projection(&self, x: f64, y: f64) -> f64 {
        (x - self.origin[0]) * self.axis[0] + (y - self.origin[1]) * self.axis[1]
    }

    #[inline]
    fn in_contact(&self, x: f64, y: f64) -> bool {
        self.length > 0.0 && self.projection(x, y) < self.boundary
    }

    /// Ramp weight: 0 at the contact boundary, 1 at the image edge (or the
    /// edge of the extent window when one is set).
    #[inline]
    fn weight(&self, x: f64, y: f64) -> f64 {
        if !self.in_contact(x, y) {
            return 0.0;
        }
        ((self.boundary - self.projection(x, y)) / self.length).min(1.0)
    }
}

/// A [`DeformationSpec`] bound to frame dimensions.
#[derive(Debug, Clone, Copy)]
pub struct AnalyticField<'a> {
    spec: &'a DeformationSpec,
    width: usize,
    height: usize,
}

impl AnalyticField<'_> {
    /// Displacement at the (real-valued) pixel position `(x, y)`.
    pub fn displacement(&self, x: f64, y: f64) -> Vec2 {
        displacement(self.spec, self.width, self.height, x, y)
    }

    /// Whether the cell at `(x, y)` is in contact.
    pub fn in_contact(&self, x: usize, y: usize, pure_shear: PureShearContact) -> bool {
        let s = self.spec;
        match s.kind {
            DeformationKind::UniformShear => {
                pure_shear == PureShearContact::FullGrid && (s.shear[0] != 0.0 || s.shear[1] != 0.0)
            }
            DeformationKind::Composite => s
                .children
                .iter()
                .any(|c| c.kind != DeformationKind::UniformShear && contact(c, self.width, self.height, x, y)),
            _ => contact(s, self.width, self.height, x, y),
        }
    }
}

fn displacement(spec: &DeformationSpec, width: usize, height: usize, x: f64, y: f64) -> Vec2 {
    match spec.kind {
        DeformationKind::UniformShear => spec.shear,
        DeformationKind::Indentation => {
            let dx = x - spec.center[0];
            let dy = y - spec.center[1];
            let r2 = (dx * dx + dy * dy) / (spec.radius * spec.radius);
            if r2 < 1.0 {
                let g = spec.amplitude * (1.0 - r2);
                [g * dx, g * dy]
            } else {
                [0.0, 0.0]
            }
        }
        DeformationKind::TiltRamp => {
            let w = Ramp::new(spec, width, height).weight(x, y);
            [w * spec.shear[0], w * spec.shear[1]]
        }
        DeformationKind::Composite => spec.children.iter().fold([0.0, 0.0], |acc, c| {
            let d = displacement(c, width, height, x, y);
            [acc[0] + d[0], acc[1] + d[1]]
        }),
    }
}

// Contact support of a single non-composite spec.
fn contact(spec: &DeformationSpec, width: usize, height: usize, x: usize, y: usize) -> bool {
    let (xf, yf) = (x as f64, y as f64);
    match spec.kind {
        DeformationKind::Indentation => {
            let dx = xf - spec.center[0];
            let dy = yf - spec.center[1];
            spec.amplitude != 0.0 && dx * dx + dy * dy < spec.radius * spec.radius
        }
        DeformationKind::TiltRamp => {
            (spec.shear[0] != 0.0 || spec.shear[1] != 0.0) && Ramp::new(spec, width, height).in_contact(xf, yf)
        }
        DeformationKind::UniformShear => spec.shear[0] != 0.0 || spec.shear[1] != 0.0,
        DeformationKind::Composite => false,
    }
}

/// Contact convention for a deformation that is pure uniform shear.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum PureShearContact {
    /// Membrane fully stuck to the object: every cell is in contact.
    #[default]
    FullGrid,
    /// No contact reported, mirroring what a divergence detector sees.
    Empty,
}

/// Simulator options.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct SimOptions {
    /// Side of the centred ground-truth ROI; clipped to the frame.
    pub roi_side: usize,
    pub pure_shear_contact: PureShearContact,
    /// Standard deviation of additive Gaussian intensity noise (0 = none).
    pub noise_sigma: f64,
    pub noise_seed: u64,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            roi_side: DEFAULT_ROI_SIDE,
            pure_shear_contact: PureShearContact::FullGrid,
            noise_sigma: 0.0,
            noise_seed: 0,
        }
    }
}

impl SimOptions {
    pub fn roi(&self, width: usize, height: usize) -> Roi {
        let side = self.roi_side.min(width).min(height);
        Roi::centered(width, height, side).expect("clipped ROI always fits")
    }
}

/// Analytic ground truth for one deformation.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub flow: FlowField,
    /// Contact cells over the ROI.
    pub contact_mask: Mask,
    pub roi: Roi,
    pub area_fraction: f64,
    /// Mean displacement over the ROI, pixels.
    pub mean_displacement: Vec2,
    /// Shear force, newtons.
    pub shear_force: Vec2,
}

/// The analytic displacement field sampled at every pixel centre.
pub fn analytic_field(spec: &DeformationSpec, width: usize, height: usize) -> FlowField {
    let field = spec.field(width, height);
    FlowField::from_fn(width, height, |x, y| {
        let d = field.displacement(x as f64, y as f64);
        [d[0] as f32, d[1] as f32]
    })
}

/// Force vector for a mean displacement: magnitude from the calibration map,
/// direction from the displacement.
pub fn force_from_displacement(mean: Vec2, model: &CalibrationModel) -> Vec2 {
    let m = math::hypot(mean[0], mean[1]);
    if m < FORCE_EPS_PX {
        return [0.0, 0.0];
    }
    let tau = model.evaluate(m);
    [tau * mean[0] / m, tau * mean[1] / m]
}

pub fn ground_truth(
    spec: &DeformationSpec,
    model: &CalibrationModel,
    width: usize,
    height: usize,
    opts: &SimOptions,
) -> GroundTruth {
    let field = spec.field(width, height);
    let roi = opts.roi(width, height);
    let mut mask = Mask::new(roi.width, roi.height);
    let (mut sx, mut sy) = (0.0f64, 0.0f64);
    for j in 0..roi.height {
        for i in 0..roi.width {
            let (x, y) = (roi.x0 + i, roi.y0 + j);
            mask.data[j * roi.width + i] = field.in_contact(x, y, opts.pure_shear_contact);
            let d = field.displacement(x as f64, y as f64);
            sx += d[0];
            sy += d[1];
        }
    }
    let n = roi.cells() as f64;
    let mean_displacement = [sx / n, sy / n];
    GroundTruth {
        flow: analytic_field(spec, width, height),
        area_fraction: mask.fraction(),
        contact_mask: mask,
        roi,
        shear_force: force_from_displacement(mean_displacement, model),
        mean_displacement,
    }
}

/// Backward warp of `base` by the spec's field: `out(p) = base(p - u(p))`,
/// bilinear, edge-clamped, rounded to the nearest intensity.
pub fn render(base: &Frame, spec: &DeformationSpec) -> Frame {
    render_with(base, spec, 0.0, 0)
}

/// [`render`] plus additive Gaussian intensity noise of standard deviation
/// `noise_sigma` drawn from `noise_seed`.
pub fn render_with(base: &Frame, spec: &DeformationSpec, noise_sigma: f64, noise_seed: u64) -> Frame {
    let (w, h) = base.dims();
    let plane = Plane::from_frame(base);
    let field = spec.field(w, h);
    let mut rng = Xoshiro256::seed_from_u64(noise_seed);
    let mut pixels = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let d = field.displacement(x as f64, y as f64);
            let v = sample_f64(&plane, x as f64 - d[0], y as f64 - d[1]);
            let v = if noise_sigma > 0.0 { v + noise_sigma * rng.normal() } else { v };
            pixels.push(math::round(v).clamp(0.0, 255.0) as u8);
        }
    }
    Frame::new(w, h, pixels)
        .expect("dimensions preserved")
        .with_scale(base.scale)
        .with_timestamp(base.timestamp)
}

// Bilinear sampling in f64 so integer shifts reproduce the source exactly.
fn sample_f64(p: &Plane, x: f64, y: f64) -> f64 {
    let x = x.clamp(0.0, (p.width - 1) as f64);
    let y = y.clamp(0.0, (p.height - 1) as f64);
    let x0 = math::floor(x);
    let y0 = math::floor(y);
    let (fx, fy) = (x - x0, y - y0);
    let (x0, y0) = (x0 as usize, y0 as usize);
    let x1 = (x0 + 1).min(p.width - 1);
    let y1 = (y0 + 1).min(p.height - 1);
    let v = |xx: usize, yy: usize| p.data[yy * p.width + xx] as f64;
    let top = v(x0, y0) * (1.0 - fx) + v(x1, y0) * fx;
    let bot = v(x0, y1) * (1.0 - fx) + v(x1, y1) * fx;
    top * (1.0 - fy) + bot * fy
}

/// One entry of a loading schedule.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct ScheduleEntry {
    pub time: f64,
    pub spec: DeformationSpec,
}

/// A rendered frame with its ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedFrame {
    pub frame: Frame,
    pub truth: GroundTruth,
}

/// Renders every schedule entry against `base`. Times must be strictly
/// increasing; frame timestamps are taken from the schedule. Entry `i` uses
/// noise seed `opts.noise_seed + i`.
pub fn simulate_sequence(
    base: &Frame,
    schedule: &[ScheduleEntry],
    model: &CalibrationModel,
    opts: &SimOptions,
) -> Result<Vec<SimulatedFrame>> {
    for (i, w) in schedule.windows(2).enumerate() {
        if !(w[1].time > w[0].time) {
            return Err(Error::NonMonotonicSchedule { index: i + 1 });
        }
    }
    for e in schedule {
        e.spec.validate()?;
    }
    let (w, h) = base.dims();
    let out = crate::par::map_collect(schedule.len(), |i| {
        let e = &schedule[i];
        let frame = render_with(base, &e.spec, opts.noise_sigma, opts.noise_seed.wrapping_add(i as u64))
            .with_timestamp(e.time);
        SimulatedFrame {
            frame,
            truth: ground_truth(&e.spec, model, w, h, opts),
        }
    });
    Ok(out)
}

/// Stepped shear protocol: `steps` entries, entry `k` (1-based) holding a
/// uniform shear of `k * increment_px` along `direction`, spaced `dt` apart
/// starting at `t0`.
pub fn stepped_shear_schedule(steps: usize, increment_px: f64, direction: Vec2, t0: f64, dt: f64) -> Vec<ScheduleEntry> {
    let n = math::hypot(direction[0], direction[1]);
    let dir = [direction[0] / n, direction[1] / n];
    (1..=steps)
        .map(|k| {
            let s = k as f64 * increment_px;
            ScheduleEntry {
                time: t0 + (k - 1) as f64 * dt,
                spec: DeformationSpec::uniform_shear([s * dir[0], s * dir[1]]),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::{generate_marker_pattern, MarkerPattern};

    fn pattern(seed: u64, side: usize) -> Frame {
        generate_marker_pattern(&MarkerPattern::new(seed, side, side)).unwrap()
    }

    #[test]
    fn uniform_shear_field_is_constant() {
        let f = analytic_field(&DeformationSpec::uniform_shear([2.0, 0.0]), 32, 24);
        assert!(f.data().iter().all(|&d| d == [2.0, 0.0]));
    }

    #[test]
    fn indentation_vanishes_at_centre_and_rim() {
        let s = DeformationSpec::indentation([176.0, 176.0], 60.0, 0.05);
        let f = s.field(352, 352);
        assert_eq!(f.displacement(176.0, 176.0), [0.0, 0.0]);
        assert_eq!(f.displacement(236.0, 176.0), [0.0, 0.0]);
        let d = f.displacement(206.0, 176.0);
        assert!((d[0] - 0.05 * 30.0 * 0.75).abs() < 1e-12 && d[1] == 0.0);
    }

    #[test]
    fn tilt_ramp_geometry() {
        // Axis +x on a 100-wide frame: contact where x - 49.5 < (0.3 - 0.5) * 100.
        let s = DeformationSpec::tilt_ramp([1.0, 0.0], 0.3, [4.0, 0.0]);
        let f = s.field(100, 10);
        assert_eq!(f.displacement(0.0, 5.0), [4.0, 0.0]);
        assert_eq!(f.displacement(29.5, 5.0), [0.0, 0.0]);
        assert_eq!(f.displacement(60.0, 5.0), [0.0, 0.0]);
        let mid = f.displacement(14.75, 5.0);
        assert!((mid[0] - 2.0).abs() < 1e-12);
        let gt = ground_truth(&s, &CalibrationModel::REFERENCE, 100, 10, &SimOptions {
            roi_side: 10,
            ..SimOptions::default()
        });
        // ROI covers x in 45..55, entirely outside the contact band.
        assert_eq!(gt.area_fraction, 0.0);
    }

    #[test]
    fn tilt_ramp_extent_sets_roi_fraction() {
        for f in [0.1, 0.45, 0.9] {
            let s = DeformationSpec::tilt_ramp([0.0, 1.0], f, [0.0, 3.0]).with_ramp_extent(220.0);
            let gt = ground_truth(&s, &CalibrationModel::REFERENCE, 352, 352, &SimOptions::default());
            assert!((gt.area_fraction - f).abs() < 1.0 / 220.0, "{f} {}", gt.area_fraction);
        }
    }

    #[test]
    fn pure_shear_ground_truth() {
        let gt = ground_truth(
            &DeformationSpec::uniform_shear([2.0, 0.0]),
            &CalibrationModel::REFERENCE,
            352,
            352,
            &SimOptions::default(),
        );
        assert_eq!(gt.mean_displacement, [2.0, 0.0]);
        assert!((gt.shear_force[0] - 3.561624).abs() < 1e-12);
        assert_eq!(gt.shear_force[1], 0.0);
        assert_eq!(gt.area_fraction, 1.0);

        let empty = ground_truth(
            &DeformationSpec::uniform_shear([2.0, 0.0]),
            &CalibrationModel::REFERENCE,
            352,
            352,
            &SimOptions {
                pure_shear_contact: PureShearContact::Empty,
                ..SimOptions::default()
            },
        );
        assert_eq!(empty.area_fraction, 0.0);
    }

    #[test]
    fn indentation_area_matches_disk() {
        let s = DeformationSpec::indentation([175.5, 175.5], 55.0, 0.05);
        let gt = ground_truth(&s, &CalibrationModel::REFERENCE, 352, 352, &SimOptions::default());
        let analytic = core::f64::consts::PI * 55.0 * 55.0 / (220.0 * 220.0);
        assert!((gt.area_fraction - analytic).abs() / analytic < 0.01);
    }

    #[test]
    fn zero_spec_has_no_contact_or_force() {
        for s in [
            DeformationSpec::indentation([100.0, 100.0], 40.0, 0.0),
            DeformationSpec::uniform_shear([0.0, 0.0]),
        ] {
            let gt = ground_truth(&s, &CalibrationModel::REFERENCE, 352, 352, &SimOptions::default());
            assert_eq!(gt.area_fraction, 0.0);
            assert_eq!(gt.shear_force, [0.0, 0.0]);
        }
    }

    #[test]
    fn composite_sums_children_and_ignores_shear_in_mask() {
        let a = DeformationSpec::indentation([175.5, 175.5], 55.0, 0.05);
        let b = DeformationSpec::uniform_shear([2.0, 0.0]);
        let c = DeformationSpec::composite(alloc::vec![a.clone(), b.clone()]);
        let (fa, fb, fc) = (analytic_field(&a, 64, 64), analytic_field(&b, 64, 64), analytic_field(&c, 64, 64));
        for i in 0..fa.data().len() {
            let s = [fa.data()[i][0] + fb.data()[i][0], fa.data()[i][1] + fb.data()[i][1]];
            assert_eq!(fc.data()[i], s);
        }
        let gt = ground_truth(&c, &CalibrationModel::REFERENCE, 352, 352, &SimOptions::default());
        let gta = ground_truth(&a, &CalibrationModel::REFERENCE, 352, 352, &SimOptions::default());
        assert_eq!(gt.area_fraction, gta.area_fraction);
        assert!((gt.mean_displacement[0] - 2.0).abs() < 1e-9);
    }

    #[test]
    fn validation() {
        assert!(DeformationSpec::indentation([0.0, 0.0], 0.0, 0.1).validate().is_err());
        assert!(DeformationSpec::tilt_ramp([1.0, 0.0], 1.5, [0.0, 0.0]).validate().is_err());
        let nested = DeformationSpec::composite(alloc::vec![DeformationSpec::composite(Vec::new())]);
        assert!(nested.validate().is_err());
    }

    #[test]
    fn zero_field_render_is_identity() {
        let base = pattern(3, 40);
        let out = render(&base, &DeformationSpec::uniform_shear([0.0, 0.0]));
        assert_eq!(out, base);
    }

    #[test]
    fn integer_shear_is_exact_translation() {
        let base = pattern(4, 40);
        let out = render(&base, &DeformationSpec::uniform_shear([3.0, 0.0]));
        for y in 0..40 {
            for x in 3..40 {
                assert_eq!(out.get(x, y), base.get(x - 3, y));
            }
        }
    }

    #[test]
    fn half_pixel_shear_averages_neighbours() {
        let base = Frame::new(4, 4, (0..16).map(|i| (i * 13 % 251) as u8).collect()).unwrap();
        let out = render(&base, &DeformationSpec::uniform_shear([0.5, 0.0]));
        for y in 0..4 {
            for x in 1..4 {
                let avg = (base.get(x - 1, y) as f64 + base.get(x, y) as f64) / 2.0;
                assert!((out.get(x, y) as f64 - avg).abs() <= 1.0);
            }
        }
    }

    #[test]
    fn noise_is_seeded() {
        let base = pattern(5, 32);
        let s = DeformationSpec::uniform_shear([0.0, 0.0]);
        assert_eq!(render_with(&base, &s, 3.0, 1), render_with(&base, &s, 3.0, 1));
        assert_ne!(render_with(&base, &s, 3.0, 1), render_with(&base, &s, 3.0, 2));
    }

    #[test]
    fn sequence_checks_schedule_order() {
        let base = pattern(6, 32);
        let e = |t| ScheduleEntry { time: t, spec: DeformationSpec::default() };
        let r = simulate_sequence(&base, &[e(0.0), e(0.0)], &CalibrationModel::REFERENCE, &SimOptions::default());
        assert_eq!(r, Err(Error::NonMonotonicSchedule { index: 1 }));
        let r = simulate_sequence(&base, &[], &CalibrationModel::REFERENCE, &SimOptions::default()).unwrap();
        assert!(r.is_empty());
        let r = simulate_sequence(&base, &[e(0.5)], &CalibrationModel::REFERENCE, &SimOptions::default()).unwrap();
        assert_eq!(r[0].frame.pixels(), base.pixels());
        assert_eq!(r[0].frame.timestamp, 0.5);
        assert_eq!(r[0].truth.area_fraction, 0.0);
    }

    #[test]
    fn stepped_protocol_means() {
        let base = pattern(7, 64);
        let sched = stepped_shear_schedule(16, 2.5, [1.0, 0.0], 0.0, 0.04);
        let opts = SimOptions { roi_side: 32, ..SimOptions::default() };
        let seq = simulate_sequence(&base, &sched, &CalibrationModel::REFERENCE, &opts).unwrap();
        assert_eq!(seq.len(), 16);
        for (k, s) in seq.iter().enumerate() {
            assert_eq!(s.truth.mean_displacement, [2.5 * (k + 1) as f64, 0.0]);
        }
    }
}
