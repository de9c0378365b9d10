//! Contact-state estimation from a displacement field.
//!
//! Contact area comes from the divergence of the flow: the membrane stretches
//! or compresses where it touches an object, while a rigid translation has
//! zero divergence. The divergence is smoothed, cropped to the ROI,
//! thresholded, cleaned of speckle, and hole-filled. Shear force comes from
//! the mean displacement through the calibration map.

use alloc::vec::Vec;

use crate::calibration::CalibrationModel;
use crate::flow::FlowField;
use crate::grid::{Mask, Roi, ScalarGrid, DEFAULT_ROI_SIDE};
use crate::math;
use crate::membrane::force_from_displacement;
use crate::{Error, Result, Vec2};

/// Which divergence values count as contact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Polarity {
    /// `|div| > threshold`: both stretched and compressed membrane.
    #[default]
    Magnitude,
    /// `div > threshold`: stretched membrane only.
    Expansion,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct EstimatorParams {
    /// Side of the centred square ROI, pixels.
    pub roi_side: usize,
    /// Divergence threshold, 1/px.
    pub divergence_threshold: f32,
    /// Gaussian smoothing applied to the divergence, pixels (0 disables).
    pub smoothing_sigma: f32,
    /// 4-connected components smaller than this are discarded.
    pub min_blob_area: usize,
    pub polarity: Polarity,
    /// Fill background regions not connected to the ROI border.
    pub fill_holes: bool,
    /// 3×3 median filter before smoothing, removing isolated outliers.
    pub median_prefilter: bool,
}

impl Default for EstimatorParams {
    fn default() -> Self {
        Self {
            roi_side: DEFAULT_ROI_SIDE,
            divergence_threshold: 0.01,
            smoothing_sigma: 2.0,
            min_blob_area: 25,
            polarity: Polarity::Magnitude,
            fill_holes: true,
            median_prefilter: true,
        }
    }
}

impl EstimatorParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.divergence_threshold > 0.0 && self.divergence_threshold.is_finite()) {
            return Err(Error::InvalidParams("divergence_threshold must be positive"));
        }
        if !(self.smoothing_sigma >= 0.0 && self.smoothing_sigma.is_finite()) {
            return Err(Error::InvalidParams("smoothing_sigma must be non-negative"));
        }
        if self.roi_side == 0 {
            return Err(Error::EmptyRoi);
        }
        Ok(())
    }

    pub fn roi(&self, width: usize, height: usize) -> Result<Roi> {
        Roi::centered(width, height, self.roi_side)
    }
}

/// Contact measurements for one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct ContactState {
    /// Fraction of ROI cells in contact, `[0, 1]`.
    pub area_fraction: f64,
    /// Contact cells over the ROI.
    pub contact_mask: Mask,
    /// Mean displacement over the ROI, pixels.
    pub mean_displacement: Vec2,
    /// Shear force, newtons.
    pub shear_force: Vec2,
    /// Seconds.
    pub timestamp: f64,
}

impl ContactState {
    /// State for an unloaded membrane.
    pub fn empty(roi_width: usize, roi_height: usize, timestamp: f64) -> Self {
        Self {
            area_fraction: 0.0,
            contact_mask: Mask::new(roi_width, roi_height),
            mean_displacement: [0.0, 0.0],
            shear_force: [0.0, 0.0],
            timestamp,
        }
    }

    pub fn force_magnitude(&self) -> f64 {
        math::hypot(self.shear_force[0], self.shear_force[1])
    }
}

/// Central-difference divergence, one-sided on the border.
pub fn divergence(flow: &FlowField) -> ScalarGrid {
    let (w, h) = flow.dims();
    let mut out = ScalarGrid::zeros(w, h);
    for y in 0..h {
        for x in 0..w {
            let ddx = if w == 1 {
                0.0
            } else if x == 0 {
                flow.at(1, y)[0] - flow.at(0, y)[0]
            } else if x == w - 1 {
                flow.at(x, y)[0] - flow.at(x - 1, y)[0]
            } else {
                (flow.at(x + 1, y)[0] - flow.at(x - 1, y)[0]) * 0.5
            };
            let ddy = if h == 1 {
                0.0
            } else if y == 0 {
                flow.at(x, 1)[1] - flow.at(x, 0)[1]
            } else if y == h - 1 {
                flow.at(x, y)[1] - flow.at(x, y - 1)[1]
            } else {
                (flow.at(x, y + 1)[1] - flow.at(x, y - 1)[1]) * 0.5
            };
            out.data[y * w + x] = ddx + ddy;
        }
    }
    out
}

/// Separable Gaussian blur with a `ceil(3 sigma)` radius and clamped borders.
pub fn gaussian_smooth(grid: &ScalarGrid, sigma: f32) -> ScalarGrid {
    if sigma <= 0.0 {
        return grid.clone();
    }
    let radius = math::ceil(3.0 * sigma as f64) as isize;
    let mut kernel: Vec<f32> = (-radius..=radius)
        .map(|i| math::exp(-((i * i) as f64) / (2.0 * (sigma * sigma) as f64)) as f32)
        .collect();
    let total: f32 = kernel.iter().sum();
    kernel.iter_mut().for_each(|k| *k /= total);

    let (w, h) = (grid.width, grid.height);
    let clamp = |i: isize, n: usize| i.clamp(0, n as isize - 1) as usize;
    let mut tmp = ScalarGrid::zeros(w, h);
    for y in 0..h {
        let row = &grid.data[y * w..(y + 1) * w];
        for x in 0..w {
            let mut acc = 0.0;
            for (t, &k) in kernel.iter().enumerate() {
                acc += k * row[clamp(x as isize + t as isize - radius, w)];
            }
            tmp.data[y * w + x] = acc;
        }
    }
    let mut out = ScalarGrid::zeros(w, h);
    for y in 0..h {
        for (t, &k) in kernel.iter().enumerate() {
            let r = clamp(y as isize + t as isize - radius, h) * w;
            for x in 0..w {
                out.data[y * w + x] += k * tmp.data[r + x];
            }
        }
    }
    out
}

/// 3×3 median with clamped borders.
pub fn median3(grid: &ScalarGrid) -> ScalarGrid {
    let (w, h) = (grid.width, grid.height);
    let mut out = ScalarGrid::zeros(w, h);
    let mut win = [0.0f32; 9];
    for y in 0..h {
        for x in 0..w {
            let mut n = 0;
            for dy in [-1isize, 0, 1] {
                let yy = (y as isize + dy).clamp(0, h as isize - 1) as usize;
                for dx in [-1isize, 0, 1] {
                    let xx = (x as isize + dx).clamp(0, w as isize - 1) as usize;
                    win[n] = grid.data[yy * w + xx];
                    n += 1;
                }
            }
            win.sort_unstable_by(|a, b| a.total_cmp(b));
            out.data[y * w + x] = win[4];
        }
    }
    out
}

/// Median-filter (optional), smooth, crop to the ROI, threshold, drop small
/// 4-connected blobs, and fill enclosed holes.
pub fn contact_mask(div: &ScalarGrid, params: &EstimatorParams) -> Result<Mask> {
    params.validate()?;
    let roi = params.roi(div.width, div.height)?;
    // Filter only the ROI plus the filters' reach; the result inside the ROI
    // is identical to filtering the whole grid.
    let margin = math::ceil(3.0 * params.smoothing_sigma as f64) as usize + 1;
    let x0 = roi.x0.saturating_sub(margin);
    let y0 = roi.y0.saturating_sub(margin);
    let outer = Roi {
        x0,
        y0,
        width: (roi.x0 + roi.width + margin).min(div.width) - x0,
        height: (roi.y0 + roi.height + margin).min(div.height) - y0,
    };
    let mut work = div.crop(&outer);
    if params.median_prefilter {
        work = median3(&work);
    }
    let smoothed = gaussian_smooth(&work, params.smoothing_sigma);
    let cropped = smoothed.crop(&Roi {
        x0: roi.x0 - x0,
        y0: roi.y0 - y0,
        width: roi.width,
        height: roi.height,
    });
    let t = params.divergence_threshold;
    let mut mask = Mask {
        width: roi.width,
        height: roi.height,
        data: cropped
            .data
            .iter()
            .map(|&v| match params.polarity {
                Polarity::Magnitude => v.abs() > t,
                Polarity::Expansion => v > t,
            })
            .collect(),
    };
    remove_small_components(&mut mask, params.min_blob_area);
    if params.fill_holes {
        fill_holes(&mut mask);
    }
    Ok(mask)
}

fn neighbours4(k: usize, w: usize, h: usize) -> impl Iterator<Item = usize> {
    let (x, y) = (k % w, k / w);
    [
        (x > 0).then(|| k - 1),
        (x + 1 < w).then(|| k + 1),
        (y > 0).then(|| k - w),
        (y + 1 < h).then(|| k + w),
    ]
    .into_iter()
    .flatten()
}

/// Clears every 4-connected `true` component with fewer than `min_area` cells.
pub fn remove_small_components(mask: &mut Mask, min_area: usize) {
    if min_area <= 1 {
        return;
    }
    let (w, h) = (mask.width, mask.height);
    let mut seen = alloc::vec![false; w * h];
    let mut stack = Vec::new();
    let mut component = Vec::new();
    for start in 0..w * h {
        if !mask.data[start] || seen[start] {
            continue;
        }
        component.clear();
        seen[start] = true;
        stack.push(start);
        while let Some(k) = stack.pop() {
            component.push(k);
            for q in neighbours4(k, w, h) {
                if mask.data[q] && !seen[q] {
                    seen[q] = true;
                    stack.push(q);
                }
            }
        }
        if component.len() < min_area {
            for &k in &component {
                mask.data[k] = false;
            }
        }
    }
}

/// Sets every `false` cell not 4-connected to the border to `true`.
pub fn fill_holes(mask: &mut Mask) {
    let (w, h) = (mask.width, mask.height);
    let mut outside = alloc::vec![false; w * h];
    let mut stack: Vec<usize> = (0..w * h)
        .filter(|&k| {
            let (x, y) = (k % w, k / w);
            (x == 0 || y == 0 || x == w - 1 || y == h - 1) && !mask.data[k]
        })
        .collect();
    for &k in &stack {
        outside[k] = true;
    }
    while let Some(k) = stack.pop() {
        for q in neighbours4(k, w, h) {
            if !mask.data[q] && !outside[q] {
                outside[q] = true;
                stack.push(q);
            }
        }
    }
    for (m, o) in mask.data.iter_mut().zip(&outside) {
        *m = !*o;
    }
}

/// Arithmetic mean of the displacement vectors over `roi`.
pub fn mean_displacement(flow: &FlowField, roi: &Roi) -> Result<Vec2> {
    flow.mean_over(roi)
}

/// `tau(|m|)` along `m / |m|`; zero below 1e-6 px.
pub fn shear_force(mean_disp: Vec2, model: &CalibrationModel) -> Vec2 {
    force_from_displacement(mean_disp, model)
}

/// Full estimate: divergence → mask → area, and mean displacement → force.
pub fn estimate(flow: &FlowField, params: &EstimatorParams, model: &CalibrationModel, t: f64) -> Result<ContactState> {
    params.validate()?;
    let roi = params.roi(flow.width(), flow.height())?;
    let mask = contact_mask(&divergence(flow), params)?;
    let mean = mean_displacement(flow, &roi)?;
    Ok(ContactState {
        area_fraction: mask.fraction(),
        contact_mask: mask,
        mean_displacement: mean,
        shear_force: shear_force(mean, model),
        timestamp: t,
    })
}
