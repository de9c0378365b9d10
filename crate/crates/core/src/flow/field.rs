use alloc::vec::Vec;

use crate::grid::Roi;
use crate::math;
use crate::{Error, Result, Vec2};

/// Dense per-pixel displacement field in pixels. `at(x, y)` is the
/// displacement of the reference-frame pixel `(x, y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowField {
    width: usize,
    height: usize,
    data: Vec<[f32; 2]>,
}

impl FlowField {
    pub fn zeros(width: usize, height: usize) -> Self {
        Self::uniform(width, height, [0.0, 0.0])
    }

    pub fn uniform(width: usize, height: usize, d: [f32; 2]) -> Self {
        Self {
            width,
            height,
            data: alloc::vec![d; width * height],
        }
    }

    pub fn from_vec(width: usize, height: usize, data: Vec<[f32; 2]>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::DimensionMismatch {
                expected: (width, height),
                found: (data.len(), 1),
            });
        }
        Ok(Self { width, height, data })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> [f32; 2]) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self { width, height, data }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn data(&self) -> &[[f32; 2]] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [[f32; 2]] {
        &mut self.data
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize) -> [f32; 2] {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, d: [f32; 2]) {
        self.data[y * self.width + x] = d;
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|d| d[0].is_finite() && d[1].is_finite())
    }

    pub fn map(&self, mut f: impl FnMut([f32; 2]) -> [f32; 2]) -> FlowField {
        FlowField {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&d| f(d)).collect(),
        }
    }

    /// Cell-wise `a * self + b * other`.
    pub fn combine(&self, a: f32, other: &FlowField, b: f32) -> Result<FlowField> {
        self.ensure_same_dims(other)?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(p, q)| [a * p[0] + b * q[0], a * p[1] + b * q[1]])
            .collect();
        Ok(FlowField {
            width: self.width,
            height: self.height,
            data,
        })
    }

    /// Mean displacement over `roi`, accumulated in f64.
    pub fn mean_over(&self, roi: &Roi) -> Result<Vec2> {
        roi.check(self.width, self.height)?;
        let mut sx = 0.0f64;
        let mut sy = 0.0f64;
        for y in roi.y0..roi.y0 + roi.height {
            for d in &self.data[y * self.width + roi.x0..y * self.width + roi.x0 + roi.width] {
                sx += d[0] as f64;
                sy += d[1] as f64;
            }
        }
        let n = roi.cells() as f64;
        Ok([sx / n, sy / n])
    }

    pub(crate) fn ensure_same_dims(&self, other: &FlowField) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(Error::DimensionMismatch {
                expected: self.dims(),
                found: other.dims(),
            });
        }
        Ok(())
    }
}

/// Endpoint-error summary over a region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EndpointError {
    pub mean: f64,
    pub p95: f64,
}

/// Per-cell Euclidean distance between `estimate` and `truth` over `roi`,
/// summarised by its mean and 95th percentile (nearest-rank).
pub fn endpoint_error(estimate: &FlowField, truth: &FlowField, roi: &Roi) -> Result<EndpointError> {
    estimate.ensure_same_dims(truth)?;
    roi.check(estimate.width, estimate.height)?;
    let mut errs = Vec::with_capacity(roi.cells());
    for y in roi.y0..roi.y0 + roi.height {
        for x in roi.x0..roi.x0 + roi.width {
            let e = estimate.at(x, y);
            let t = truth.at(x, y);
            errs.push(math::hypot((e[0] - t[0]) as f64, (e[1] - t[1]) as f64));
        }
    }
    let mean = errs.iter().sum::<f64>() / errs.len() as f64;
    errs.sort_by(|a, b| a.total_cmp(b));
    let rank = math::ceil(0.95 * errs.len() as f64) as usize;
    let p95 = errs[rank.max(1) - 1];
    Ok(EndpointError { mean, p95 })
}
