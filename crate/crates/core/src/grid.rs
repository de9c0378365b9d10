//! Rectangular regions and per-cell grids shared by the simulator and the
//! estimator.

use alloc::vec::Vec;

use crate::{Error, Result};

/// Default ROI side: the central 22 mm at 10 px/mm.
pub const DEFAULT_ROI_SIDE: usize = 220;

/// Axis-aligned rectangle of cells, `[x0, x0 + width) × [y0, y0 + height)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Roi {
    pub x0: usize,
    pub y0: usize,
    pub width: usize,
    pub height: usize,
}

impl Roi {
    pub fn full(width: usize, height: usize) -> Self {
        Self { x0: 0, y0: 0, width, height }
    }

    /// Square of side `side` centred in a `width × height` grid.
    pub fn centered(width: usize, height: usize, side: usize) -> Result<Self> {
        if side > width || side > height {
            return Err(Error::RoiOutOfBounds);
        }
        Ok(Self {
            x0: (width - side) / 2,
            y0: (height - side) / 2,
            width: side,
            height: side,
        })
    }

    pub fn cells(&self) -> usize {
        self.width * self.height
    }

    pub fn fits(&self, width: usize, height: usize) -> bool {
        self.x0 + self.width <= width && self.y0 + self.height <= height
    }

    pub fn check(&self, width: usize, height: usize) -> Result<()> {
        if !self.fits(width, height) {
            return Err(Error::RoiOutOfBounds);
        }
        if self.cells() == 0 {
            return Err(Error::EmptyRoi);
        }
        Ok(())
    }
}

/// Boolean grid, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    pub width: usize,
    pub height: usize,
    pub data: Vec<bool>,
}

impl Mask {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            data: alloc::vec![false; width * height],
        }
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    pub fn fraction(&self) -> f64 {
        if self.data.is_empty() {
            0.0
        } else {
            self.count() as f64 / self.data.len() as f64
        }
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.data[y * self.width + x]
    }
}

/// Real-valued grid, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarGrid {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f32>,
}

impl ScalarGrid {
    pub fn zeros(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            data: alloc::vec![0.0; width * height],
        }
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize) -> f32 {
        self.data[y * self.width + x]
    }

    pub fn crop(&self, roi: &Roi) -> ScalarGrid {
        let mut data = Vec::with_capacity(roi.cells());
        for y in roi.y0..roi.y0 + roi.height {
            let row = y * self.width;
            data.extend_from_slice(&self.data[row + roi.x0..row + roi.x0 + roi.width]);
        }
        ScalarGrid {
            width: roi.width,
            height: roi.height,
            data,
        }
    }
}
