//! Grayscale frames and random marker patterns.
//!
//! Image coordinates have their origin at the top-left pixel, with `x`
//! increasing to the right and `y` increasing downward.

use alloc::vec::Vec;

use crate::rng::Xoshiro256;
use crate::{Error, Result};

/// Default physical scale: 10 pixels per millimetre.
pub const DEFAULT_SCALE_MM_PER_PX: f64 = 0.1;
/// Default frame side covering the 35 mm sensing area at the default scale.
pub const DEFAULT_FRAME_SIDE: usize = 352;
/// Smallest frame side usable for patch matching.
pub const MIN_SIDE: usize = 16;

/// Single-channel 8-bit image with a physical scale and a capture time.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
    /// Millimetres per pixel.
    pub scale: f64,
    /// Capture time in seconds.
    pub timestamp: f64,
}

impl Frame {
    /// Wraps a row-major pixel buffer. Fails if the buffer length does not
    /// match the dimensions or a dimension is zero.
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::DimensionTooSmall { width, height });
        }
        if pixels.len() != width * height {
            return Err(Error::DimensionMismatch {
                expected: (width, height),
                found: (pixels.len(), 1),
            });
        }
        Ok(Self {
            width,
            height,
            pixels,
            scale: DEFAULT_SCALE_MM_PER_PX,
            timestamp: 0.0,
        })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self> {
        Self::new(width, height, alloc::vec![value; width * height])
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        assert!(scale > 0.0 && scale.is_finite(), "scale must be positive");
        self.scale = scale;
        self
    }

    pub fn with_timestamp(mut self, timestamp: f64) -> Self {
        self.timestamp = timestamp;
        self
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

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.pixels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    /// Content shifted by an integer offset: `out(x, y) = self(x - dx, y - dy)`,
    /// with out-of-range samples clamped to the nearest edge pixel.
    pub fn translated(&self, dx: i64, dy: i64) -> Frame {
        let (w, h) = (self.width as i64, self.height as i64);
        let mut pixels = Vec::with_capacity(self.pixels.len());
        for y in 0..h {
            let sy = (y - dy).clamp(0, h - 1) as usize;
            for x in 0..w {
                let sx = (x - dx).clamp(0, w - 1) as usize;
                pixels.push(self.pixels[sy * self.width + sx]);
            }
        }
        Frame {
            width: self.width,
            height: self.height,
            pixels,
            scale: self.scale,
            timestamp: self.timestamp,
        }
    }
}

/// Parameters of a dense random pixel marker layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MarkerPattern {
    pub seed: u64,
    pub width: usize,
    pub height: usize,
    pub intensity_min: u8,
    pub intensity_max: u8,
}

impl MarkerPattern {
    /// Full-range pattern of the given size.
    pub fn new(seed: u64, width: usize, height: usize) -> Self {
        Self {
            seed,
            width,
            height,
            intensity_min: 0,
            intensity_max: 255,
        }
    }
}

/// Draws every pixel independently and uniformly from
/// `[intensity_min, intensity_max]` using xoshiro256** seeded by `spec.seed`.
/// Pixels are generated in row-major order, one draw per pixel.
pub fn generate_marker_pattern(spec: &MarkerPattern) -> Result<Frame> {
    if spec.width < MIN_SIDE || spec.height < MIN_SIDE {
        return Err(Error::DimensionTooSmall {
            width: spec.width,
            height: spec.height,
        });
    }
    if spec.intensity_min >= spec.intensity_max {
        return Err(Error::InvalidParams("intensity_min must be below intensity_max"));
    }
    let mut rng = Xoshiro256::seed_from_u64(spec.seed);
    let (lo, hi) = (spec.intensity_min as u64, spec.intensity_max as u64);
    let pixels = (0..spec.width * spec.height)
        .map(|_| rng.range_inclusive(lo, hi) as u8)
        .collect();
    Frame::new(spec.width, spec.height, pixels)
}

/// Real-valued single-channel image used inside the flow engine.
#[derive(Debug, Clone, PartialEq)]
pub struct Plane {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f32>,
}

impl Plane {
    pub fn zeros(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            data: alloc::vec![0.0; width * height],
        }
    }

    pub fn from_frame(frame: &Frame) -> Self {
        Self {
            width: frame.width,
            height: frame.height,
            data: frame.pixels.iter().map(|&p| p as f32).collect(),
        }
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize) -> f32 {
        self.data[y * self.width + x]
    }

    /// Bilinear sample with coordinates clamped to the image.
    #[inline]
    pub fn sample(&self, x: f32, y: f32) -> f32 {
        let maxx = (self.width - 1) as f32;
        let maxy = (self.height - 1) as f32;
        let x = x.clamp(0.0, maxx);
        let y = y.clamp(0.0, maxy);
        let x0 = crate::math::floorf(x);
        let y0 = crate::math::floorf(y);
        let fx = x - x0;
        let fy = y - y0;
        let x0 = x0 as usize;
        let y0 = y0 as usize;
        let x1 = (x0 + 1).min(self.width - 1);
        let y1 = (y0 + 1).min(self.height - 1);
        let r0 = y0 * self.width;
        let r1 = y1 * self.width;
        let top = self.data[r0 + x0] + fx * (self.data[r0 + x1] - self.data[r0 + x0]);
        let bot = self.data[r1 + x0] + fx * (self.data[r1 + x1] - self.data[r1 + x0]);
        top + fy * (bot - top)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_is_byte_identical() {
        let spec = MarkerPattern::new(42, 64, 64);
        let a = generate_marker_pattern(&spec).unwrap();
        let b = generate_marker_pattern(&spec).unwrap();
        assert_eq!(a.pixels(), b.pixels());
    }

    #[test]
    fn neighbouring_seeds_differ_almost_everywhere() {
        let a = generate_marker_pattern(&MarkerPattern::new(42, 64, 64)).unwrap();
        let b = generate_marker_pattern(&MarkerPattern::new(43, 64, 64)).unwrap();
        let differing = a
            .pixels()
            .iter()
            .zip(b.pixels())
            .filter(|(x, y)| x != y)
            .count();
        assert!(differing as f64 >= 0.9 * 4096.0, "{differing}");
    }

    #[test]
    fn sample_mean_within_three_sigma() {
        // Uniform bytes: mean 127.5, variance (256^2 - 1) / 12; sigma of the
        // mean over 320*320 samples is about 0.231.
        let f = generate_marker_pattern(&MarkerPattern::new(7, 320, 320)).unwrap();
        let mean = f.pixels().iter().map(|&p| p as f64).sum::<f64>() / (320.0 * 320.0);
        assert!((122.0..=133.0).contains(&mean), "{mean}");
    }

    #[test]
    fn histogram_chi_square_below_critical_value() {
        let f = generate_marker_pattern(&MarkerPattern::new(7, 320, 320)).unwrap();
        let mut bins = [0u64; 16];
        for &p in f.pixels() {
            bins[(p / 16) as usize] += 1;
        }
        let expected = (320.0 * 320.0) / 16.0;
        let chi2: f64 = bins
            .iter()
            .map(|&c| (c as f64 - expected).powi(2) / expected)
            .sum();
        assert!(chi2 < 37.7, "chi2 = {chi2}");
    }

    #[test]
    fn respects_intensity_bounds() {
        let spec = MarkerPattern {
            seed: 5,
            width: 32,
            height: 32,
            intensity_min: 40,
            intensity_max: 60,
        };
        let f = generate_marker_pattern(&spec).unwrap();
        assert!(f.pixels().iter().all(|&p| (40..=60).contains(&p)));
        assert!(f.pixels().contains(&40) && f.pixels().contains(&60));
    }

    #[test]
    fn rejects_small_or_inverted_specs() {
        assert!(matches!(
            generate_marker_pattern(&MarkerPattern::new(1, 15, 64)),
            Err(Error::DimensionTooSmall { .. })
        ));
        let mut spec = MarkerPattern::new(1, 16, 16);
        spec.intensity_min = 9;
        spec.intensity_max = 9;
        assert!(generate_marker_pattern(&spec).is_err());
    }

    #[test]
    fn translated_moves_content() {
        let f = generate_marker_pattern(&MarkerPattern::new(1, 32, 32)).unwrap();
        let g = f.translated(3, -2);
        assert_eq!(g.get(10, 10), f.get(7, 12));
    }

    #[test]
    fn bilinear_sample_midpoint() {
        let p = Plane {
            width: 2,
            height: 2,
            data: alloc::vec![0.0, 10.0, 20.0, 30.0],
        };
        assert_eq!(p.sample(0.5, 0.5), 15.0);
        assert_eq!(p.sample(-3.0, 9.0), 20.0);
    }
}
