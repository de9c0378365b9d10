use alloc::vec::Vec;

use crate::imaging::{Frame, Plane, MIN_SIDE};
use crate::{Error, Result};

/// Size of the next-coarser level.
#[inline]
pub fn half(n: usize) -> usize {
    n.div_ceil(2)
}

/// Dimensions of every level, finest first.
pub fn level_dims(width: usize, height: usize, levels: usize) -> Vec<(usize, usize)> {
    let mut dims = Vec::with_capacity(levels);
    let (mut w, mut h) = (width, height);
    for _ in 0..levels {
        dims.push((w, h));
        w = half(w);
        h = half(h);
    }
    dims
}

/// Gaussian pyramid: level 0 is `frame`; level `k + 1` is level `k` filtered
/// with the 5-tap binomial kernel and decimated by two (even samples kept).
pub fn build_pyramid(frame: &Frame, levels: usize) -> Result<Vec<Plane>> {
    check_levels(frame.width(), frame.height(), levels)?;
    let mut out = Vec::with_capacity(levels);
    out.push(Plane::from_frame(frame));
    for _ in 1..levels {
        let next = downsample(out.last().unwrap());
        out.push(next);
    }
    Ok(out)
}

pub(crate) fn check_levels(width: usize, height: usize, levels: usize) -> Result<()> {
    if levels == 0 {
        return Err(Error::InvalidParams("pyramid needs at least one level"));
    }
    let &(w, h) = level_dims(width, height, levels).last().unwrap();
    if w < MIN_SIDE || h < MIN_SIDE {
        return Err(Error::TooManyLevels {
            levels,
            coarsest: (w, h),
        });
    }
    Ok(())
}

// Reflect-101 border: -1 -> 1, n -> n - 2.
#[inline]
fn reflect(i: isize, n: usize) -> usize {
    let n = n as isize;
    let j = if i < 0 { -i } else if i >= n { 2 * n - 2 - i } else { i };
    j.clamp(0, n - 1) as usize
}

/// 5-tap binomial blur without decimation.
pub fn blur(src: &Plane) -> Plane {
    const K: [f32; 5] = [1.0 / 16.0, 4.0 / 16.0, 6.0 / 16.0, 4.0 / 16.0, 1.0 / 16.0];
    let (w, h) = (src.width, src.height);
    let mut tmp = alloc::vec![0.0f32; w * h];
    for (row, out) in src.data.chunks_exact(w).zip(tmp.chunks_exact_mut(w)) {
        for (o, win) in out[2..w - 2].iter_mut().zip(row.windows(5)) {
            *o = K[0] * (win[0] + win[4]) + K[1] * (win[1] + win[3]) + K[2] * win[2];
        }
        for x in [0, 1, w - 2, w - 1] {
            let mut acc = 0.0;
            for (k, &c) in K.iter().enumerate() {
                acc += c * row[reflect(x as isize + k as isize - 2, w)];
            }
            out[x] = acc;
        }
    }
    let mut data = alloc::vec![0.0f32; w * h];
    for (y, out) in data.chunks_exact_mut(w).enumerate() {
        let r: [&[f32]; 5] = core::array::from_fn(|k| {
            let yy = reflect(y as isize + k as isize - 2, h);
            &tmp[yy * w..(yy + 1) * w]
        });
        for (x, o) in out.iter_mut().enumerate() {
            *o = K[0] * (r[0][x] + r[4][x]) + K[1] * (r[1][x] + r[3][x]) + K[2] * r[2][x];
        }
    }
    Plane { width: w, height: h, data }
}

/// One blur-and-decimate step.
pub fn downsample(src: &Plane) -> Plane {
    const K: [f32; 5] = [1.0 / 16.0, 4.0 / 16.0, 6.0 / 16.0, 4.0 / 16.0, 1.0 / 16.0];
    let (w, h) = (src.width, src.height);
    let (nw, nh) = (half(w), half(h));
    // Horizontal pass, even columns only.
    let mut tmp = alloc::vec![0.0f32; nw * h];
    for y in 0..h {
        let row = &src.data[y * w..(y + 1) * w];
        for xo in 0..nw {
            let xc = (2 * xo) as isize;
            let mut acc = 0.0;
            for (k, &c) in K.iter().enumerate() {
                acc += c * row[reflect(xc + k as isize - 2, w)];
            }
            tmp[y * nw + xo] = acc;
        }
    }
    let mut data = alloc::vec![0.0f32; nw * nh];
    for yo in 0..nh {
        let yc = (2 * yo) as isize;
        for (k, &c) in K.iter().enumerate() {
            let r = reflect(yc + k as isize - 2, h) * nw;
            for xo in 0..nw {
                data[yo * nw + xo] += c * tmp[r + xo];
            }
        }
    }
    Plane {
        width: nw,
        height: nh,
        data,
    }
}
