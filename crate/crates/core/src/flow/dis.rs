use alloc::vec::Vec;

use super::pyramid::{blur, build_pyramid, level_dims};
use super::{variational, FlowField, FlowParams};
use crate::imaging::{Frame, Plane};
use crate::{math, par};
use crate::{Error, Result};

// Patches whose structure tensor is this flat keep their seed.
const MIN_HESSIAN_DET: f32 = 1e-6;
// Gauss–Newton stops once the accepted step is shorter than this (pixels).
const MIN_STEP: f32 = 0.01;
const MAX_HALVINGS: usize = 4;
const PRESMOOTH_PASSES: usize = 2;

/// Estimates the dense flow from `prev` to `next`. `init`, when given, seeds
/// the coarsest level (full-resolution pixels) and must match the frame size.
pub fn dis_flow(prev: &Frame, next: &Frame, params: &FlowParams, init: Option<&FlowField>) -> Result<FlowField> {
    params.validate()?;
    if prev.dims() != next.dims() {
        return Err(Error::DimensionMismatch {
            expected: prev.dims(),
            found: next.dims(),
        });
    }
    if let Some(init) = init {
        if init.dims() != prev.dims() {
            return Err(Error::DimensionMismatch {
                expected: prev.dims(),
                found: init.dims(),
            });
        }
    }
    let (width, height) = prev.dims();
    let levels = params.pyramid_levels;
    let dims = level_dims(width, height, levels);
    let (cw, ch) = dims[levels - 1];
    if params.patch_size > cw.min(ch) {
        return Err(Error::InvalidParams("patch_size exceeds the coarsest pyramid level"));
    }
    let mut pyr0 = build_pyramid(prev, levels)?;
    let mut pyr1 = build_pyramid(next, levels)?;
    if params.presmooth {
        for _ in 0..PRESMOOTH_PASSES {
            pyr0[0] = blur(&pyr0[0]);
            pyr1[0] = blur(&pyr1[0]);
        }
    }

    let mut flow: Option<Vec<[f32; 2]>> = None;
    for level in (params.finest_level..levels).rev() {
        let (w, h) = dims[level];
        let seed = match flow.take() {
            Some(coarse) => {
                let (pw, ph) = dims[level + 1];
                upsample(&coarse, pw, ph, w, h)
            }
            None => match init {
                Some(init) => restrict(init, level, w, h),
                None => alloc::vec![[0.0; 2]; w * h],
            },
        };
        let i0 = &pyr0[level];
        let i1 = &pyr1[level];
        let mut dense = search_and_densify(i0, i1, &seed, params);
        if params.variational_refinement && params.refinement_iterations > 0 {
            variational::refine(i0, i1, &mut dense, params.refinement_iterations, &params.variational);
        }
        flow = Some(dense);
    }

    let mut data = flow.unwrap();
    let (fw, fh) = dims[params.finest_level];
    if params.finest_level > 0 {
        let mut cur = (fw, fh);
        for level in (0..params.finest_level).rev() {
            let (w, h) = dims[level];
            data = upsample(&data, cur.0, cur.1, w, h);
            cur = (w, h);
        }
    }
    apply_border_policy(&mut data, width, height, params.patch_size);
    FlowField::from_vec(width, height, data)
}

/// Patch origins along one axis: every `stride` cells, plus a final patch
/// flush with the far edge.
fn patch_origins(n: usize, size: usize, stride: usize) -> Vec<usize> {
    let mut v: Vec<usize> = (0..=n - size).step_by(stride).collect();
    if *v.last().unwrap() != n - size {
        v.push(n - size);
    }
    v
}

fn gradients(p: &Plane) -> (Vec<f32>, Vec<f32>) {
    let (w, h) = (p.width, p.height);
    let mut gx = alloc::vec![0.0f32; w * h];
    let mut gy = alloc::vec![0.0f32; w * h];
    for y in 0..h {
        let row = y * w;
        for x in 0..w {
            let (xa, xb) = (x.saturating_sub(1), (x + 1).min(w - 1));
            let (ya, yb) = (y.saturating_sub(1), (y + 1).min(h - 1));
            gx[row + x] = (p.data[row + xb] - p.data[row + xa]) / (xb - xa) as f32;
            gy[row + x] = (p.data[yb * w + x] - p.data[ya * w + x]) / (yb - ya) as f32;
        }
    }
    (gx, gy)
}

#[derive(Debug, Clone, Copy)]
struct PatchResult {
    u: [f32; 2],
    weight: f32,
}

struct PatchCtx<'a> {
    i0: &'a Plane,
    i1: &'a Plane,
    gx: &'a [f32],
    gy: &'a [f32],
    size: usize,
    max_iter: usize,
}

struct Scratch {
    t: Vec<f32>,
    gx: Vec<f32>,
    gy: Vec<f32>,
}

impl PatchCtx<'_> {
    /// SSD and steepest-descent vector `sum(grad T * r)` at translation `u`.
    fn evaluate(&self, s: &Scratch, x0: usize, y0: usize, u: [f32; 2]) -> (f32, f32, f32) {
        let n = self.size;
        let i1 = self.i1;
        let xs = x0 as f32 + u[0];
        let ys = y0 as f32 + u[1];
        let (mut ssd, mut bx, mut by) = (0.0f32, 0.0f32, 0.0f32);
        let fx0 = math::floorf(xs);
        let fy0 = math::floorf(ys);
        let inside = fx0 >= 0.0
            && fy0 >= 0.0
            && (fx0 as usize) + n < i1.width
            && (fy0 as usize) + n < i1.height;
        if inside {
            let (ix, iy) = (fx0 as usize, fy0 as usize);
            let (ax, ay) = (xs - fx0, ys - fy0);
            let w00 = (1.0 - ax) * (1.0 - ay);
            let w10 = ax * (1.0 - ay);
            let w01 = (1.0 - ax) * ay;
            let w11 = ax * ay;
            let stride = i1.width;
            for j in 0..n {
                let r0 = &i1.data[(iy + j) * stride + ix..][..n + 1];
                let r1 = &i1.data[(iy + j + 1) * stride + ix..][..n + 1];
                let k = j * n;
                let (t, gx, gy) = (&s.t[k..k + n], &s.gx[k..k + n], &s.gy[k..k + n]);
                for i in 0..n {
                    let v = w00 * r0[i] + w10 * r0[i + 1] + w01 * r1[i] + w11 * r1[i + 1];
                    let r = v - t[i];
                    ssd += r * r;
                    bx += gx[i] * r;
                    by += gy[i] * r;
                }
            }
        } else {
            for j in 0..n {
                for i in 0..n {
                    let v = i1.sample(xs + i as f32, ys + j as f32);
                    let k = j * n + i;
                    let r = v - s.t[k];
                    ssd += r * r;
                    bx += s.gx[k] * r;
                    by += s.gy[k] * r;
                }
            }
        }
        (ssd, bx, by)
    }

    fn align(&self, s: &mut Scratch, x0: usize, y0: usize, seed: [f32; 2]) -> PatchResult {
        let n = self.size;
        let w = self.i0.width;
        let (mut hxx, mut hxy, mut hyy) = (0.0f32, 0.0f32, 0.0f32);
        for j in 0..n {
            let row = (y0 + j) * w + x0;
            for i in 0..n {
                let k = j * n + i;
                let (gx, gy) = (self.gx[row + i], self.gy[row + i]);
                s.t[k] = self.i0.data[row + i];
                s.gx[k] = gx;
                s.gy[k] = gy;
                hxx += gx * gx;
                hxy += gx * gy;
                hyy += gy * gy;
            }
        }
        let det = hxx * hyy - hxy * hxy;
        let (mut ssd, mut bx, mut by) = self.evaluate(s, x0, y0, seed);
        if !(det > MIN_HESSIAN_DET) {
            return PatchResult {
                u: seed,
                weight: weight(ssd),
            };
        }
        let mut u = seed;
        for _ in 0..self.max_iter {
            let dx = (hyy * bx - hxy * by) / det;
            let dy = (hxx * by - hxy * bx) / det;
            let mut step = 1.0f32;
            let mut accepted = false;
            for _ in 0..=MAX_HALVINGS {
                let cand = [u[0] - step * dx, u[1] - step * dy];
                let (s2, bx2, by2) = self.evaluate(s, x0, y0, cand);
                if s2 < ssd {
                    u = cand;
                    ssd = s2;
                    bx = bx2;
                    by = by2;
                    accepted = true;
                    break;
                }
                step *= 0.5;
            }
            if !accepted || step * math::sqrtf(dx * dx + dy * dy) < MIN_STEP {
                break;
            }
        }
        // A patch that wandered further than its own size has locked onto
        // the wrong texture.
        let (ex, ey) = (u[0] - seed[0], u[1] - seed[1]);
        if ex * ex + ey * ey > (n * n) as f32 {
            u = seed;
            ssd = self.evaluate(s, x0, y0, seed).0;
        }
        PatchResult { u, weight: weight(ssd) }
    }
}

#[inline]
fn weight(ssd: f32) -> f32 {
    1.0 / ssd.max(1.0)
}

fn search_and_densify(i0: &Plane, i1: &Plane, seed: &[[f32; 2]], params: &FlowParams) -> Vec<[f32; 2]> {
    let (w, h) = (i0.width, i0.height);
    let n = params.patch_size;
    let xs = patch_origins(w, n, params.patch_stride);
    let ys = patch_origins(h, n, params.patch_stride);
    let (gx, gy) = gradients(i0);
    let ctx = PatchCtx {
        i0,
        i1,
        gx: &gx,
        gy: &gy,
        size: n,
        max_iter: params.max_iterations_per_patch,
    };
    let centre = (n as f32 - 1.0) / 2.0;
    let rows: Vec<Vec<PatchResult>> = par::map_collect(ys.len(), |j| {
        let mut s = Scratch {
            t: alloc::vec![0.0; n * n],
            gx: alloc::vec![0.0; n * n],
            gy: alloc::vec![0.0; n * n],
        };
        let y0 = ys[j];
        xs.iter()
            .map(|&x0| {
                let init = sample_flow(seed, w, h, x0 as f32 + centre, y0 as f32 + centre);
                ctx.align(&mut s, x0, y0, init)
            })
            .collect()
    });

    let mut dense = alloc::vec![[0.0f32; 2]; w * h];
    par::for_each_chunk(&mut dense, w, |y, out| {
        let mut acc = alloc::vec![[0.0f32; 3]; w];
        for (j, &y0) in ys.iter().enumerate() {
            if y < y0 || y >= y0 + n {
                continue;
            }
            for (i, &x0) in xs.iter().enumerate() {
                let p = rows[j][i];
                for a in &mut acc[x0..x0 + n] {
                    a[0] += p.weight * p.u[0];
                    a[1] += p.weight * p.u[1];
                    a[2] += p.weight;
                }
            }
        }
        for (o, a) in out.iter_mut().zip(&acc) {
            *o = [a[0] / a[2], a[1] / a[2]];
        }
    });
    dense
}

fn sample_flow(f: &[[f32; 2]], w: usize, h: usize, x: f32, y: f32) -> [f32; 2] {
    let x = x.clamp(0.0, (w - 1) as f32);
    let y = y.clamp(0.0, (h - 1) as f32);
    let x0 = math::floorf(x);
    let y0 = math::floorf(y);
    let (ax, ay) = (x - x0, y - y0);
    let (x0, y0) = (x0 as usize, y0 as usize);
    let x1 = (x0 + 1).min(w - 1);
    let y1 = (y0 + 1).min(h - 1);
    let mut out = [0.0; 2];
    for (c, o) in out.iter_mut().enumerate() {
        let top = f[y0 * w + x0][c] * (1.0 - ax) + f[y0 * w + x1][c] * ax;
        let bot = f[y1 * w + x0][c] * (1.0 - ax) + f[y1 * w + x1][c] * ax;
        *o = top * (1.0 - ay) + bot * ay;
    }
    out
}

/// Doubles a coarse field onto the next-finer grid. Fine pixel `x` sits at
/// coarse coordinate `x / 2` because decimation keeps even samples.
fn upsample(coarse: &[[f32; 2]], cw: usize, ch: usize, w: usize, h: usize) -> Vec<[f32; 2]> {
    let mut out = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let v = sample_flow(coarse, cw, ch, x as f32 * 0.5, y as f32 * 0.5);
            out.push([2.0 * v[0], 2.0 * v[1]]);
        }
    }
    out
}

/// Full-resolution seed field expressed on pyramid level `level`.
fn restrict(init: &FlowField, level: usize, w: usize, h: usize) -> Vec<[f32; 2]> {
    let f = (1usize << level) as f32;
    let (iw, ih) = init.dims();
    let mut out = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let v = init.at((x << level).min(iw - 1), (y << level).min(ih - 1));
            out.push([v[0] / f, v[1] / f]);
        }
    }
    out
}

/// Cells within `margin` of the border copy the nearest interior cell.
fn apply_border_policy(data: &mut [[f32; 2]], w: usize, h: usize, margin: usize) {
    if w <= 2 * margin || h <= 2 * margin {
        return;
    }
    let (lo_x, hi_x) = (margin, w - 1 - margin);
    let (lo_y, hi_y) = (margin, h - 1 - margin);
    for y in 0..h {
        let sy = y.clamp(lo_y, hi_y);
        for x in 0..w {
            let sx = x.clamp(lo_x, hi_x);
            if sx != x || sy != y {
                data[y * w + x] = data[sy * w + sx];
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::{generate_marker_pattern, MarkerPattern};

    #[test]
    fn origins_cover_the_axis() {
        assert_eq!(patch_origins(20, 8, 4), [0, 4, 8, 12]);
        assert_eq!(patch_origins(22, 8, 4), [0, 4, 8, 12, 14]);
        assert_eq!(patch_origins(8, 8, 4), [0]);
    }

    #[test]
    fn border_policy_copies_interior() {
        let mut d: Vec<[f32; 2]> = (0..100).map(|i| [i as f32, 0.0]).collect();
        apply_border_policy(&mut d, 10, 10, 2);
        assert_eq!(d[0][0], 22.0);
        assert_eq!(d[9 * 10 + 9][0], 77.0);
        assert_eq!(d[5 * 10 + 5][0], 55.0);
    }

    #[test]
    fn identical_frames_give_zero_flow() {
        let f = generate_marker_pattern(&MarkerPattern::new(2, 96, 96)).unwrap();
        let params = FlowParams {
            pyramid_levels: 3,
            ..FlowParams::default()
        };
        let flow = dis_flow(&f, &f, &params, None).unwrap();
        let mean_abs = flow
            .data()
            .iter()
            .map(|d| (d[0].abs() + d[1].abs()) as f64)
            .sum::<f64>()
            / flow.data().len() as f64;
        assert!(mean_abs <= 1e-3, "{mean_abs}");
    }

    #[test]
    fn dimension_mismatch() {
        let a = Frame::filled(64, 64, 0).unwrap();
        let b = Frame::filled(64, 48, 0).unwrap();
        let params = FlowParams {
            pyramid_levels: 2,
            ..FlowParams::default()
        };
        assert!(matches!(dis_flow(&a, &b, &params, None), Err(Error::DimensionMismatch { .. })));
        let init = FlowField::zeros(10, 10);
        assert!(matches!(
            dis_flow(&a, &a, &params, Some(&init)),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
