//! Variational refinement of a dense flow field.
//!
//! Minimises a robust (Charbonnier) energy with brightness-constancy,
//! gradient-constancy and total-variation smoothness terms. The energy is
//! linearised around the current flow; each fixed-point iteration
//! re-evaluates the robust weights and solves for the flow increment with
//! red-black SOR.

use alloc::vec::Vec;

use crate::imaging::Plane;
use crate::{math, par};

/// Term weights and solver settings. Intensities are scaled to `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct VariationalParams {
    /// Smoothness weight.
    pub alpha: f32,
    /// Brightness-constancy weight.
    pub delta: f32,
    /// Gradient-constancy weight.
    pub gamma: f32,
    pub sor_iterations: usize,
    pub omega: f32,
}

impl Default for VariationalParams {
    fn default() -> Self {
        Self {
            alpha: 20.0,
            delta: 5.0,
            gamma: 10.0,
            sor_iterations: 5,
            omega: 1.6,
        }
    }
}

const EPS_SQ: f32 = 1e-6;

#[inline]
fn psi_prime(s2: f32) -> f32 {
    0.5 / math::sqrtf(s2 + EPS_SQ)
}

// Central differences, one-sided at the borders.
fn gradient(data: &[f32], w: usize, h: usize) -> (Vec<f32>, Vec<f32>) {
    let mut gx = alloc::vec![0.0f32; w * h];
    let mut gy = alloc::vec![0.0f32; w * h];
    for y in 0..h {
        let row = &data[y * w..(y + 1) * w];
        let out = &mut gx[y * w..(y + 1) * w];
        out[0] = row[1] - row[0];
        for x in 1..w - 1 {
            out[x] = 0.5 * (row[x + 1] - row[x - 1]);
        }
        out[w - 1] = row[w - 1] - row[w - 2];

        let (ya, yb, f) = match y {
            0 => (0, 1, 1.0),
            _ if y == h - 1 => (h - 2, h - 1, 1.0),
            _ => (y - 1, y + 1, 0.5),
        };
        let (a, b) = (&data[ya * w..(ya + 1) * w], &data[yb * w..(yb + 1) * w]);
        for ((o, &p), &q) in gy[y * w..(y + 1) * w].iter_mut().zip(a).zip(b) {
            *o = f * (q - p);
        }
    }
    (gx, gy)
}

// Image terms of the linearised energy, one array per term: spatial
// derivatives of the averaged frames and temporal differences against the
// warped frame.
struct Derivs {
    ix: Vec<f32>,
    iy: Vec<f32>,
    iz: Vec<f32>,
    ixx: Vec<f32>,
    ixy: Vec<f32>,
    iyy: Vec<f32>,
    ixz: Vec<f32>,
    iyz: Vec<f32>,
}

fn derivatives(i0: &Plane, i1: &Plane, fu: &[f32], fv: &[f32]) -> Derivs {
    let (w, h) = (i0.width, i0.height);
    let scale = 1.0 / 255.0;
    let i1w: Vec<f32> = (0..w * h)
        .map(|k| i1.sample((k % w) as f32 + fu[k], (k / w) as f32 + fv[k]) * scale)
        .collect();
    let i0n: Vec<f32> = i0.data.iter().map(|v| v * scale).collect();
    let (ix0, iy0) = gradient(&i0n, w, h);
    let (ix1, iy1) = gradient(&i1w, w, h);
    let ix: Vec<f32> = ix0.iter().zip(&ix1).map(|(a, b)| 0.5 * (a + b)).collect();
    let iy: Vec<f32> = iy0.iter().zip(&iy1).map(|(a, b)| 0.5 * (a + b)).collect();
    let (ixx, ixy_a) = gradient(&ix, w, h);
    let (iyx, iyy) = gradient(&iy, w, h);
    Derivs {
        iz: i1w.iter().zip(&i0n).map(|(a, b)| a - b).collect(),
        ixy: ixy_a.iter().zip(&iyx).map(|(a, b)| 0.5 * (a + b)).collect(),
        ixz: ix1.iter().zip(&ix0).map(|(a, b)| a - b).collect(),
        iyz: iy1.iter().zip(&iy0).map(|(a, b)| a - b).collect(),
        ix,
        iy,
        ixx,
        iyy,
    }
}

// Smoothness link weights to the left, right, upper and lower neighbours.
// Links leaving the grid have zero weight.
struct Links {
    l: Vec<f32>,
    r: Vec<f32>,
    u: Vec<f32>,
    d: Vec<f32>,
}

impl Links {
    fn zeros(n: usize) -> Self {
        Self {
            l: alloc::vec![0.0; n],
            r: alloc::vec![0.0; n],
            u: alloc::vec![0.0; n],
            d: alloc::vec![0.0; n],
        }
    }

    // Robust weights from forward differences of the total flow; the weight
    // of cell k couples it to its right and lower neighbours.
    fn update(&mut self, tu: &[f32], tv: &[f32], w: usize, h: usize, alpha: f32) {
        let mut g2 = alloc::vec![0.0f32; w];
        for y in 0..h {
            let row = y * w;
            let (u0, v0) = (&tu[row..row + w], &tv[row..row + w]);
            g2.fill(0.0);
            for (g, ((a, b), (c, d))) in g2.iter_mut().zip(u0.iter().zip(&u0[1..]).zip(v0.iter().zip(&v0[1..]))) {
                *g += (b - a) * (b - a) + (d - c) * (d - c);
            }
            if y + 1 < h {
                let (u1, v1) = (&tu[row + w..row + 2 * w], &tv[row + w..row + 2 * w]);
                for (g, ((a, b), (c, d))) in g2.iter_mut().zip(u0.iter().zip(u1).zip(v0.iter().zip(v1))) {
                    *g += (b - a) * (b - a) + (d - c) * (d - c);
                }
            }
            let sr = &mut self.r[row..row + w];
            for (o, g) in sr.iter_mut().zip(&g2) {
                *o = alpha * psi_prime(*g);
            }
        }
        // Every link weight is the forward weight of the cell on its
        // upper-left end.
        for y in 0..h {
            let row = y * w;
            let s = &self.r[row..row + w];
            let dl = &mut self.l[row..row + w];
            dl[0] = 0.0;
            dl[1..].copy_from_slice(&s[..w - 1]);
            let dd = &mut self.d[row..row + w];
            if y + 1 < h {
                dd.copy_from_slice(s);
            } else {
                dd.fill(0.0);
            }
        }
        self.u[..w].fill(0.0);
        self.u[w..].copy_from_slice(&self.d[..(h - 1) * w]);
        for y in 0..h {
            self.r[y * w + w - 1] = 0.0;
        }
    }
}

// Adds the link-weighted sum of the neighbours of every cell in one row.
#[allow(clippy::too_many_arguments)]
#[inline]
fn neighbour_sum(acc: &mut [f32], here: &[f32], up: &[f32], down: &[f32], l: &[f32], r: &[f32], u: &[f32], d: &[f32]) {
    let n = acc.len();
    let (u, up, d, down) = (&u[..n], &up[..n], &d[..n], &down[..n]);
    for i in 0..n {
        acc[i] += u[i] * up[i] + d[i] * down[i];
    }
    let (a, wl, v) = (&mut acc[1..], &l[1..n], &here[..n - 1]);
    for i in 0..n - 1 {
        a[i] += wl[i] * v[i];
    }
    let (a, wr, v) = (&mut acc[..n - 1], &r[..n - 1], &here[1..n]);
    for i in 0..n - 1 {
        a[i] += wr[i] * v[i];
    }
}

// Per-cell system for one fixed-point iteration: the linearised data term
// plus the smoothness links, with the contribution of the base flow folded
// into the right-hand side. The diagonal is stored inverted.
struct System {
    inv11: Vec<f32>,
    inv22: Vec<f32>,
    a12: Vec<f32>,
    b1: Vec<f32>,
    b2: Vec<f32>,
}

impl System {
    fn zeros(n: usize) -> Self {
        Self {
            inv11: alloc::vec![0.0; n],
            inv22: alloc::vec![0.0; n],
            a12: alloc::vec![0.0; n],
            b1: alloc::vec![0.0; n],
            b2: alloc::vec![0.0; n],
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn update(&mut self, g: &Derivs, du: &[f32], dv: &[f32], fu: &[f32], fv: &[f32], links: &Links, w: usize, h: usize, p: &VariationalParams) {
        for y in 0..h {
            let row = y * w;
            let rr = row..row + w;
            let up = y.saturating_sub(1) * w;
            let down = (y + 1).min(h - 1) * w;
            let (l, r, u, d) = (&links.l[rr.clone()], &links.r[rr.clone()], &links.u[rr.clone()], &links.d[rr.clone()]);
            // Base-flow smoothness pull, staged in b1/b2.
            let b1 = &mut self.b1[rr.clone()];
            b1.fill(0.0);
            neighbour_sum(b1, &fu[rr.clone()], &fu[up..up + w], &fu[down..down + w], l, r, u, d);
            let b2 = &mut self.b2[rr.clone()];
            b2.fill(0.0);
            neighbour_sum(b2, &fv[rr.clone()], &fv[up..up + w], &fv[down..down + w], l, r, u, d);
            for x in 0..w {
                let k = row + x;
                let (ix, iy, iz) = (g.ix[k], g.iy[k], g.iz[k]);
                let (ixx, ixy, iyy, ixz, iyz) = (g.ixx[k], g.ixy[k], g.iyy[k], g.ixz[k], g.iyz[k]);
                let (a, b) = (du[k], dv[k]);
                let rd = iz + ix * a + iy * b;
                let rx = ixz + ixx * a + ixy * b;
                let ry = iyz + ixy * a + iyy * b;
                let pd = p.delta * psi_prime(rd * rd);
                let pg = p.gamma * psi_prime(rx * rx + ry * ry);
                let sum_w = l[x] + r[x] + u[x] + d[x];
                self.inv11[k] = 1.0 / (pd * ix * ix + pg * (ixx * ixx + ixy * ixy) + sum_w);
                self.inv22[k] = 1.0 / (pd * iy * iy + pg * (ixy * ixy + iyy * iyy) + sum_w);
                self.a12[k] = pd * ix * iy + pg * (ixx * ixy + ixy * iyy);
                self.b1[k] += -pd * ix * iz - pg * (ixx * ixz + ixy * iyz) - sum_w * fu[k];
                self.b2[k] += -pd * iy * iz - pg * (ixy * ixz + iyy * iyz) - sum_w * fv[k];
            }
        }
    }
}

// One red-black SOR half-sweep. `d` and `next` hold each row as its u
// values followed by its v values. Every cell of a row is evaluated and the
// relaxation factor is zero on cells of the other colour, which leaves them
// unchanged.
#[allow(clippy::too_many_arguments)]
fn sweep(sys: &System, links: &Links, d: &[f32], next: &mut [f32], w: usize, h: usize, omega: [&[f32]; 2]) {
    par::for_each_chunk(next, 2 * w, |y, out| {
        let row = y * w;
        let rr = row..row + w;
        let at = |yy: usize| &d[2 * yy * w..2 * (yy + 1) * w];
        let (here, up, down) = (at(y), at(y.saturating_sub(1)), at((y + 1).min(h - 1)));
        let (l, r, u, dn) = (&links.l[rr.clone()], &links.r[rr.clone()], &links.u[rr.clone()], &links.d[rr.clone()]);
        let (ou, ov) = out.split_at_mut(w);
        ou.copy_from_slice(&sys.b1[rr.clone()]);
        ov.copy_from_slice(&sys.b2[rr.clone()]);
        neighbour_sum(ou, &here[..w], &up[..w], &down[..w], l, r, u, dn);
        neighbour_sum(ov, &here[w..], &up[w..], &down[w..], l, r, u, dn);
        let om = omega[y % 2];
        let (hu, hv) = here.split_at(w);
        let (a12, i11, i22) = (&sys.a12[rr.clone()], &sys.inv11[rr.clone()], &sys.inv22[rr]);
        let cells = ou.iter_mut().zip(ov.iter_mut()).zip(hu.iter().zip(hv)).zip(om.iter().zip(a12)).zip(i11.iter().zip(i22));
        for ((((su, sv), (&u0, &v0)), (&o, &c)), (&i1, &i2)) in cells {
            let a = u0 + o * ((*su - c * v0) * i1 - u0);
            let b = v0 + o * ((*sv - c * a) * i2 - v0);
            *su = a;
            *sv = b;
        }
    });
}

pub(super) fn refine(i0: &Plane, i1: &Plane, flow: &mut [[f32; 2]], iterations: usize, p: &VariationalParams) {
    let (w, h) = (i0.width, i0.height);
    let n = w * h;
    let fu: Vec<f32> = flow.iter().map(|f| f[0]).collect();
    let fv: Vec<f32> = flow.iter().map(|f| f[1]).collect();
    let der = derivatives(i0, i1, &fu, &fv);
    let mut d = alloc::vec![0.0f32; 2 * n];
    let mut next = d.clone();
    let (mut du, mut dv) = (alloc::vec![0.0f32; n], alloc::vec![0.0f32; n]);
    let (mut tu, mut tv) = (fu.clone(), fv.clone());
    let mut links = Links::zeros(n);
    let mut sys = System::zeros(n);
    // Relaxation factor along a row: nonzero on even or on odd columns.
    let even: Vec<f32> = (0..w).map(|x| if x % 2 == 0 { p.omega } else { 0.0 }).collect();
    let odd: Vec<f32> = (0..w).map(|x| if x % 2 == 1 { p.omega } else { 0.0 }).collect();
    let omegas: [[&[f32]; 2]; 2] = [[&even, &odd], [&odd, &even]];

    for _ in 0..iterations {
        for y in 0..h {
            du[y * w..(y + 1) * w].copy_from_slice(&d[2 * y * w..(2 * y + 1) * w]);
            dv[y * w..(y + 1) * w].copy_from_slice(&d[(2 * y + 1) * w..(2 * y + 2) * w]);
        }
        for k in 0..n {
            tu[k] = fu[k] + du[k];
            tv[k] = fv[k] + dv[k];
        }
        links.update(&tu, &tv, w, h, p.alpha);
        sys.update(&der, &du, &dv, &fu, &fv, &links, w, h, p);
        for _ in 0..p.sor_iterations {
            for &omega in &omegas {
                sweep(&sys, &links, &d, &mut next, w, h, omega);
                core::mem::swap(&mut d, &mut next);
            }
        }
    }
    for (k, f) in flow.iter_mut().enumerate() {
        let (y, x) = (k / w, k % w);
        f[0] += d[2 * y * w + x];
        f[1] += d[(2 * y + 1) * w + x];
    }
}
