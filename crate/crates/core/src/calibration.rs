//! Shear-force calibration: time-base synchronisation of a force log with a
//! displacement log, and the origin-constrained cubic map from mean marker
//! displacement (pixels) to shear force (newtons).

use alloc::vec::Vec;

use crate::math;
use crate::{Error, Result};

/// `tau(x) = c1 x + c2 x^2 + c3 x^3`, with `x` the mean displacement in
/// pixels and `tau` in newtons. There is no constant term, so `tau(0) = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct CalibrationModel {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
}

impl CalibrationModel {
    /// The published sensor calibration.
    pub const REFERENCE: CalibrationModel = CalibrationModel {
        c1: 1.966,
        c2: -0.1033,
        c3: 0.005353,
    };

    pub fn new(c1: f64, c2: f64, c3: f64) -> Self {
        Self { c1, c2, c3 }
    }

    pub fn is_finite(&self) -> bool {
        self.c1.is_finite() && self.c2.is_finite() && self.c3.is_finite()
    }

    /// Force in newtons at mean displacement `x` (pixels).
    #[inline]
    pub fn evaluate(&self, x: f64) -> f64 {
        // Horner form; tau(0) is exactly zero.
        x * (self.c1 + x * (self.c2 + x * self.c3))
    }

    /// Derivative of the map, `c1 + 2 c2 x + 3 c3 x^2`.
    pub fn slope(&self, x: f64) -> f64 {
        self.c1 + x * (2.0 * self.c2 + 3.0 * x * self.c3)
    }
}

impl Default for CalibrationModel {
    fn default() -> Self {
        Self::REFERENCE
    }
}

/// Force at displacement `x` under `model`.
pub fn evaluate(model: &CalibrationModel, x: f64) -> f64 {
    model.evaluate(x)
}

/// Time-stamped scalar samples with strictly increasing timestamps.
#[derive(Debug, Clone, PartialEq)]
pub struct TimedSeries {
    samples: Vec<(f64, f64)>,
    /// Nominal sample rate in Hz (informational).
    pub rate_hint: f64,
}

impl TimedSeries {
    pub fn new(samples: Vec<(f64, f64)>, rate_hint: f64) -> Result<Self> {
        for (i, w) in samples.windows(2).enumerate() {
            if !(w[1].0 > w[0].0) {
                return Err(Error::NonMonotonicSeries { index: i + 1 });
            }
        }
        Ok(Self { samples, rate_hint })
    }

    pub fn samples(&self) -> &[(f64, f64)] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    fn span(&self) -> Option<(f64, f64)> {
        Some((self.samples.first()?.0, self.samples.last()?.0))
    }

    /// Linear interpolation at `t`; `None` outside the sampled span.
    pub fn interpolate(&self, t: f64) -> Option<f64> {
        let (t0, t1) = self.span()?;
        if t < t0 - TIME_EPS || t > t1 + TIME_EPS {
            return None;
        }
        let s = &self.samples;
        let hi = s.partition_point(|&(ts, _)| ts < t);
        if hi == 0 {
            return Some(s[0].1);
        }
        if hi == s.len() {
            return Some(s[s.len() - 1].1);
        }
        let (ta, va) = s[hi - 1];
        let (tb, vb) = s[hi];
        let w = (t - ta) / (tb - ta);
        Some(va + w * (vb - va))
    }
}

// Timestamps written as decimal text round-trip with sub-nanosecond error.
const TIME_EPS: f64 = 1e-9;

/// One synchronised sample: displacement and force at time `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SyncedPair {
    pub t: f64,
    /// Mean displacement, pixels.
    pub x: f64,
    /// Shear force, newtons.
    pub f: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyncResult {
    /// Time-ordered pairs.
    pub pairs: Vec<SyncedPair>,
    /// Displacement samples outside the force span.
    pub dropped: usize,
}

/// Pairs every displacement sample with the force linearly interpolated at
/// its timestamp. Displacement samples outside the force log's span are
/// dropped and counted.
pub fn resample_sync(force: &TimedSeries, disp: &TimedSeries) -> Result<SyncResult> {
    let mut pairs = Vec::with_capacity(disp.len());
    let mut dropped = 0;
    for &(t, x) in disp.samples() {
        match force.interpolate(t) {
            Some(f) => pairs.push(SyncedPair { t, x, f }),
            None => dropped += 1,
        }
    }
    if pairs.is_empty() {
        return Err(Error::NoOverlap);
    }
    Ok(SyncResult { pairs, dropped })
}

/// Reduces stepped-loading data to one pair per hold step: the last pair whose
/// time falls in `[t0 + k * hold_s, t0 + (k + 1) * hold_s)`.
pub fn last_per_step(pairs: &[SyncedPair], t0: f64, hold_s: f64) -> Vec<SyncedPair> {
    assert!(hold_s > 0.0, "hold duration must be positive");
    let mut out: Vec<(i64, SyncedPair)> = Vec::new();
    for p in pairs {
        let k = math::floor((p.t - t0) / hold_s + TIME_EPS) as i64;
        match out.last_mut() {
            Some((last, slot)) if *last == k => *slot = *p,
            _ => out.push((k, *p)),
        }
    }
    out.into_iter().map(|(_, p)| p).collect()
}

/// Result of [`fit_cubic_origin`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubicFit {
    pub model: CalibrationModel,
    pub r_squared: f64,
    pub n_pairs: usize,
    /// Forces had zero variance; `r_squared` is 1 for an exact fit, else 0.
    pub degenerate_variance: bool,
}

/// Least-squares fit of `f ≈ c1 x + c2 x^2 + c3 x^3` (no intercept) via
/// Householder QR on column-scaled data.
pub fn fit_cubic_origin(pairs: &[(f64, f64)]) -> Result<CubicFit> {
    let mut xs: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    xs.sort_by(|a, b| a.total_cmp(b));
    xs.dedup();
    let distinct = xs.len();
    if distinct < 3 {
        return Err(Error::RankDeficient { distinct });
    }

    let n = pairs.len();
    // Column-major design matrix [x, x^2, x^3].
    let mut a = [
        pairs.iter().map(|p| p.0).collect::<Vec<_>>(),
        pairs.iter().map(|p| p.0 * p.0).collect::<Vec<_>>(),
        pairs.iter().map(|p| p.0 * p.0 * p.0).collect::<Vec<_>>(),
    ];
    let mut b: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let mut scale = [1.0f64; 3];
    for (j, col) in a.iter_mut().enumerate() {
        let m = col.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if m > 0.0 {
            scale[j] = m;
            col.iter_mut().for_each(|v| *v /= m);
        }
    }

    let mut r = [[0.0f64; 3]; 3];
    for k in 0..3 {
        let norm = math::sqrt(a[k][k..].iter().map(|v| v * v).sum::<f64>());
        if norm == 0.0 {
            return Err(Error::RankDeficient { distinct });
        }
        let alpha = if a[k][k] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = a[k][k..].to_vec();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        if vnorm2 > 0.0 {
            for col in a.iter_mut().skip(k) {
                let dot: f64 = v.iter().zip(&col[k..]).map(|(p, q)| p * q).sum();
                let c = 2.0 * dot / vnorm2;
                col[k..].iter_mut().zip(&v).for_each(|(x, vi)| *x -= c * vi);
            }
            let dot: f64 = v.iter().zip(&b[k..]).map(|(p, q)| p * q).sum();
            let c = 2.0 * dot / vnorm2;
            b[k..].iter_mut().zip(&v).for_each(|(x, vi)| *x -= c * vi);
        }
        for (j, col) in a.iter().enumerate().skip(k) {
            r[k][j] = col[k];
        }
    }

    let mut coef = [0.0f64; 3];
    for k in (0..3).rev() {
        let mut s = b[k];
        for j in k + 1..3 {
            s -= r[k][j] * coef[j];
        }
        if r[k][k].abs() <= f64::EPSILON * r[0][0].abs() {
            return Err(Error::RankDeficient { distinct });
        }
        coef[k] = s / r[k][k];
    }
    let model = CalibrationModel::new(coef[0] / scale[0], coef[1] / scale[1], coef[2] / scale[2]);

    let mean_f = pairs.iter().map(|p| p.1).sum::<f64>() / n as f64;
    let ss_tot: f64 = pairs.iter().map(|p| { let d = p.1 - mean_f; d * d }).sum();
    let ss_res: f64 = pairs.iter().map(|p| { let r = p.1 - model.evaluate(p.0); r * r }).sum();
    let (r_squared, degenerate_variance) = if ss_tot == 0.0 {
        (if ss_res == 0.0 { 1.0 } else { 0.0 }, true)
    } else {
        (1.0 - ss_res / ss_tot, false)
    };
    Ok(CubicFit {
        model,
        r_squared,
        n_pairs: n,
        degenerate_variance,
    })
}
