//! In-memory throughput benchmark for flow plus contact estimation.

use std::time::Instant;

use serde::Serialize;
use tactile_core::contact::estimate;
use tactile_core::flow::dis_flow;
use tactile_core::imaging::generate_marker_pattern;
use tactile_core::membrane::render;
use tactile_core::membrane::suite::{random_suite, SuiteKind};
use tactile_core::{CalibrationModel, EstimatorParams, FlowParams, MarkerPattern};

use crate::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct BenchOptions {
    pub width: usize,
    pub height: usize,
    pub frames: usize,
    pub seed: u64,
    pub flow: FlowParams,
    pub estimator: EstimatorParams,
    pub calibration: CalibrationModel,
}

impl Default for BenchOptions {
    fn default() -> Self {
        Self {
            width: 352,
            height: 352,
            frames: 100,
            seed: 0,
            flow: FlowParams::default(),
            estimator: EstimatorParams::default(),
            calibration: CalibrationModel::REFERENCE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageMs {
    pub flow: Option<f64>,
    pub estimate: Option<f64>,
}

/// Statistics are `None` when no frames were processed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    pub width: usize,
    pub height: usize,
    pub frames: usize,
    pub threads: usize,
    pub mean_fps: Option<f64>,
    pub min_fps: Option<f64>,
    pub mean_frame_ms: Option<f64>,
    pub max_frame_ms: Option<f64>,
    pub stage_ms: StageMs,
}

/// Renders a seeded mixed indentation/tilt sequence, then times `dis_flow`
/// and `estimate` for every frame against the reference. Rendering is not timed.
/// The pyramid depth and estimator ROI are reduced to fit small frames.
pub fn run_bench(opts: &BenchOptions) -> Result<BenchReport> {
    let (w, h) = (opts.width, opts.height);
    let reference = generate_marker_pattern(&MarkerPattern::new(opts.seed, w, h))?;
    let frames: Vec<_> = random_suite(opts.seed, opts.frames, w, h, SuiteKind::Mixed)
        .iter()
        .map(|spec| render(&reference, spec))
        .collect();
    let flow_params = opts.flow.fit_to(w, h);
    let estimator = EstimatorParams {
        roi_side: opts.estimator.roi_side.min(w).min(h),
        ..opts.estimator
    };

    let (mut flow_s, mut est_s, mut max_s) = (0.0f64, 0.0f64, 0.0f64);
    for (i, frame) in frames.iter().enumerate() {
        let t0 = Instant::now();
        let flow = dis_flow(&reference, frame, &flow_params, None)?;
        let t1 = Instant::now();
        estimate(&flow, &estimator, &opts.calibration, i as f64)?;
        let t2 = Instant::now();
        let (f, e) = ((t1 - t0).as_secs_f64(), (t2 - t1).as_secs_f64());
        flow_s += f;
        est_s += e;
        max_s = max_s.max(f + e);
    }

    let n = opts.frames as f64;
    let some = |v: f64| (opts.frames > 0).then_some(v);
    Ok(BenchReport {
        width: w,
        height: h,
        frames: opts.frames,
        threads: rayon::current_num_threads(),
        mean_fps: some(n / (flow_s + est_s)),
        min_fps: some(1.0 / max_s),
        mean_frame_ms: some(1e3 * (flow_s + est_s) / n),
        max_frame_ms: some(1e3 * max_s),
        stage_ms: StageMs {
            flow: some(1e3 * flow_s / n),
            estimate: some(1e3 * est_s / n),
        },
    })
}
