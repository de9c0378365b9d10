use proptest::prelude::*;
use tactile_core::flow::{build_pyramid, dis_flow, endpoint_error};
use tactile_core::imaging::generate_marker_pattern;
use tactile_core::membrane::suite::{random_suite, SuiteKind};
use tactile_core::membrane::{analytic_field, render};
use tactile_core::{DeformationSpec, Error, FlowField, FlowParams, Frame, MarkerPattern, Roi};

fn base(seed: u64, side: usize) -> Frame {
    generate_marker_pattern(&MarkerPattern::new(seed, side, side)).unwrap()
}

fn roi() -> Roi {
    Roi::centered(352, 352, 220).unwrap()
}

fn mean_over(f: &FlowField, r: &Roi) -> [f64; 2] {
    let mut s = [0.0; 2];
    for y in r.y0..r.y0 + r.height {
        for x in r.x0..r.x0 + r.width {
            let d = f.at(x, y);
            s[0] += d[0] as f64;
            s[1] += d[1] as f64;
        }
    }
    let n = r.cells() as f64;
    [s[0] / n, s[1] / n]
}

#[test]
fn pyramid_sizes_halve() {
    let levels = build_pyramid(&base(1, 352), 4).unwrap();
    let sides: Vec<_> = levels.iter().map(|p| (p.width, p.height)).collect();
    assert_eq!(sides, [(352, 352), (176, 176), (88, 88), (44, 44)]);
}

#[test]
fn constant_frame_pyramid_stays_constant() {
    for level in build_pyramid(&Frame::filled(64, 64, 200).unwrap(), 3).unwrap() {
        assert!(level.data.iter().all(|&v| (v - 200.0).abs() < 1e-3));
    }
}

#[test]
fn too_many_levels_is_an_error() {
    assert!(matches!(
        build_pyramid(&Frame::filled(64, 64, 0).unwrap(), 6),
        Err(Error::TooManyLevels { coarsest: (2, 2), .. })
    ));
}

#[test]
fn identical_frames_give_zero_flow() {
    let f = base(2, 352);
    let flow = dis_flow(&f, &f, &FlowParams::default(), None).unwrap();
    let mad = flow.data().iter().map(|d| (d[0].abs() + d[1].abs()) as f64 / 2.0).sum::<f64>() / flow.data().len() as f64;
    assert!(mad <= 1e-3, "{mad}");
}

// Integer block matching used as an independent check on the translated pair.
fn brute_force_shift(prev: &Frame, next: &Frame) -> (i64, i64) {
    let mut best = (u64::MAX, (0, 0));
    for dy in -5i64..=5 {
        for dx in -5i64..=5 {
            let mut sad = 0u64;
            for y in 100..250 {
                for x in 100..250 {
                    let a = next.get(x, y) as i64;
                    let b = prev.get((x as i64 - dx) as usize, (y as i64 - dy) as usize) as i64;
                    sad += a.abs_diff(b);
                }
            }
            if sad < best.0 {
                best = (sad, (dx, dy));
            }
        }
    }
    best.1
}

#[test]
fn integer_translation_is_recovered() {
    let prev = base(3, 352);
    let next = prev.translated(3, 0);
    assert_eq!(brute_force_shift(&prev, &next), (3, 0));
    let flow = dis_flow(&prev, &next, &FlowParams::default(), None).unwrap();
    let m = mean_over(&flow, &roi());
    assert!((m[0] - 3.0).abs() <= 0.05 && m[1].abs() <= 0.05, "{m:?}");
}

#[test]
fn indentation_pair_is_accurate() {
    let b = base(4, 352);
    let spec = DeformationSpec::indentation([175.5, 175.5], 60.0, 0.05);
    let flow = dis_flow(&b, &render(&b, &spec), &FlowParams::default(), None).unwrap();
    let e = endpoint_error(&flow, &analytic_field(&spec, 352, 352), &roi()).unwrap();
    assert!(e.mean <= 0.3, "{e:?}");
}

#[test]
fn endpoint_error_examples() {
    let truth = FlowField::from_fn(8, 8, |x, y| [x as f32 * 0.1, y as f32]);
    let all = Roi::full(8, 8);
    let e = endpoint_error(&truth, &truth, &all).unwrap();
    assert_eq!((e.mean, e.p95), (0.0, 0.0));
    let shifted = truth.map(|d| [d[0] + 1.0, d[1]]);
    let e = endpoint_error(&shifted, &truth, &all).unwrap();
    assert!((e.mean - 1.0).abs() < 1e-6 && (e.p95 - 1.0).abs() < 1e-6);
    let zero = FlowField::zeros(8, 8);
    let half = FlowField::from_fn(8, 8, |_, y| if y < 4 { [2.0, 0.0] } else { [0.0, 0.0] });
    assert_eq!(endpoint_error(&half, &zero, &all).unwrap().mean, 1.0);
    assert!(matches!(
        endpoint_error(&zero, &FlowField::zeros(8, 7), &all),
        Err(Error::DimensionMismatch { .. })
    ));
}

#[test]
fn mismatched_frames_are_rejected() {
    let r = dis_flow(&base(1, 64), &base(1, 48), &FlowParams::default(), None);
    assert!(matches!(r, Err(Error::DimensionMismatch { .. })));
}

#[test]
fn warm_start_reaches_large_shears() {
    let b = base(5, 352);
    let params = FlowParams::default();
    let mut prev = None;
    for k in 1..=12 {
        let s = 2.5 * k as f64;
        let next = render(&b, &DeformationSpec::uniform_shear([s, 0.0]));
        let flow = dis_flow(&b, &next, &params, prev.as_ref()).unwrap();
        let m = mean_over(&flow, &roi());
        assert!((m[0] - s).abs() < 0.02, "step {k}: {m:?}");
        prev = Some(flow);
    }
}

fn suite_epe(variational: bool) -> Vec<(f64, f64)> {
    let b = base(11, 352);
    let params = FlowParams {
        variational_refinement: variational,
        ..FlowParams::default()
    };
    random_suite(20, 20, 352, 352, SuiteKind::Mixed)
        .iter()
        .map(|spec| {
            let flow = dis_flow(&b, &render(&b, spec), &params, None).unwrap();
            let e = endpoint_error(&flow, &analytic_field(spec, 352, 352), &roi()).unwrap();
            (e.mean, e.p95)
        })
        .collect()
}

#[test]
fn small_displacement_suite_and_refinement() {
    let with = suite_epe(true);
    let without = suite_epe(false);
    let mean = |v: &[(f64, f64)]| v.iter().map(|e| e.0).sum::<f64>() / v.len() as f64;
    let worst_p95 = with.iter().map(|e| e.1).fold(0.0, f64::max);
    assert!(mean(&with) <= 0.3, "{}", mean(&with));
    assert!(worst_p95 <= 1.0, "{worst_p95}");
    assert!(mean(&with) <= mean(&without) + 0.05);
    for (a, b) in with.iter().zip(&without) {
        assert!(a.0 <= b.0 + 0.05, "{a:?} vs {b:?}");
    }
}

#[test]
fn flow_is_roughly_antisymmetric() {
    let b = base(6, 352);
    let spec = DeformationSpec::composite(vec![
        DeformationSpec::indentation([170.0, 180.0], 70.0, 0.04),
        DeformationSpec::uniform_shear([1.5, -1.0]),
    ]);
    let g = render(&b, &spec);
    let p = FlowParams::default();
    let fwd = dis_flow(&b, &g, &p, None).unwrap();
    let bwd = dis_flow(&g, &b, &p, None).unwrap();
    let r = roi();
    let mut sum = 0.0;
    for y in r.y0..r.y0 + r.height {
        for x in r.x0..r.x0 + r.width {
            let (a, c) = (fwd.at(x, y), bwd.at(x, y));
            sum += ((a[0] + c[0]) as f64).hypot((a[1] + c[1]) as f64);
        }
    }
    let mean = sum / r.cells() as f64;
    assert!(mean <= 0.2, "{mean}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn translating_both_frames_translates_the_flow(seed in 0u64..1000, dx in -6i64..=6, dy in -6i64..=6) {
        let b = base(seed, 352);
        let spec = DeformationSpec::composite(vec![
            DeformationSpec::indentation([176.0, 176.0], 60.0, 0.04),
            DeformationSpec::uniform_shear([1.0, 0.5]),
        ]);
        let g = render(&b, &spec);
        let p = FlowParams::default();
        let f0 = dis_flow(&b, &g, &p, None).unwrap();
        let f1 = dis_flow(&b.translated(dx, dy), &g.translated(dx, dy), &p, None).unwrap();
        let r = roi();
        let mut sum = 0.0;
        for y in r.y0..r.y0 + r.height {
            for x in r.x0..r.x0 + r.width {
                let a = f0.at(x, y);
                let c = f1.at((x as i64 + dx) as usize, (y as i64 + dy) as usize);
                sum += ((a[0] - c[0]).abs() + (a[1] - c[1]).abs()) as f64 / 2.0;
            }
        }
        let mean = sum / r.cells() as f64;
        prop_assert!(mean <= 0.05, "mean difference {}", mean);
    }

    #[test]
    fn flow_is_finite_and_sized(seed in 0u64..1000, sx in -4.0..4.0f64, sy in -4.0..4.0f64) {
        let b = base(seed, 96);
        let g = render(&b, &DeformationSpec::uniform_shear([sx, sy]));
        let flow = dis_flow(&b, &g, &FlowParams { pyramid_levels: 3, ..FlowParams::default() }, None).unwrap();
        prop_assert_eq!(flow.dims(), (96, 96));
        prop_assert!(flow.is_finite());
    }
}
