use proptest::prelude::*;
use tactile_core::calibration::{evaluate, fit_cubic_origin, last_per_step, resample_sync, TimedSeries};
use tactile_core::imaging::generate_marker_pattern;
use tactile_core::membrane::{simulate_sequence, stepped_shear_schedule, SimOptions};
use tactile_core::rng::Xoshiro256;
use tactile_core::{CalibrationModel, Error, MarkerPattern};

const MODEL: CalibrationModel = CalibrationModel::REFERENCE;

fn tau(x: f64) -> f64 {
    1.966 * x - 0.1033 * x * x + 0.005353 * x * x * x
}

fn series(ts: impl Iterator<Item = f64>, f: impl Fn(f64) -> f64, hz: f64) -> TimedSeries {
    TimedSeries::new(ts.map(|t| (t, f(t))).collect(), hz).unwrap()
}

#[test]
fn evaluate_examples() {
    assert_eq!(evaluate(&MODEL, 0.0), 0.0);
    assert!((evaluate(&MODEL, 1.0) - 1.868053).abs() < 1e-12);
    assert!((evaluate(&MODEL, 10.0) - 14.683).abs() < 1e-12);
    for x in [0.1, 0.5, 1.0, 2.0, 5.0, 10.0] {
        assert!(((evaluate(&MODEL, x) - tau(x)) / tau(x)).abs() < 1e-12);
    }
}

#[test]
fn resampling_a_linear_signal_is_exact() {
    let force = series((0..=250).map(|i| i as f64 * 0.008), |t| t, 125.0);
    let disp = series((0..=50).map(|i| i as f64 * 0.04), |t| 3.0 * t, 25.0);
    let out = resample_sync(&force, &disp).unwrap();
    assert_eq!(out.pairs.len(), 51);
    assert_eq!(out.dropped, 0);
    for p in &out.pairs {
        assert!((p.f - p.t).abs() < 1e-12);
    }
    assert!(out.pairs.windows(2).all(|w| w[1].t > w[0].t));
}

#[test]
fn disjoint_series_do_not_overlap() {
    let force = series((0..10).map(|i| i as f64), |t| t, 1.0);
    let disp = series((20..30).map(|i| i as f64), |t| t, 1.0);
    assert!(matches!(resample_sync(&force, &disp), Err(Error::NoOverlap)));
}

#[test]
fn samples_outside_the_force_span_are_counted() {
    let force = series((0..=10).map(|i| i as f64), |t| t, 1.0);
    let disp = series((0..=14).map(|i| i as f64), |t| t, 1.0);
    let out = resample_sync(&force, &disp).unwrap();
    assert_eq!((out.pairs.len(), out.dropped), (11, 4));
}

#[test]
fn sixteen_step_run_gives_stepped_pairs() {
    let base = generate_marker_pattern(&MarkerPattern::new(1, 352, 352)).unwrap();
    let schedule = stepped_shear_schedule(16, 2.5, [1.0, 0.0], 1.0, 1.0);
    let sims = simulate_sequence(&base, &schedule, &MODEL, &SimOptions::default()).unwrap();
    let disp = TimedSeries::new(sims.iter().map(|s| (s.frame.timestamp, s.truth.mean_displacement[0])).collect(), 1.0).unwrap();
    // Force log at 125 Hz holding each step's truth force.
    let force = series((0..=16 * 125).map(|i| 1.0 + i as f64 / 125.0), |t| tau(2.5 * (t.floor().clamp(1.0, 16.0))), 125.0);
    let pairs = resample_sync(&force, &disp).unwrap().pairs;
    assert_eq!(pairs.len(), 16);
    for (k, p) in pairs.iter().enumerate() {
        assert!((p.x - 2.5 * (k + 1) as f64).abs() < 1e-9);
        assert!((p.f - sims[k].truth.shear_force[0]).abs() < 1e-9);
    }
}

#[test]
fn last_pair_of_each_hold_is_kept() {
    let force = series((0..=400).map(|i| i as f64 * 0.01), |t| t.floor() + t.fract() * 0.1, 100.0);
    let disp = series((0..=100).map(|i| i as f64 * 0.04), |t| t.floor(), 25.0);
    let pairs = resample_sync(&force, &disp).unwrap().pairs;
    let kept = last_per_step(&pairs, 0.0, 1.0);
    assert_eq!(kept.len(), 5);
    assert!((kept[0].t - 0.96).abs() < 1e-9);
    assert!((kept[1].x - 1.0).abs() < 1e-12);
}

#[test]
fn noiseless_fit_recovers_the_model() {
    let pairs: Vec<_> = (1..=16).map(|k| 0.5 * k as f64).map(|x| (x, tau(x))).collect();
    let fit = fit_cubic_origin(&pairs).unwrap();
    assert!((fit.model.c1 - 1.966).abs() < 1e-9);
    assert!((fit.model.c2 + 0.1033).abs() < 1e-9);
    assert!((fit.model.c3 - 0.005353).abs() < 1e-9);
    assert_eq!(fit.r_squared, 1.0);
    assert_eq!(fit.n_pairs, 16);
}

#[test]
fn zero_forces_fit_to_zero() {
    let fit = fit_cubic_origin(&[(1.0, 0.0), (2.0, 0.0), (3.0, 0.0), (4.0, 0.0)]).unwrap();
    assert_eq!((fit.model.c1, fit.model.c2, fit.model.c3), (0.0, 0.0, 0.0));
    assert!(fit.degenerate_variance);
    assert_eq!(fit.r_squared, 1.0);
}

#[test]
fn fewer_than_three_distinct_points_is_rank_deficient() {
    assert!(matches!(
        fit_cubic_origin(&[(1.0, 1.0), (2.0, 2.0), (2.0, 2.1)]),
        Err(Error::RankDeficient { distinct: 2 })
    ));
    assert!(fit_cubic_origin(&[(1.0, 1.0), (2.0, 2.0)]).is_err());
}

#[test]
fn noisy_sixteen_step_fits_stay_above_r2_099() {
    let mut r2: Vec<f64> = (0..100)
        .map(|seed| {
            let mut rng = Xoshiro256::seed_from_u64(seed);
            let pairs: Vec<_> = (1..=16).map(|k| 2.5 * k as f64).map(|x| (x, tau(x) + 0.05 * rng.normal())).collect();
            fit_cubic_origin(&pairs).unwrap().r_squared
        })
        .collect();
    r2.sort_by(f64::total_cmp);
    assert!(r2[1] >= 0.99, "{:?}", &r2[..3]);
}

fn model() -> impl Strategy<Value = CalibrationModel> {
    (0.5..3.0f64, -0.2..0.0f64, 0.0..0.01f64).prop_map(|(a, b, c)| CalibrationModel::new(a, b, c))
}

proptest! {
    #[test]
    fn round_trip_recovers_coefficients(m in model(), n in 4usize..40) {
        let pairs: Vec<_> = (1..=n).map(|k| 10.0 * k as f64 / n as f64).map(|x| (x, m.evaluate(x))).collect();
        let fit = fit_cubic_origin(&pairs).unwrap();
        for (got, want) in [(fit.model.c1, m.c1), (fit.model.c2, m.c2), (fit.model.c3, m.c3)] {
            prop_assert!((got - want).abs() <= 1e-9 * want.abs().max(1e-3), "{} vs {}", got, want);
        }
        prop_assert_eq!(fit.model.evaluate(0.0), 0.0);
    }

    #[test]
    fn scaling_x_rescales_coefficients(m in model(), s in 0.2..5.0f64, noise in prop::collection::vec(-0.1..0.1f64, 12)) {
        let pairs: Vec<_> = (1..=12).map(|k| 0.75 * k as f64).zip(&noise).map(|(x, e)| (x, m.evaluate(x) + e)).collect();
        let scaled: Vec<_> = pairs.iter().map(|&(x, f)| (s * x, f)).collect();
        let (a, b) = (fit_cubic_origin(&pairs).unwrap(), fit_cubic_origin(&scaled).unwrap());
        let rel = |x: f64, y: f64| (x - y).abs() / y.abs().max(1e-12);
        prop_assert!(rel(b.model.c1 * s, a.model.c1) < 1e-6);
        prop_assert!(rel(b.model.c2 * s * s, a.model.c2) < 1e-6);
        prop_assert!(rel(b.model.c3 * s * s * s, a.model.c3) < 1e-6);
        prop_assert!((a.r_squared - b.r_squared).abs() < 1e-6);
    }

    #[test]
    fn synced_pairs_stay_time_ordered(offset in 0.0..0.5f64, n in 2usize..60) {
        let force = series((0..=600).map(|i| i as f64 * 0.008), |t| t.sin(), 125.0);
        let disp = series((0..n).map(|i| offset + i as f64 * 0.04), |t| t, 25.0);
        let out = resample_sync(&force, &disp).unwrap();
        prop_assert!(out.pairs.windows(2).all(|w| w[1].t > w[0].t));
        prop_assert_eq!(out.pairs.len() + out.dropped, n);
    }
}
