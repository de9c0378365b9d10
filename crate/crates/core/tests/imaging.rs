use proptest::prelude::*;
use tactile_core::imaging::generate_marker_pattern;
use tactile_core::{Error, MarkerPattern};

fn pattern(seed: u64, w: usize, h: usize) -> Vec<u8> {
    generate_marker_pattern(&MarkerPattern::new(seed, w, h)).unwrap().into_pixels()
}

#[test]
fn same_seed_gives_identical_bytes() {
    assert_eq!(pattern(42, 64, 64), pattern(42, 64, 64));
}

#[test]
fn neighbouring_seeds_differ_almost_everywhere() {
    let (a, b) = (pattern(42, 64, 64), pattern(43, 64, 64));
    let differing = a.iter().zip(&b).filter(|(x, y)| x != y).count();
    // Independent uniform bytes coincide with probability 1/256.
    assert!(differing as f64 >= 0.9 * a.len() as f64, "{differing}");
}

#[test]
fn sample_mean_is_near_midrange() {
    let p = pattern(7, 320, 320);
    let mean = p.iter().map(|&v| v as f64).sum::<f64>() / p.len() as f64;
    assert!((122.0..=133.0).contains(&mean), "{mean}");
}

#[test]
fn histogram_passes_chi_square() {
    let p = pattern(7, 320, 320);
    let mut bins = [0usize; 16];
    for &v in &p {
        bins[v as usize / 16] += 1;
    }
    let expected = p.len() as f64 / 16.0;
    let chi2: f64 = bins.iter().map(|&o| (o as f64 - expected).powi(2) / expected).sum();
    assert!(chi2 < 37.7, "{chi2}");
}

#[test]
fn respects_intensity_bounds() {
    let spec = MarkerPattern {
        intensity_min: 40,
        intensity_max: 60,
        ..MarkerPattern::new(3, 32, 32)
    };
    let f = generate_marker_pattern(&spec).unwrap();
    assert!(f.pixels().iter().all(|&v| (40..=60).contains(&v)));
    assert!(f.pixels().contains(&40) && f.pixels().contains(&60));
}

#[test]
fn rejects_tiny_patterns() {
    assert!(matches!(
        generate_marker_pattern(&MarkerPattern::new(1, 15, 64)),
        Err(Error::DimensionTooSmall { .. })
    ));
    assert!(generate_marker_pattern(&MarkerPattern::new(1, 16, 16)).is_ok());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn pattern_is_a_pure_function_of_its_spec(seed in any::<u64>(), w in 16usize..48, h in 16usize..48) {
        let a = pattern(seed, w, h);
        prop_assert_eq!(a.len(), w * h);
        prop_assert_eq!(a, pattern(seed, w, h));
    }
}
