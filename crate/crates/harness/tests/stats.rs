use brsp_core::rng_from_seed;
use brsp_harness::stats::{chi_square_uniform, total_variation, wilson_interval};
use brsp_harness::HarnessError;
use rand::Rng;

#[test]
fn fair_die_calibration() {
    let mut rng = rng_from_seed(0xD1E);
    let passing = (0..100)
        .filter(|_| {
            let mut counts = [0u64; 6];
            for _ in 0..10_000 {
                counts[rng.random_range(0..6)] += 1;
            }
            chi_square_uniform(&counts).unwrap() > 0.001
        })
        .count();
    assert!(passing >= 99, "{passing}/100");
}

#[test]
fn loaded_die_is_caught() {
    let mut rng = rng_from_seed(0xD1F);
    let mut counts = [0u64; 6];
    for _ in 0..10_000 {
        // face 0 comes up 20% of the time instead of 1/6
        let face = if rng.random_bool(0.2) { 0 } else { rng.random_range(1..6) };
        counts[face] += 1;
    }
    assert!(chi_square_uniform(&counts).unwrap() < 1e-6);
}

#[test]
fn undersampled_inputs_are_refused() {
    assert!(matches!(chi_square_uniform(&[3, 3, 3, 3]), Err(HarnessError::Undersampled { .. })));
    assert!(matches!(chi_square_uniform(&[100]), Err(HarnessError::TooFewCategories(1))));
    assert!(chi_square_uniform(&[5, 5, 5, 5]).is_ok());
}

#[test]
fn interval_and_distance_edges() {
    // Wilson bounds at z = 1.96, computed independently
    let close = |a: f64, b: f64| (a - b).abs() < 1e-12;
    let (lo, hi) = wilson_interval(100, 100, 1.96);
    assert!(close(lo, 0.9630051925239981) && close(hi, 1.0), "{lo} {hi}");
    let (lo, hi) = wilson_interval(0, 100, 1.96);
    assert!(close(lo, 0.0) && close(hi, 0.03699480747600191), "{lo} {hi}");
    assert_eq!(total_variation(&[1.0, 0.0], &[0.0, 1.0]), 1.0);
}
