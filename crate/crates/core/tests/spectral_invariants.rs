use std::f64::consts::TAU;

use bathforge::spectral::{
    am_sidebands, bessel_j, bessel_j_series, estimate_psd, estimate_psd_realizations, from_dbc,
    pm_sidebands, to_dbc, DEFAULT_FLOOR_DB,
};
use bathforge::{NoiseRealization, NoiseSpec, Quadrature, TimeGrid};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn periodogram_total_power_is_mean_square(n in 8usize..600, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let omega0 = 3.0;
        let grid = TimeGrid::new(0.0, TAU / omega0 / n as f64, n).unwrap();
        let est = estimate_psd(&[&x], &grid, omega0).unwrap();
        let ms = x.iter().map(|v| v * v).sum::<f64>() / n as f64;
        prop_assert!((est.total_power() - ms).abs() <= 1e-10 * ms);
    }

    #[test]
    fn pm_sidebands_are_symmetric_with_alternating_sign(depth in 0.0f64..5.0, n_max in 1usize..20) {
        let comb = pm_sidebands(1.0, depth, 2.0, n_max).unwrap();
        for n in 1..=n_max {
            let w = 2.0 * n as f64;
            let up = comb.amplitude_at(w).unwrap_or(0.0);
            let down = comb.amplitude_at(-w).unwrap_or(0.0);
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            prop_assert!((down - sign * up).abs() <= 1e-15 + 1e-13 * up.abs());
        }
        prop_assert!(comb.total_power() <= 1.0 + 1e-12);
    }

    #[test]
    fn pm_power_is_conserved_with_enough_orders(depth in 0.0f64..6.0) {
        let n_max = (depth.ceil() as usize) + 30;
        let comb = pm_sidebands(2.0, depth, 1.0, n_max).unwrap();
        prop_assert!((comb.total_power() - 4.0).abs() < 1e-10);
    }

    #[test]
    fn am_sidebands_have_equal_magnitude(carrier in 0.1f64..3.0, m in -1.0f64..1.0, w in 0.1f64..100.0) {
        let comb = am_sidebands(carrier, m, w).unwrap();
        if m != 0.0 {
            let lo = comb.amplitude_at(-w).unwrap();
            let hi = comb.amplitude_at(w).unwrap();
            prop_assert_eq!(lo.abs(), hi.abs());
            prop_assert!((lo.abs() - m.abs() / 2.0).abs() < 1e-15);
        }
    }

    #[test]
    fn bessel_recurrence_matches_series(n in 0i64..12, x in 0.0f64..8.0) {
        let a = bessel_j(n, x);
        let b = bessel_j_series(n as usize, x);
        prop_assert!((a - b).abs() < 1e-12, "J_{n}({x}): {a} vs {b}");
        let reflected = if n % 2 == 0 { a } else { -a };
        prop_assert!((bessel_j(-n, x) - reflected).abs() < 1e-15);
    }

    #[test]
    fn dbc_round_trip(values in prop::collection::vec(1e-20f64..1e3, 1..50), carrier in 1e-3f64..1e3) {
        let s = to_dbc(&values, carrier, DEFAULT_FLOOR_DB).unwrap();
        let back = from_dbc(&s, carrier);
        for (a, b) in values.iter().zip(&back) {
            prop_assert!((a - b).abs() <= 1e-12 * a);
        }
    }
}

#[test]
fn non_positive_density_is_floored_and_reported() {
    let s = to_dbc(&[1.0, 0.0, -1.0], 1.0, DEFAULT_FLOOR_DB).unwrap();
    assert_eq!(s.floored, vec![1, 2]);
    assert_eq!(s.values[1], DEFAULT_FLOOR_DB);
    assert_eq!(from_dbc(&s, 1.0)[2], 0.0);
    assert!(to_dbc(&[1.0], 0.0, DEFAULT_FLOOR_DB).is_err());
}

#[test]
fn partial_periods_are_rejected() {
    let grid = TimeGrid::new(0.0, 0.01, 90).unwrap();
    let x = vec![0.0; 90];
    assert!(estimate_psd(&[&x], &grid, TAU).is_err());
}

#[test]
fn single_tone_lands_in_one_bin() {
    let spec = NoiseSpec::tabulated(
        Quadrature::Amplitude,
        0.2,
        TAU * 5.0,
        vec![0.0, 0.0, 1.0],
        9,
    )
    .unwrap();
    let grid = TimeGrid::periodic(spec.omega0(), 2, 64).unwrap();
    let r = NoiseRealization::generate(&spec, 0, grid).unwrap();
    let est = estimate_psd_realizations(&[r]).unwrap();
    let k = est.bin_of(3.0 * spec.omega0()).unwrap();
    let total: f64 = (0..est.density.len()).map(|i| est.bin_weight(i)).sum();
    assert!((est.bin_weight(k) - total).abs() < 1e-12 * total);
    // amplitude 0.2 cosine: weight π a²/2 at each sign
    assert!((est.bin_weight(k) - std::f64::consts::PI * 0.04 / 2.0).abs() < 1e-12);
}
