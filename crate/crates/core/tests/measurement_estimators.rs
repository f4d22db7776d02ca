use std::f64::consts::PI;

use bathforge::measurement::{
    assignment_fidelity, bayes_update, population_from_theta, posterior_from_counts,
    simple_normalize, simulate_counts, CountCalibration, ThetaPosterior, THETA_POINTS,
};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn posterior_stays_normalized(counts in prop::collection::vec(-50.0f64..100.0, 1..20)) {
        let cal = CountCalibration::reference();
        let post = posterior_from_counts(&counts, &cal, 401).unwrap();
        prop_assert!((post.total() - 1.0).abs() < 1e-12);
        prop_assert!(post.density().iter().all(|d| d.is_finite() && *d >= 0.0));
        let pop = population_from_theta(&post);
        prop_assert!((0.0..=1.0).contains(&pop.mean));
    }

    #[test]
    fn simple_estimate_is_clamped(e in -100.0f64..200.0) {
        let s = simple_normalize(e, &CountCalibration::reference()).unwrap();
        prop_assert!((0.0..=1.0).contains(&s.clamped));
        prop_assert!((s.raw - (e - 4.0) / 16.0).abs() < 1e-12);
    }

    #[test]
    fn likelihood_is_normalized_over_counts(theta in 0.0f64..PI) {
        let cal = CountCalibration::reference();
        let h = 0.01;
        let total: f64 = (-20_000..40_000).map(|k| cal.log_likelihood(k as f64 * h, theta).exp() * h).sum();
        prop_assert!((total - 1.0).abs() < 1e-6);
    }
}

#[test]
fn far_tail_count_does_not_collapse_the_posterior() {
    let cal = CountCalibration::reference();
    let prior = ThetaPosterior::uniform(THETA_POINTS).unwrap();
    let out = bayes_update(&prior, 1e4, &cal);
    assert!(!out.degenerate);
    assert!((out.posterior.total() - 1.0).abs() < 1e-12);
    assert!(out.posterior.mean() > 3.0);
}

#[test]
fn more_counts_shrink_the_posterior() {
    let cal = CountCalibration::reference();
    let theta = 1.2;
    let counts = simulate_counts(theta, &cal, 400, 8, 0).unwrap();
    let few = posterior_from_counts(&counts[..10], &cal, THETA_POINTS).unwrap();
    let many = posterior_from_counts(&counts, &cal, THETA_POINTS).unwrap();
    assert!(many.std() < few.std());
    assert!((many.mean() - theta).abs() < 4.0 * many.std());
}

#[test]
fn bad_calibrations_are_rejected() {
    assert!(CountCalibration::new(20.0, 4.0, 0.0, 2.0).is_err());
    assert!(CountCalibration::new(20.0, 4.0, 4.0, -1.0).is_err());
    assert!(ThetaPosterior::from_density(vec![0.0; 10]).is_err());
}

#[test]
fn fidelity_is_reproducible() {
    let cal = CountCalibration::reference();
    let a = assignment_fidelity(&cal, 2000, 4).unwrap();
    let b = assignment_fidelity(&cal, 2000, 4).unwrap();
    assert_eq!(a, b);
    assert!(a > 0.97);
}
