use proptest::prelude::*;

use stationarity::engine::{weight_profiles, Argmax};
use stationarity::simgen::gen_model;
use stationarity::{
    run_test, Error, Interval, ModelSpec, ModelTag, Scale, Stream, TestConfig, WeightProfile,
};

fn sample(tag: ModelTag, len: usize, seed: u64) -> Vec<f64> {
    gen_model(
        &ModelSpec::new(tag, len),
        &Stream::root(seed).derive("data", 0),
    )
    .unwrap()
}

fn rejection_rate(tag: ModelTag, len: usize, alpha: f64, reps: u64) -> f64 {
    let hits = (0..reps)
        .filter(|&r| {
            let cfg = TestConfig {
                alpha,
                seed: r,
                parallel: false,
                ..TestConfig::default()
            };
            run_test(&sample(tag, len, r), &cfg).unwrap().reject
        })
        .count();
    hits as f64 / reps as f64
}

#[test]
fn white_noise_size_is_conservative() {
    let rate = rejection_rate(ModelTag::S1, 512, 0.05, 1000);
    assert!(rate <= 0.08, "size {rate}");
    let rate = rejection_rate(ModelTag::S1, 512, 0.05, 100);
    assert!(rate <= 0.12, "size {rate}");
}

#[test]
fn time_varying_ar_is_detected() {
    let rate = rejection_rate(ModelTag::N1, 512, 0.1, 100);
    assert!(rate >= 0.95, "power {rate}");
}

#[test]
fn constant_series_is_degenerate() {
    let err = run_test(&[2.5; 256], &TestConfig::default()).unwrap_err();
    assert_eq!(err, Error::DegenerateBootstrap);
}

#[test]
fn worker_count_does_not_change_results() {
    let x = sample(ModelTag::N9, 512, 5);
    let cfg = TestConfig {
        seed: 9,
        keep_tables: true,
        ..TestConfig::default()
    };
    let parallel = run_test(&x, &cfg).unwrap();
    let serial = run_test(
        &x,
        &TestConfig {
            parallel: false,
            ..cfg
        },
    )
    .unwrap();
    assert_eq!(parallel, serial);
}

#[test]
fn profile_example_from_two_intervals() {
    let a = Argmax {
        pair: 0,
        first: Interval::new(0, 1).unwrap(),
        second: Interval::new(4, 7).unwrap(),
        scale: Scale::new(-1).unwrap(),
    };
    let p = WeightProfile::from_argmax(&[a], 8).unwrap();
    assert_eq!(
        p.inverse_length,
        vec![0.5, 0.5, 0.0, 0.0, 0.25, 0.25, 0.25, 0.25]
    );
    assert_eq!(p.equal, vec![1.0, 1.0, 0.0, 0.0, 1.0, 1.0, 1.0, 1.0]);
}

#[test]
fn profile_mass_over_results() {
    let results: Vec<_> = (0..6)
        .map(|r| {
            run_test(
                &sample(ModelTag::N5, 256, r),
                &TestConfig {
                    seed: r,
                    ..TestConfig::default()
                },
            )
            .unwrap()
        })
        .collect();
    let p = weight_profiles(&results, 256).unwrap();
    assert!((p.inverse_length.iter().sum::<f64>() - 2.0).abs() < 1e-12);
    let expected: f64 = results
        .iter()
        .map(|r| (r.argmax.first.len() + r.argmax.second.len()) as f64)
        .sum::<f64>()
        / 6.0;
    assert!((p.equal.iter().sum::<f64>() - expected).abs() < 1e-9);
    assert!(weight_profiles(&results, 512).is_err());
    assert_eq!(weight_profiles(&[], 256).unwrap_err(), Error::EmptyResults);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn decision_is_monotone_in_alpha(seed in 0u64..1000, a in 0.001f64..0.5, b in 0.001f64..0.5) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let x = sample(ModelTag::N10, 256, seed);
        let cfg = TestConfig { seed, replicates: 50, ..TestConfig::default() };
        let at_lo = run_test(&x, &TestConfig { alpha: lo, ..cfg }).unwrap();
        let at_hi = run_test(&x, &TestConfig { alpha: hi, ..cfg }).unwrap();
        prop_assert_eq!(at_lo.statistic, at_hi.statistic);
        prop_assert!(at_lo.critical_value >= at_hi.critical_value);
        prop_assert!(!at_lo.reject || at_hi.reject);
        prop_assert_eq!(at_lo.reject_at(hi).unwrap(), at_hi.reject);
    }

    #[test]
    fn positive_rescaling_keeps_standardized_tables(seed in 0u64..1000, c in 0.01f64..100.0) {
        let x = sample(ModelTag::S3, 256, seed);
        let y: Vec<f64> = x.iter().map(|v| c * v).collect();
        let cfg = TestConfig { seed, replicates: 50, keep_tables: true, ..TestConfig::default() };
        let a = run_test(&x, &cfg).unwrap();
        let b = run_test(&y, &cfg).unwrap();
        for (u, v) in a.standardized().unwrap().iter().zip(b.standardized().unwrap()) {
            let (u, v) = (u.unwrap(), v.unwrap());
            prop_assert!((u - v).abs() <= 1e-9 * u.abs().max(1.0));
        }
        prop_assert_eq!(a.argmax, b.argmax);
        prop_assert_eq!(a.reject, b.reject);
    }
}
