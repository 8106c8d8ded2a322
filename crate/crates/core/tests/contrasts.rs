use proptest::prelude::*;
use rand::Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use stationarity::engine::default_min_len;
use stationarity::intervals::{
    contrast_all, contrast_stat, contrast_weights, disjoint_pairs, sample_intervals, PrefixSums,
};
use stationarity::simgen::gen_innovations;
use stationarity::wavelets::white_noise_contrast_variance;
use stationarity::{wavelet_periodogram, InnovationDist, Interval, Scale, Stream};

fn chi_square_p(observed: &[f64], expected: &[f64]) -> f64 {
    let stat: f64 = observed
        .iter()
        .zip(expected)
        .map(|(o, e)| (o - e).powi(2) / e)
        .sum();
    1.0 - ChiSquared::new((observed.len() - 1) as f64)
        .unwrap()
        .cdf(stat)
}

#[test]
fn sampler_is_uniform_over_the_accepted_region() {
    let (t, m) = (1024usize, default_min_len(1024));
    assert_eq!(m, 102);
    let draws = sample_intervals(t, 100_000, m, &Stream::root(11)).unwrap();
    assert!(draws.iter().all(|i| i.len() >= m && i.end < t));

    // with s uniform over accepted (s, e), P(s) is proportional to T - m - s + 1
    let bins = 20;
    let width = (t - m + 1).div_ceil(bins);
    let mut expected = vec![0.0; bins];
    for s in 0..=t - m {
        expected[s / width] += (t - m - s + 1) as f64;
    }
    let total: f64 = expected.iter().sum();
    expected
        .iter_mut()
        .for_each(|e| *e *= draws.len() as f64 / total);
    let mut observed = vec![0.0; bins];
    for i in &draws {
        observed[i.start / width] += 1.0;
    }
    let p = chi_square_p(&observed, &expected);
    assert!(p > 0.01, "start marginal p = {p}");

    // length n has T - n + 1 placements
    let mut expected = vec![0.0; bins];
    for n in m..=t {
        expected[(n - m) / width] += (t - n + 1) as f64;
    }
    expected
        .iter_mut()
        .for_each(|e| *e *= draws.len() as f64 / total);
    let mut observed = vec![0.0; bins];
    for i in &draws {
        observed[(i.len() - m) / width] += 1.0;
    }
    let p = chi_square_p(&observed, &expected);
    assert!(p > 0.01, "length marginal p = {p}");
}

#[test]
fn white_noise_contrast_mean_and_variance() {
    let t = 2048;
    let pairs = disjoint_pairs(vec![
        Interval::new(100, 355).unwrap(),
        Interval::new(1200, 1455).unwrap(),
    ])
    .unwrap();
    let s1 = Scale::new(-1).unwrap();
    let reps = 2000;
    let c: Vec<f64> = (0..reps)
        .map(|r| {
            let x = gen_innovations(InnovationDist::Normal, t, &Stream::root(5).derive("rep", r));
            contrast_all(&wavelet_periodogram(&x, 1).unwrap(), &pairs)
                .unwrap()
                .get(s1, 0)
        })
        .collect();
    let mean = c.iter().sum::<f64>() / reps as f64;
    let var = c.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (reps - 1) as f64;
    assert!(
        mean.abs() < 4.0 * var.sqrt() / (reps as f64).sqrt(),
        "mean {mean}"
    );

    let psi = contrast_weights(pairs.intervals[0], pairs.intervals[1], t)
        .unwrap()
        .dense();
    let oracle = white_noise_contrast_variance(-1, &psi).unwrap();
    assert!((oracle - 3.0).abs() < 0.05, "{oracle}");
    assert!(
        (var / oracle - 1.0).abs() <= 0.2,
        "variance {var} vs {oracle}"
    );
}

#[test]
fn scaling_the_series_scales_contrasts_quadratically() {
    let t = 777;
    let x = gen_innovations(InnovationDist::T5, t, &Stream::root(3));
    let pairs = disjoint_pairs(sample_intervals(t, 30, 40, &Stream::root(4)).unwrap()).unwrap();
    let a = contrast_all(&wavelet_periodogram(&x, 4).unwrap(), &pairs).unwrap();
    let c = 2.5;
    let y: Vec<f64> = x.iter().map(|v| c * v).collect();
    let b = contrast_all(&wavelet_periodogram(&y, 4).unwrap(), &pairs).unwrap();
    for s in Scale::up_to(4) {
        for (u, v) in a.row(s).iter().zip(b.row(s)) {
            assert!((v - c * c * u).abs() <= 1e-12 * (1.0 + v.abs()) * 10.0);
        }
    }
}

fn arb_pair(len: usize) -> impl Strategy<Value = (Interval, Interval)> {
    (0..len - 1, 0..len - 1, 0..len - 1, 0..len - 1).prop_filter_map(
        "pair must be disjoint",
        |(a, b, c, d)| {
            let p = Interval::new(a.min(b), a.max(b)).ok()?;
            let q = Interval::new(c.min(d), c.max(d)).ok()?;
            p.is_disjoint(&q).then_some((p, q))
        },
    )
}

proptest! {
    #[test]
    fn prefix_sum_matches_inner_product((p, q) in arb_pair(300), seed in any::<u64>()) {
        let mut rng = Stream::root(seed).rng();
        let row: Vec<f64> = (0..300).map(|_| rng.random::<f64>() * 10.0).collect();
        let psi = contrast_weights(p, q, 300).unwrap();
        let inner: f64 = psi.dense().iter().zip(&row).map(|(a, b)| a * b).sum();
        let scale: f64 = psi.dense().iter().zip(&row).map(|(a, b)| (a * b).abs()).sum();
        let fast = PrefixSums::new(&row).contrast(&p, &q).unwrap();
        prop_assert!((fast - inner).abs() <= 1e-12 * scale.max(1.0));
        prop_assert!((contrast_stat(&row, &p, &q).unwrap() - fast).abs() <= 1e-12 * scale.max(1.0));
    }

    #[test]
    fn weights_are_zero_sum_and_unit_norm((p, q) in arb_pair(200)) {
        let w = contrast_weights(p, q, 200).unwrap().dense();
        prop_assert!(w.iter().sum::<f64>().abs() < 1e-12);
        prop_assert!((w.iter().map(|v| v * v).sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn row_offset_leaves_contrasts_unchanged((p, q) in arb_pair(200), offset in -100.0f64..100.0, seed in any::<u64>()) {
        let mut rng = Stream::root(seed).rng();
        let row: Vec<f64> = (0..200).map(|_| rng.random::<f64>()).collect();
        let shifted: Vec<f64> = row.iter().map(|v| v + offset).collect();
        let a = contrast_stat(&row, &p, &q).unwrap();
        let b = contrast_stat(&shifted, &p, &q).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + offset.abs()) * 20.0);
    }
}
