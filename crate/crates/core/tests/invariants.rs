//! Property-based checks of structural invariants.

use proptest::prelude::*;

use randpivot::{
    bandwidth_q, draw_weights, sample_acvf, sample_mean, z_quantile, SampleSeries, SeedLineage,
    WeightVector,
};

fn series_strategy(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-50.0f64..50.0, 2..max_len)
}

proptest! {
    #[test]
    fn drawn_weights_sum_to_n(n in 2usize..200, seed in any::<u64>()) {
        let mut rng = SeedLineage::new(seed).stream(&[1]);
        let w = draw_weights(n, &mut rng).unwrap();
        prop_assert_eq!(w.counts().iter().map(|&c| c as usize).sum::<usize>(), n);
    }

    #[test]
    fn acvf_lag0_dominates(values in series_strategy(64)) {
        let x = SampleSeries::new(values).unwrap();
        let n = x.len();
        for h in 0..n {
            let g0 = sample_acvf(&x, 0).unwrap();
            let gh = sample_acvf(&x, h).unwrap();
            prop_assert!(gh.abs() <= g0 + 1e-12, "h={h}: {gh} vs {g0}");
        }
    }

    #[test]
    fn acvf_matches_brute_force(values in series_strategy(32), h in 0usize..8) {
        let x = SampleSeries::new(values).unwrap();
        let n = x.len();
        prop_assume!(h < n);
        let mean = sample_mean(&x);
        let brute: f64 = (0..n - h)
            .map(|i| (x[i] - mean) * (x[i + h] - mean))
            .sum::<f64>() / n as f64;
        let got = sample_acvf(&x, h).unwrap();
        prop_assert!((got - brute).abs() <= 1e-12 * (1.0 + brute.abs()));
    }

    #[test]
    fn acvf_is_shift_invariant(values in series_strategy(48), shift in -100.0f64..100.0) {
        let x = SampleSeries::new(values.clone()).unwrap();
        let y = SampleSeries::new(values.iter().map(|v| v + shift).collect()).unwrap();
        for h in 0..x.len().min(6) {
            let a = sample_acvf(&x, h).unwrap();
            let b = sample_acvf(&y, h).unwrap();
            prop_assert!((a - b).abs() <= 1e-9 * (1.0 + a.abs()), "h={h}");
        }
    }

    #[test]
    fn quantile_is_antisymmetric(p in 0.0001f64..0.9999) {
        let z = z_quantile(p).unwrap();
        let z_c = z_quantile(1.0 - p).unwrap();
        prop_assert!((z + z_c).abs() <= 1e-9 * (1.0 + z.abs()));
    }

    #[test]
    fn quantile_is_monotone(p in 0.001f64..0.99, dp in 0.0001f64..0.009) {
        prop_assert!(z_quantile(p + dp).unwrap() > z_quantile(p).unwrap());
    }

    #[test]
    fn bandwidth_is_within_bounds(n in 4usize..100_000, d in 0.0f64..0.499) {
        let q = bandwidth_q(n, d).unwrap();
        prop_assert!(q >= 1);
        prop_assert!(q <= (n as f64).sqrt() as usize);
    }

    #[test]
    fn weight_counts_round_trip(assignment in prop::collection::vec(0usize..32, 2..32)) {
        // build a valid multinomial count vector from an index assignment
        let n = assignment.len();
        let mut counts = vec![0u32; n];
        for &slot in &assignment {
            counts[slot % n] += 1;
        }
        let w = WeightVector::from_counts(counts.clone()).unwrap();
        prop_assert_eq!(w.counts(), counts.as_slice());
        let c_sum: f64 = w.centered().sum();
        prop_assert!(c_sum.abs() < 1e-12);
    }
}
