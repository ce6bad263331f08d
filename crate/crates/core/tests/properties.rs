use proptest::prelude::*;
use standardness::experiments::{reference_law, run_cell, CellSpec, RadiusRule};
use standardness::{
    bias_corrected_estimate, neighbor_counts, neighbor_counts_naive, plugin_estimate, sample,
    Distribution, SampleCloud64, SeedSpec, Shape,
};

/// Cloud on a dyadic lattice (exact under integer shifts), with some points
/// repeated so duplicates are exercised.
fn dyadic_cloud(d: usize, n: usize, seed: u64) -> SampleCloud64 {
    let mut stream = SeedSpec::new(seed).stream(0, 0);
    let mut points: Vec<Vec<f64>> = Vec::with_capacity(n);
    for i in 0..n {
        if i > 0 && stream.uniform() < 0.05 {
            let j = (stream.uniform() * i as f64) as usize;
            points.push(points[j].clone());
        } else {
            points.push(
                (0..d)
                    .map(|_| (stream.uniform() * 1024.0).floor() / 1024.0)
                    .collect(),
            );
        }
    }
    SampleCloud64::new(points).unwrap()
}

fn continuous_cloud(d: usize, n: usize, seed: u64) -> SampleCloud64 {
    let mut stream = SeedSpec::new(seed).stream(1, 0);
    SampleCloud64::new(
        (0..n)
            .map(|_| (0..d).map(|_| stream.uniform()).collect())
            .collect(),
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn grid_matches_naive(d in 1usize..=4, n in 1usize..=500, seed in any::<u64>(), r in 0.01f64..0.6) {
        let cloud = dyadic_cloud(d, n, seed);
        prop_assert_eq!(neighbor_counts(&cloud, r).unwrap(), neighbor_counts_naive(&cloud, r).unwrap());
    }

    #[test]
    fn permutation_and_translation_invariance(
        d in 1usize..=4,
        n in 2usize..=300,
        seed in any::<u64>(),
        r in 0.02f64..0.5,
        shift in prop::collection::vec(-8i32..8, 4),
    ) {
        let cloud = dyadic_cloud(d, n, seed);
        let base = bias_corrected_estimate(&cloud, r).unwrap();

        let mut order: Vec<usize> = (0..n).collect();
        let mut stream = SeedSpec::new(seed).stream(2, 0);
        for i in (1..n).rev() {
            order.swap(i, (stream.uniform() * (i + 1) as f64) as usize % (i + 1));
        }
        let permuted = bias_corrected_estimate(&cloud.permuted(&order).unwrap(), r).unwrap();
        prop_assert_eq!(&base, &permuted);

        let offset: Vec<f64> = shift[..d].iter().map(|&s| s as f64).collect();
        let moved = bias_corrected_estimate(&cloud.translated(&offset).unwrap(), r).unwrap();
        prop_assert_eq!(&base, &moved);
    }

    #[test]
    fn scaling_covariance(d in 1usize..=4, n in 2usize..=300, seed in any::<u64>(), r in 0.05f64..0.5, c in 0.1f64..10.0) {
        let cloud = continuous_cloud(d, n, seed);
        let before = plugin_estimate(&cloud, r).unwrap();
        let after = plugin_estimate(&cloud.scaled(c).unwrap(), c * r).unwrap();
        let expected = before * c.powi(-(d as i32));
        prop_assert!(((after - expected) / expected).abs() < 1e-12, "{} vs {}", after, expected);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn correction_bounds(d in 1usize..=4, n in 1usize..=200, seed in any::<u64>(), r in 0.01f64..1.0) {
        let est = bias_corrected_estimate(&continuous_cloud(d, n, seed), r).unwrap();
        prop_assert!(est.upsilon_hat < est.upsilon_tilde);
        prop_assert!(est.upsilon_tilde <= 2.0 * est.upsilon_hat);
        prop_assert!(est.a_count >= 1 && est.a_count <= n);
    }
}

fn in_pool<R: Send>(threads: usize, f: impl FnOnce() -> R + Send) -> R {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .unwrap()
        .install(f)
}

#[test]
fn thread_count_does_not_change_results() {
    let cell = CellSpec {
        dist_id: "S4_disk".into(),
        dist: reference_law("S4_disk").unwrap(),
        n: 800,
        replications: 24,
        radius_rule: RadiusRule::Default,
    };
    let strip = |mut r: standardness::experiments::CellReport| {
        r.wall_time_secs = 0.0;
        r
    };
    let one = strip(in_pool(1, || run_cell(&cell, 5, 17).unwrap()));
    let four = strip(in_pool(4, || run_cell(&cell, 5, 17).unwrap()));
    assert_eq!(one, four);

    let dist = Distribution::UniformOnShape(Shape::unit_square());
    let cloud = sample(&dist, 2000, &mut SeedSpec::new(1).stream(0, 0)).unwrap();
    let a = in_pool(1, || bias_corrected_estimate(&cloud, 0.05).unwrap());
    let b = in_pool(3, || bias_corrected_estimate(&cloud, 0.05).unwrap());
    assert_eq!(a, b);
}
