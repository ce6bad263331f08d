use standardness::experiments::reference_law;
use standardness::geometry::Ball;
use standardness::{nu_ball, sample, support, unit_ball_volume, Distribution, SeedSpec, Shape};

/// Upper 1e-4 quantile of the chi-square law with 15 degrees of freedom.
const CHI2_15_CRIT: f64 = 44.263;

fn chi_square(counts: &[usize]) -> f64 {
    let n: usize = counts.iter().sum();
    let expected = n as f64 / counts.len() as f64;
    counts
        .iter()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum()
}

fn cell_counts(dist: &Distribution<f64>, cell: impl Fn(&[f64]) -> usize) -> Vec<usize> {
    let cloud = sample(dist, 100_000, &mut SeedSpec::new(2024).stream(0, 0)).unwrap();
    let mut counts = vec![0; 16];
    for p in cloud.points() {
        counts[cell(p)] += 1;
    }
    counts
}

#[test]
fn square_is_uniform() {
    let counts = cell_counts(&reference_law("S2_square").unwrap(), |p| {
        let i = ((p[0] * 4.0) as usize).min(3);
        let j = ((p[1] * 4.0) as usize).min(3);
        4 * i + j
    });
    assert!(chi_square(&counts) < CHI2_15_CRIT, "{counts:?}");
}

#[test]
fn triangle_is_uniform() {
    let dist = reference_law("S1_triangle").unwrap();
    let Shape::ConvexPolygon(tri) = support(&dist) else {
        unreachable!()
    };
    let [a, b, c] = [tri.vertices()[0], tri.vertices()[1], tri.vertices()[2]];
    // Sixteen congruent sub-triangles from two rounds of midpoint
    // subdivision: in barycentric row j, 4 - j upward and 3 - j downward.
    let det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
    let cloud = sample(&dist, 100_000, &mut SeedSpec::new(2024).stream(0, 0)).unwrap();
    let mut by_key = std::collections::BTreeMap::new();
    for p in cloud.points() {
        let s = ((p[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (p[1] - a[1])) / det;
        let t = ((b[0] - a[0]) * (p[1] - a[1]) - (p[0] - a[0]) * (b[1] - a[1])) / det;
        let (u, v) = (4.0 * s.max(0.0), 4.0 * t.max(0.0));
        let j = (v.floor() as usize).min(3);
        let i = (u.floor() as usize).min(3 - j);
        let down = (u - i as f64) + (v - j as f64) > 1.0 && i + j < 3;
        *by_key.entry((j, i, down)).or_insert(0usize) += 1;
    }
    assert_eq!(by_key.len(), 16);
    let counts: Vec<usize> = by_key.into_values().collect();
    assert!(chi_square(&counts) < CHI2_15_CRIT, "{counts:?}");
}

#[test]
fn disk_is_uniform() {
    let dist = reference_law("S4_disk").unwrap();
    let r = 1.0 / std::f64::consts::PI.sqrt();
    let counts = cell_counts(&dist, |p| {
        let shell = ((p[0] * p[0] + p[1] * p[1]) / (r * r) * 4.0) as usize;
        let angle = p[1].atan2(p[0]) + std::f64::consts::PI;
        let sector = (angle / std::f64::consts::FRAC_PI_2) as usize;
        4 * shell.min(3) + sector.min(3)
    });
    assert!(chi_square(&counts) < CHI2_15_CRIT, "{counts:?}");
}

#[test]
fn three_ball_is_uniform() {
    let dist = reference_law("ball_d3").unwrap();
    let Shape::Ball(ball) = support(&dist) else {
        unreachable!()
    };
    let split = ball.radius() * 0.5f64.cbrt();
    let counts = cell_counts(&dist, |p| {
        let octant =
            (p[0] > 0.0) as usize | ((p[1] > 0.0) as usize) << 1 | ((p[2] > 0.0) as usize) << 2;
        let outer = (p.iter().map(|v| v * v).sum::<f64>().sqrt() > split) as usize;
        8 * outer + octant
    });
    assert!(chi_square(&counts) < CHI2_15_CRIT, "{counts:?}");
}

#[test]
fn ball_mass_monotone_and_saturates() {
    let laws = [
        reference_law("S3_hexagon").unwrap(),
        reference_law("ball_d3").unwrap(),
        Distribution::RadialCombination,
    ];
    for dist in &laws {
        let x = vec![0.05; dist.dim()];
        let diameter = support(dist).diameter();
        let mut prev = 0.0;
        for k in 1..=12 {
            let m = nu_ball(dist, &x, diameter * k as f64 / 10.0, 100_000)
                .unwrap()
                .value;
            assert!(m + 1e-12 >= prev);
            prev = m;
        }
        assert!((prev - 1.0).abs() < 1e-12);
    }
}

#[test]
fn vertex_mass_matches_angle() {
    for id in ["S1_triangle", "S2_square", "S3_hexagon"] {
        let dist = reference_law(id).unwrap();
        let Shape::ConvexPolygon(poly) = support(&dist) else {
            unreachable!()
        };
        let r = 1e-3;
        for (i, v) in poly.vertices().iter().enumerate() {
            let frac = nu_ball(&dist, v, r, 10_000).unwrap().value / (std::f64::consts::PI * r * r);
            let expected = poly.interior_angle(i) / (2.0 * std::f64::consts::PI);
            assert!(
                (frac - expected).abs() < 1e-6,
                "{id} vertex {i}: {frac} vs {expected}"
            );
        }
    }
}

#[test]
fn streams_are_order_independent() {
    let dist = Distribution::UniformOnShape(Shape::Ball(Ball::centered(4, 1.0).unwrap()));
    let seed = SeedSpec::new(99);
    let forward: Vec<_> = (0..4)
        .map(|k| sample(&dist, 50, &mut seed.stream(3, k)).unwrap())
        .collect();
    let backward: Vec<_> = (0..4)
        .rev()
        .map(|k| sample(&dist, 50, &mut seed.stream(3, k)).unwrap())
        .collect();
    for k in 0..4 {
        assert_eq!(forward[k].as_flat(), backward[3 - k].as_flat());
    }
    let omega: f64 = unit_ball_volume(4).unwrap();
    assert!(omega > 4.93 && omega < 4.94);
}
