use std::f64::consts::PI;

use standardness::geometry::{Ball, ConvexPolygon};
use standardness::{ball_shape_intersection, make_regular_polygon, unit_ball_volume, Shape};

/// Radical-inverse (Halton) point in base 2 and 3.
fn halton(i: u64) -> [f64; 2] {
    let inverse = |mut k: u64, base: u64| {
        let (mut f, mut r) = (1.0, 0.0);
        while k > 0 {
            f /= base as f64;
            r += f * (k % base) as f64;
            k /= base;
        }
        r
    };
    [inverse(i, 2), inverse(i, 3)]
}

/// Area of `B(x, r) ∩ shape` by low-discrepancy integration over the disk's
/// bounding square.
fn quasi_mc_area(shape: &Shape<f64>, x: [f64; 2], r: f64, points: u64) -> f64 {
    let hits = (1..=points)
        .filter(|&i| {
            let [u, v] = halton(i);
            let p = [x[0] + r * (2.0 * u - 1.0), x[1] + r * (2.0 * v - 1.0)];
            let inside_disk = (p[0] - x[0]).powi(2) + (p[1] - x[1]).powi(2) <= r * r;
            inside_disk && shape.contains(&p)
        })
        .count();
    4.0 * r * r * hits as f64 / points as f64
}

#[test]
fn disk_boundary_against_quasi_monte_carlo() {
    let disk = Shape::Ball(Ball::new(vec![0.0, 0.0], 1.0).unwrap());
    let exact = ball_shape_intersection(&disk, &[1.0, 0.0], 0.2).unwrap();
    let qmc = quasi_mc_area(&disk, [1.0, 0.0], 0.2, 1_000_000);
    assert!((exact - qmc).abs() < 1e-4, "exact {exact} qmc {qmc}");
}

#[test]
fn polygon_chords_against_quasi_monte_carlo() {
    let hexagon = make_regular_polygon(6, 1.0).unwrap();
    for (x, r) in [([0.1, -0.3], 0.35), ([0.55, 0.2], 0.3), ([0.0, 0.0], 0.6)] {
        let exact = ball_shape_intersection(&hexagon, &x, r).unwrap();
        let qmc = quasi_mc_area(&hexagon, x, r, 400_000);
        assert!(
            (exact - qmc).abs() < 2e-4,
            "{x:?} {r}: exact {exact} qmc {qmc}"
        );
    }
}

fn polygons() -> Vec<ConvexPolygon<f64>> {
    let mut out: Vec<_> = [3, 4, 6]
        .into_iter()
        .map(|k| match make_regular_polygon(k, 1.0).unwrap() {
            Shape::ConvexPolygon(p) => p,
            Shape::Ball(_) => unreachable!(),
        })
        .collect();
    out.push(ConvexPolygon::new(vec![[0.0, 0.0], [3.0, 0.2], [2.5, 1.4], [0.4, 1.1]]).unwrap());
    out.push(ConvexPolygon::new(vec![[0.0, 0.0], [1.0, 0.0], [0.1, 0.05]]).unwrap());
    out
}

#[test]
fn vertex_sector_is_exact() {
    for poly in polygons() {
        let shape = Shape::ConvexPolygon(poly.clone());
        for (i, v) in poly.vertices().iter().enumerate() {
            let theta = poly.interior_angle(i);
            let limit = poly.vertex_clearance(i) / 2.0;
            for frac in [0.999, 0.5, 1e-3] {
                let r = frac * limit;
                let area = ball_shape_intersection(&shape, v, r).unwrap();
                let expected = theta * r * r / 2.0;
                assert!(
                    ((area - expected) / expected).abs() < 1e-10,
                    "vertex {i}, r {r}: {area} vs {expected}"
                );
            }
        }
    }
}

#[test]
fn ball_boundary_fraction_tends_to_half() {
    for d in 2..=4 {
        let ball = Shape::Ball(Ball::with_volume(d, 1.0).unwrap());
        let radius = match &ball {
            Shape::Ball(b) => b.radius(),
            _ => unreachable!(),
        };
        let omega: f64 = unit_ball_volume(d).unwrap();
        let mut x = vec![0.0; d];
        x[d - 1] = radius;
        for r in [1e-2f64, 1e-3] {
            let frac = ball_shape_intersection(&ball, &x, r).unwrap() / (omega * r.powi(d as i32));
            assert!((frac - 0.5).abs() < 5e-3, "d {d}, r {r}: {frac}");
        }
    }
}

#[test]
fn monotone_and_bounded_in_radius() {
    let mut shapes: Vec<Shape<f64>> = polygons().into_iter().map(Shape::ConvexPolygon).collect();
    for d in 2..=4 {
        shapes.push(Shape::Ball(Ball::with_volume(d, 1.0).unwrap()));
    }
    for shape in &shapes {
        let d = shape.dim();
        let omega: f64 = unit_ball_volume(d).unwrap();
        let (lo, hi) = shape.bounding_box();
        let probes: Vec<Vec<f64>> = [0.0, 0.3, 0.5, 0.9, 1.0]
            .iter()
            .map(|t| lo.iter().zip(&hi).map(|(a, b)| a + t * (b - a)).collect())
            .collect();
        for x in probes {
            let mut prev = 0.0;
            for k in 1..=60 {
                let r = shape.diameter() * k as f64 / 40.0;
                let m = ball_shape_intersection(shape, &x, r).unwrap();
                assert!(m + 1e-12 >= prev, "not monotone at r {r}");
                let cap = (omega * r.powi(d as i32)).min(shape.area());
                assert!(
                    m <= cap * (1.0 + 1e-12) + 1e-15,
                    "d {d} x {x:?} r {r}: {m} > {cap}"
                );
                prev = m;
            }
            if shape.contains(&x) {
                assert!((prev - shape.area()).abs() < 1e-9 * shape.area());
            }
        }
    }
}

#[test]
fn full_disk_and_square_closed_forms() {
    let sq = Shape::unit_square();
    assert!((ball_shape_intersection(&sq, &[0.5, 0.5], 0.5).unwrap() - PI / 4.0).abs() < 1e-14);
    assert!(
        (ball_shape_intersection(&sq, &[0.5, 0.5], 0.5f64.sqrt()).unwrap() - 1.0).abs() < 1e-12
    );
}
