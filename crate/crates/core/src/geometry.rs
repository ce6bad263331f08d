//! Supports, volumes and exact ball/support intersection measures.
//!
//! Two support families are modelled: strictly convex polygons in the plane
//! and closed Euclidean balls in `R^d`. Both expose their Lebesgue measure,
//! a closed membership test and the exact measure of `B(x, r) ∩ S`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampling::Distribution;
use crate::scalar::Real;

/// Largest dimension for which [`ball_shape_intersection`] has a closed form.
pub const MAX_INTERSECTION_DIM: usize = 4;

/// Lebesgue measure `ω_d` of the unit ball in `R^d`.
///
/// Evaluated through `ω_0 = 1`, `ω_1 = 2`, `ω_d = ω_{d-2} · 2π / d`, which
/// equals `π^{d/2} / Γ(d/2 + 1)` without needing a gamma function.
pub fn unit_ball_volume<T: Real>(d: usize) -> Result<T> {
    if d == 0 {
        return Err(Error::InvalidDimension(
            "dimension must be at least 1".into(),
        ));
    }
    let two_pi = T::PI() + T::PI();
    let mut w = if d.is_multiple_of(2) {
        T::one()
    } else {
        T::lit(2.0)
    };
    let mut k = if d.is_multiple_of(2) { 2 } else { 3 };
    while k <= d {
        w = w * two_pi / T::from_count(k);
        k += 2;
    }
    Ok(w)
}

/// Table of unit-ball volumes for `1..=max_dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct BallVolumeTable<T> {
    volumes: Vec<T>,
}

impl<T: Real> BallVolumeTable<T> {
    pub fn new(max_dim: usize) -> Result<Self> {
        let volumes = (1..=max_dim)
            .map(unit_ball_volume)
            .collect::<Result<Vec<T>>>()?;
        if volumes.is_empty() {
            return Err(Error::InvalidDimension("table needs max_dim >= 1".into()));
        }
        Ok(Self { volumes })
    }

    pub fn max_dim(&self) -> usize {
        self.volumes.len()
    }

    pub fn get(&self, d: usize) -> Option<T> {
        d.checked_sub(1).and_then(|i| self.volumes.get(i)).copied()
    }
}

#[inline]
fn cross<T: Real>(a: [T; 2], b: [T; 2]) -> T {
    a[0] * b[1] - a[1] * b[0]
}

#[inline]
fn dot<T: Real>(a: [T; 2], b: [T; 2]) -> T {
    a[0] * b[0] + a[1] * b[1]
}

#[inline]
fn sub<T: Real>(a: [T; 2], b: [T; 2]) -> [T; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

/// A strictly convex, counter-clockwise polygon in the plane.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexPolygon<T> {
    vertices: Vec<[T; 2]>,
}

impl<T: Real> ConvexPolygon<T> {
    /// Validates and wraps a counter-clockwise vertex list.
    ///
    /// Every vertex not on an edge must lie strictly to the left of it, which
    /// rules out clockwise input, collinear triples and self-intersecting
    /// (star-shaped) vertex orders.
    pub fn new(vertices: Vec<[T; 2]>) -> Result<Self> {
        let k = vertices.len();
        if k < 3 {
            return Err(Error::InvalidShape(format!(
                "polygon needs at least 3 vertices, got {k}"
            )));
        }
        if vertices.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::InvalidShape("polygon vertex is not finite".into()));
        }
        for i in 0..k {
            let a = vertices[i];
            let b = vertices[(i + 1) % k];
            for (j, &p) in vertices.iter().enumerate() {
                if j == i || j == (i + 1) % k {
                    continue;
                }
                if cross(sub(b, a), sub(p, a)) <= T::zero() {
                    return Err(Error::InvalidShape(format!(
                        "polygon is not strictly convex and counter-clockwise at edge {i}"
                    )));
                }
            }
        }
        Ok(Self { vertices })
    }

    pub fn vertices(&self) -> &[[T; 2]] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Directed edge `i -> i+1` (cyclic).
    pub fn edge(&self, i: usize) -> ([T; 2], [T; 2]) {
        let k = self.vertices.len();
        (self.vertices[i % k], self.vertices[(i + 1) % k])
    }

    /// Shoelace area.
    pub fn area(&self) -> T {
        let k = self.vertices.len();
        let twice: T = (0..k)
            .map(|i| cross(self.vertices[i], self.vertices[(i + 1) % k]))
            .sum();
        twice / T::lit(2.0)
    }

    pub fn perimeter(&self) -> T {
        (0..self.len())
            .map(|i| {
                let (a, b) = self.edge(i);
                dot(sub(b, a), sub(b, a)).sqrt()
            })
            .sum()
    }

    /// Vertex average; interior for a convex polygon.
    pub fn centroid(&self) -> [T; 2] {
        let k = T::from_count(self.len());
        let (sx, sy) = self
            .vertices
            .iter()
            .fold((T::zero(), T::zero()), |(sx, sy), v| (sx + v[0], sy + v[1]));
        [sx / k, sy / k]
    }

    /// Interior angle at vertex `i`.
    pub fn interior_angle(&self, i: usize) -> T {
        let k = self.len();
        let v = self.vertices[i % k];
        let prev = sub(self.vertices[(i + k - 1) % k], v);
        let next = sub(self.vertices[(i + 1) % k], v);
        cross(next, prev).abs().atan2(dot(next, prev))
    }

    pub fn min_interior_angle(&self) -> T {
        (0..self.len())
            .map(|i| self.interior_angle(i))
            .fold(T::infinity(), T::min)
    }

    /// Closed membership with a rounding allowance proportional to the
    /// polygon's scale, so that convex combinations of vertices test inside.
    pub fn contains(&self, p: [T; 2]) -> bool {
        let scale = self.diameter();
        let slack = T::epsilon() * T::lit(64.0) * scale * scale;
        (0..self.len()).all(|i| {
            let (a, b) = self.edge(i);
            cross(sub(b, a), sub(p, a)) >= -slack
        })
    }

    pub fn diameter(&self) -> T {
        let mut best = T::zero();
        for (i, &a) in self.vertices.iter().enumerate() {
            for &b in &self.vertices[i + 1..] {
                best = best.max(dot(sub(a, b), sub(a, b)));
            }
        }
        best.sqrt()
    }

    /// Point at arclength `s` along the boundary, starting at vertex 0.
    /// `s` is taken modulo the perimeter.
    pub fn boundary_point(&self, s: T) -> [T; 2] {
        let perimeter = self.perimeter();
        let mut s = s % perimeter;
        if s < T::zero() {
            s = s + perimeter;
        }
        for i in 0..self.len() {
            let (a, b) = self.edge(i);
            let len = dot(sub(b, a), sub(b, a)).sqrt();
            if s <= len {
                let t = s / len;
                return [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
            }
            s = s - len;
        }
        self.vertices[0]
    }

    /// Distance from vertex `i` to the nearest edge not incident to it.
    pub fn vertex_clearance(&self, i: usize) -> T {
        let k = self.len();
        let v = self.vertices[i % k];
        (0..k)
            .filter(|&e| e != i % k && (e + 1) % k != i % k)
            .map(|e| {
                let (a, b) = self.edge(e);
                point_segment_distance(v, a, b)
            })
            .fold(T::infinity(), T::min)
    }

    /// Exact area of `B(center, r) ∩ P`.
    pub fn disk_intersection_area(&self, center: [T; 2], r: T) -> T {
        let total: T = (0..self.len())
            .map(|i| {
                let (a, b) = self.edge(i);
                disk_wedge_area(sub(a, center), sub(b, center), r)
            })
            .sum();
        total.max(T::zero())
    }
}

fn point_segment_distance<T: Real>(p: [T; 2], a: [T; 2], b: [T; 2]) -> T {
    let ab = sub(b, a);
    let len2 = dot(ab, ab);
    let t = if len2 > T::zero() {
        (dot(sub(p, a), ab) / len2).max(T::zero()).min(T::one())
    } else {
        T::zero()
    };
    let q = [a[0] + t * ab[0], a[1] + t * ab[1]];
    dot(sub(p, q), sub(p, q)).sqrt()
}

/// Signed area of `B(0, r) ∩ triangle(0, a, b)`.
///
/// The segment `ab` is split at its circle crossings: pieces inside the disk
/// contribute a triangle with the origin, pieces outside a circular sector.
fn disk_wedge_area<T: Real>(a: [T; 2], b: [T; 2], r: T) -> T {
    let half = T::lit(0.5);
    let r2 = r * r;
    let sector = |u: [T; 2], v: [T; 2]| half * r2 * cross(u, v).atan2(dot(u, v));
    let tri = |u: [T; 2], v: [T; 2]| half * cross(u, v);

    let d = sub(b, a);
    let qa = dot(d, d);
    if qa == T::zero() {
        return T::zero();
    }
    let qb = dot(a, d);
    let qc = dot(a, a) - r2;
    let disc = qb * qb - qa * qc;
    if disc <= T::zero() {
        return sector(a, b);
    }
    let s = disc.sqrt();
    let t1 = (-qb - s) / qa;
    let t2 = (-qb + s) / qa;
    if t2 <= T::zero() || t1 >= T::one() {
        return sector(a, b);
    }
    let t1 = t1.max(T::zero());
    let t2 = t2.min(T::one());
    let p1 = [a[0] + t1 * d[0], a[1] + t1 * d[1]];
    let p2 = [a[0] + t2 * d[0], a[1] + t2 * d[1]];
    sector(a, p1) + tri(p1, p2) + sector(p2, b)
}

/// A closed Euclidean ball.
#[derive(Debug, Clone, PartialEq)]
pub struct Ball<T> {
    center: Vec<T>,
    radius: T,
}

impl<T: Real> Ball<T> {
    pub fn new(center: Vec<T>, radius: T) -> Result<Self> {
        if center.is_empty() {
            return Err(Error::InvalidDimension(
                "ball dimension must be at least 1".into(),
            ));
        }
        if center.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidShape("ball center is not finite".into()));
        }
        if !(radius > T::zero() && radius.is_finite()) {
            return Err(Error::InvalidShape(format!(
                "ball radius must be positive, got {radius}"
            )));
        }
        Ok(Self { center, radius })
    }

    /// Ball centered at the origin of `R^dim`.
    pub fn centered(dim: usize, radius: T) -> Result<Self> {
        Self::new(vec![T::zero(); dim], radius)
    }

    /// Origin-centered ball of `R^dim` with the given volume.
    pub fn with_volume(dim: usize, volume: T) -> Result<Self> {
        if !(volume > T::zero()) {
            return Err(Error::InvalidShape("ball volume must be positive".into()));
        }
        let w: T = unit_ball_volume(dim)?;
        Self::centered(dim, (volume / w).powf(T::one() / T::from_count(dim)))
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn center(&self) -> &[T] {
        &self.center
    }

    pub fn radius(&self) -> T {
        self.radius
    }

    pub fn volume(&self) -> T {
        let w: T = unit_ball_volume(self.dim()).expect("dim >= 1");
        w * self.radius.powi(self.dim() as i32)
    }

    pub fn distance_to_center(&self, x: &[T]) -> T {
        self.center
            .iter()
            .zip(x)
            .map(|(&c, &v)| (v - c) * (v - c))
            .sum::<T>()
            .sqrt()
    }

    pub fn contains(&self, x: &[T]) -> bool {
        let slack = T::one() + T::epsilon() * T::lit(16.0);
        self.distance_to_center(x) <= self.radius * slack
    }
}

/// Volume of the part of a `d`-ball of radius `rho` beyond a hyperplane at
/// signed distance `a` from its center.
fn cap_volume<T: Real>(d: usize, rho: T, a: T) -> Result<T> {
    let a = a.max(-rho).min(rho);
    if a < T::zero() {
        // Complement of the small cap; avoids cancellation near full volume.
        let full = unit_ball_volume::<T>(d)? * rho.powi(d as i32);
        return Ok((full - cap_volume(d, rho, -a)?).max(T::zero()));
    }
    // Antiderivative of (rho² - t²)^{(d-1)/2}, i.e. the slice measure up to ω_{d-1}.
    let slice_integral = |t: T| -> T {
        let q = (rho * rho - t * t).max(T::zero());
        match d {
            1 => t,
            2 => {
                T::lit(0.5)
                    * (t * q.sqrt() + rho * rho * (t / rho).max(-T::one()).min(T::one()).asin())
            }
            3 => rho * rho * t - t * t * t / T::lit(3.0),
            _ => {
                t / T::lit(8.0) * (T::lit(5.0) * rho * rho - T::lit(2.0) * t * t) * q.sqrt()
                    + T::lit(3.0) / T::lit(8.0)
                        * rho.powi(4)
                        * (t / rho).max(-T::one()).min(T::one()).asin()
            }
        }
    };
    if d == 0 || d > MAX_INTERSECTION_DIM {
        return Err(Error::Unsupported(format!(
            "ball intersection volume in dimension {d} (supported: 1..={MAX_INTERSECTION_DIM})"
        )));
    }
    let slice_scale: T = if d == 1 {
        T::one()
    } else {
        unit_ball_volume(d - 1)?
    };
    Ok((slice_scale * (slice_integral(rho) - slice_integral(a))).max(T::zero()))
}

/// Volume of the intersection of two `d`-balls with radii `r1`, `r2` whose
/// centers are `dist` apart.
pub fn two_ball_intersection<T: Real>(d: usize, r1: T, r2: T, dist: T) -> Result<T> {
    if d == 0 || d > MAX_INTERSECTION_DIM {
        return Err(Error::Unsupported(format!(
            "ball intersection volume in dimension {d} (supported: 1..={MAX_INTERSECTION_DIM})"
        )));
    }
    if dist >= r1 + r2 {
        return Ok(T::zero());
    }
    if dist <= (r1 - r2).abs() {
        let w: T = unit_ball_volume(d)?;
        return Ok(w * r1.min(r2).powi(d as i32));
    }
    let a1 = (dist * dist + r1 * r1 - r2 * r2) / (dist + dist);
    let a2 = dist - a1;
    Ok(cap_volume(d, r1, a1)? + cap_volume(d, r2, a2)?)
}

/// Support description: a convex polygon in the plane or a `d`-ball.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ShapeRepr<T>", into = "ShapeRepr<T>")]
#[serde(bound = "T: Real")]
pub enum Shape<T: Real> {
    ConvexPolygon(ConvexPolygon<T>),
    Ball(Ball<T>),
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
#[serde(bound = "T: Real")]
enum ShapeRepr<T: Real> {
    Polygon {
        vertices: Vec<[T; 2]>,
    },
    Ball {
        dim: usize,
        center: Vec<T>,
        radius: T,
    },
}

impl<T: Real> TryFrom<ShapeRepr<T>> for Shape<T> {
    type Error = Error;

    fn try_from(repr: ShapeRepr<T>) -> Result<Self> {
        match repr {
            ShapeRepr::Polygon { vertices } => {
                Ok(Shape::ConvexPolygon(ConvexPolygon::new(vertices)?))
            }
            ShapeRepr::Ball {
                dim,
                center,
                radius,
            } => {
                if center.len() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        got: center.len(),
                    });
                }
                Ok(Shape::Ball(Ball::new(center, radius)?))
            }
        }
    }
}

impl<T: Real> From<Shape<T>> for ShapeRepr<T> {
    fn from(shape: Shape<T>) -> Self {
        match shape {
            Shape::ConvexPolygon(p) => ShapeRepr::Polygon {
                vertices: p.vertices,
            },
            Shape::Ball(b) => ShapeRepr::Ball {
                dim: b.dim(),
                center: b.center,
                radius: b.radius,
            },
        }
    }
}

impl<T: Real> Shape<T> {
    pub fn polygon(vertices: Vec<[T; 2]>) -> Result<Self> {
        Ok(Shape::ConvexPolygon(ConvexPolygon::new(vertices)?))
    }

    pub fn ball(center: Vec<T>, radius: T) -> Result<Self> {
        Ok(Shape::Ball(Ball::new(center, radius)?))
    }

    /// `[0, 1]^2`.
    pub fn unit_square() -> Self {
        let (o, l) = (T::zero(), T::one());
        Shape::polygon(vec![[o, o], [l, o], [l, l], [o, l]]).expect("unit square is valid")
    }

    pub fn dim(&self) -> usize {
        match self {
            Shape::ConvexPolygon(_) => 2,
            Shape::Ball(b) => b.dim(),
        }
    }

    /// Lebesgue measure.
    pub fn area(&self) -> T {
        match self {
            Shape::ConvexPolygon(p) => p.area(),
            Shape::Ball(b) => b.volume(),
        }
    }

    pub fn contains(&self, x: &[T]) -> bool {
        if x.len() != self.dim() {
            return false;
        }
        match self {
            Shape::ConvexPolygon(p) => p.contains([x[0], x[1]]),
            Shape::Ball(b) => b.contains(x),
        }
    }

    pub fn diameter(&self) -> T {
        match self {
            Shape::ConvexPolygon(p) => p.diameter(),
            Shape::Ball(b) => b.radius() + b.radius(),
        }
    }

    /// Axis-aligned bounding box as `(lower, upper)` corners.
    pub fn bounding_box(&self) -> (Vec<T>, Vec<T>) {
        match self {
            Shape::ConvexPolygon(p) => {
                let mut lo = vec![T::infinity(); 2];
                let mut hi = vec![T::neg_infinity(); 2];
                for v in p.vertices() {
                    for k in 0..2 {
                        lo[k] = lo[k].min(v[k]);
                        hi[k] = hi[k].max(v[k]);
                    }
                }
                (lo, hi)
            }
            Shape::Ball(b) => (
                b.center().iter().map(|&c| c - b.radius()).collect(),
                b.center().iter().map(|&c| c + b.radius()).collect(),
            ),
        }
    }
}

/// Regular polygon centered at the origin with a horizontal bottom edge and
/// the requested area.
pub fn make_regular_polygon<T: Real>(sides: usize, target_area: T) -> Result<Shape<T>> {
    if !matches!(sides, 3 | 4 | 6) {
        return Err(Error::Unsupported(format!(
            "regular polygon with {sides} sides (supported: 3, 4, 6)"
        )));
    }
    if !(target_area > T::zero() && target_area.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "target area must be positive, got {target_area}"
        )));
    }
    let k = T::from_count(sides);
    let two_pi = T::PI() + T::PI();
    // area = (k/2) R² sin(2π/k)
    let circumradius = (T::lit(2.0) * target_area / (k * (two_pi / k).sin())).sqrt();
    let start = -T::FRAC_PI_2() + T::PI() / k;
    let vertices = (0..sides)
        .map(|i| {
            let angle = start + two_pi * T::from_count(i) / k;
            [circumradius * angle.cos(), circumradius * angle.sin()]
        })
        .collect();
    Shape::polygon(vertices)
}

/// Smallest interior angle of a polygon.
pub fn min_interior_angle<T: Real>(shape: &Shape<T>) -> Result<T> {
    match shape {
        Shape::ConvexPolygon(p) => Ok(p.min_interior_angle()),
        Shape::Ball(_) => Err(Error::NotAPolygon),
    }
}

/// Exact Lebesgue measure of `B(x, r) ∩ shape` (closed ball).
pub fn ball_shape_intersection<T: Real>(shape: &Shape<T>, x: &[T], r: T) -> Result<T> {
    if x.len() != shape.dim() {
        return Err(Error::DimensionMismatch {
            expected: shape.dim(),
            got: x.len(),
        });
    }
    if !(r > T::zero()) {
        return Err(Error::InvalidArgument(format!(
            "radius must be positive, got {r}"
        )));
    }
    match shape {
        Shape::ConvexPolygon(p) => Ok(p.disk_intersection_area([x[0], x[1]], r)),
        Shape::Ball(b) => two_ball_intersection(b.dim(), b.radius(), r, b.distance_to_center(x)),
    }
}

/// Closed-form standardness constant, when one is known for `dist`.
///
/// Uniform law on a convex polygon: smallest interior angle over `2π·area`.
/// Uniform law on a ball: `1 / (2·volume)`. The fixed radial combination law
/// on the unit disk: `1 / (4π)`. `None` means no closed form is available and
/// a numeric oracle should be used instead.
pub fn analytic_upsilon<T: Real>(dist: &Distribution<T>) -> Option<T> {
    match dist {
        Distribution::UniformOnShape(Shape::ConvexPolygon(p)) => {
            Some(p.min_interior_angle() / (T::lit(2.0) * T::PI() * p.area()))
        }
        Distribution::UniformOnShape(Shape::Ball(b)) => Some(T::one() / (T::lit(2.0) * b.volume())),
        Distribution::RadialCombination => Some(T::one() / (T::lit(4.0) * T::PI())),
        Distribution::RadialScaledSum => None,
    }
}
