//! Numeric ground truth for the standardness constant.
//!
//! For a radius `r` the oracle minimizes the ball fraction
//! `ν(B(x, r)) / (ω_d r^d)` over a deterministic probe set in the support: a
//! dense boundary sweep, an interior lattice, and local refinement around the
//! best probe. As `r → 0` the minimum converges to `Υ(S, ν)`, and
//! `Ω(r) = |min − Υ|` measures the gap at a finite radius.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{unit_ball_volume, Shape};
use crate::sampling::{support, BallMassEvaluator, Distribution, SeedSpec};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleConfig {
    /// Probes on the boundary (at least 100).
    pub boundary_grid: usize,
    /// Interior lattice points per axis (at least 20).
    pub interior_grid: usize,
    /// Local refinement rounds.
    pub refine_iters: usize,
    /// Monte Carlo draws for laws without exact ball masses (at least 10⁴).
    pub mc_budget: usize,
    /// Seed of the Monte Carlo stream and of randomized boundary directions.
    pub seed: u64,
    /// Gap below which a Monte Carlo `Ω(r)` is indistinguishable from zero.
    /// Exact ball masses use a rounding-level floor instead.
    pub noise_floor: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            boundary_grid: 2000,
            interior_grid: 50,
            refine_iters: 3,
            mc_budget: 200_000,
            seed: 0x0c1e,
            noise_floor: 5e-3,
        }
    }
}

impl OracleConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if self.boundary_grid < 100 {
            return bad(format!(
                "boundary_grid must be at least 100, got {}",
                self.boundary_grid
            ));
        }
        if self.interior_grid < 20 {
            return bad(format!(
                "interior_grid must be at least 20, got {}",
                self.interior_grid
            ));
        }
        if self.mc_budget < 10_000 {
            return bad(format!(
                "mc_budget must be at least 10000, got {}",
                self.mc_budget
            ));
        }
        if !(self.noise_floor >= 0.0 && self.noise_floor.is_finite()) {
            return bad(format!(
                "noise_floor must be non-negative, got {}",
                self.noise_floor
            ));
        }
        Ok(())
    }
}

/// Minimum ball fraction at one radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinBallFraction<T> {
    pub value: T,
    pub argmin: Vec<T>,
    /// Standard error of `value` (zero on the exact path).
    pub std_error: T,
    pub probes: usize,
}

impl<T: Real> MinBallFraction<T> {
    /// `value ± 3·std_error`.
    pub fn interval(&self) -> (T, T) {
        let half = T::lit(3.0) * self.std_error;
        (self.value - half, self.value + half)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OmegaCurve<T> {
    pub radii: Vec<T>,
    pub omega_values: Vec<T>,
    /// Full oracle result per radius; the argmins trace `x_r`.
    pub fractions: Vec<MinBallFraction<T>>,
    /// Least-squares slope of `ln Ω` on `ln r` over points above the noise
    /// floor; `None` with fewer than three such points.
    pub slope: Option<T>,
}

impl<T> OmegaCurve<T> {
    /// Trajectory of minimizers `x_r`, one per radius.
    pub fn argmins(&self) -> impl Iterator<Item = &[T]> + '_ {
        self.fractions.iter().map(|m| m.argmin.as_slice())
    }
}

#[derive(Debug, Clone)]
struct Probe<T> {
    x: Vec<T>,
    value: T,
    std_error: T,
    /// Boundary parameter for polygons (arclength) and disks (angle).
    boundary_param: Option<T>,
}

fn better<T: Real>(a: &Probe<T>, b: &Probe<T>) -> bool {
    match a.value.partial_cmp(&b.value) {
        Some(Ordering::Less) => true,
        Some(Ordering::Equal) => lex_less(&a.x, &b.x),
        _ => false,
    }
}

fn lex_less<T: Real>(a: &[T], b: &[T]) -> bool {
    for (x, y) in a.iter().zip(b) {
        match x.partial_cmp(y) {
            Some(Ordering::Less) => return true,
            Some(Ordering::Greater) => return false,
            _ => {}
        }
    }
    false
}

struct Objective<'a, T: Real> {
    masses: &'a BallMassEvaluator<T>,
    scale: T,
    shape: &'a Shape<T>,
}

impl<T: Real> Objective<'_, T> {
    fn probe(&self, x: Vec<T>, boundary_param: Option<T>) -> Result<Probe<T>> {
        let m = self.masses.eval(&x)?;
        Ok(Probe {
            x,
            value: m.value / self.scale,
            std_error: m.std_error / self.scale,
            boundary_param,
        })
    }

    fn best_of(&self, candidates: Vec<(Vec<T>, Option<T>)>) -> Result<Option<Probe<T>>> {
        let probes = candidates
            .into_par_iter()
            .map(|(x, s)| self.probe(x, s))
            .collect::<Result<Vec<_>>>()?;
        Ok(probes
            .into_iter()
            .reduce(|a, b| if better(&b, &a) { b } else { a }))
    }

    /// Maps a boundary parameter to a point, for supports that have one.
    fn boundary_at(&self, s: T) -> Option<Vec<T>> {
        match self.shape {
            Shape::ConvexPolygon(p) => Some(p.boundary_point(s).to_vec()),
            Shape::Ball(b) if b.dim() == 2 => {
                let c = b.center();
                Some(vec![
                    c[0] + b.radius() * s.cos(),
                    c[1] + b.radius() * s.sin(),
                ])
            }
            Shape::Ball(_) => None,
        }
    }

    /// Pulls `x` back into the closed support, or rejects it.
    fn project(&self, mut x: Vec<T>) -> Option<Vec<T>> {
        match self.shape {
            Shape::ConvexPolygon(_) => self.shape.contains(&x).then_some(x),
            Shape::Ball(b) => {
                let dist = b.distance_to_center(&x);
                if dist > b.radius() {
                    let f = b.radius() / dist;
                    for (v, &c) in x.iter_mut().zip(b.center()) {
                        *v = c + (*v - c) * f;
                    }
                }
                Some(x)
            }
        }
    }
}

/// Boundary sweep: polygon vertices plus equally spaced arclength stations,
/// equally spaced angles on a disk, the two endpoints of a segment, or
/// seeded uniform directions on higher-dimensional spheres.
fn boundary_probes<T: Real>(shape: &Shape<T>, count: usize, seed: u64) -> Vec<(Vec<T>, Option<T>)> {
    match shape {
        Shape::ConvexPolygon(p) => {
            let perimeter = p.perimeter();
            let mut out: Vec<(Vec<T>, Option<T>)> = Vec::with_capacity(count + p.len());
            let mut s = T::zero();
            for i in 0..p.len() {
                out.push((p.vertices()[i].to_vec(), Some(s)));
                let (a, b) = p.edge(i);
                s = s + ((b[0] - a[0]) * (b[0] - a[0]) + (b[1] - a[1]) * (b[1] - a[1])).sqrt();
            }
            for k in 0..count {
                let s = perimeter * T::from_count(k) / T::from_count(count);
                out.push((p.boundary_point(s).to_vec(), Some(s)));
            }
            out
        }
        Shape::Ball(b) if b.dim() == 1 => {
            let c = b.center()[0];
            vec![(vec![c - b.radius()], None), (vec![c + b.radius()], None)]
        }
        Shape::Ball(b) if b.dim() == 2 => {
            let two_pi = T::PI() + T::PI();
            (0..count)
                .map(|k| {
                    let t = two_pi * T::from_count(k) / T::from_count(count);
                    let c = b.center();
                    (
                        vec![c[0] + b.radius() * t.cos(), c[1] + b.radius() * t.sin()],
                        Some(t),
                    )
                })
                .collect()
        }
        Shape::Ball(b) => {
            let mut stream = SeedSpec::new(seed).stream(u32::MAX - 1, 0);
            (0..count)
                .map(|_| {
                    let dir: Vec<f64> = loop {
                        let g: Vec<f64> = (0..b.dim()).map(|_| stream.normal()).collect();
                        let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
                        if norm > 0.0 {
                            break g.into_iter().map(|v| v / norm).collect();
                        }
                    };
                    let x = b
                        .center()
                        .iter()
                        .zip(&dir)
                        .map(|(&c, &u)| c + b.radius() * T::lit(u))
                        .collect();
                    (x, None)
                })
                .collect()
        }
    }
}

/// Cell-centered lattice over the bounding box, restricted to the support.
/// The per-axis resolution shrinks in dimensions above two so the total stays
/// near `interior_grid²`.
fn interior_probes<T: Real>(shape: &Shape<T>, interior_grid: usize) -> (Vec<Vec<T>>, T) {
    let d = shape.dim();
    let per_axis = if d <= 2 {
        interior_grid
    } else {
        ((interior_grid as f64).powf(2.0 / d as f64).round() as usize).max(3)
    };
    let (lo, hi) = shape.bounding_box();
    let steps: Vec<T> = lo
        .iter()
        .zip(&hi)
        .map(|(&l, &h)| (h - l) / T::from_count(per_axis))
        .collect();
    let mut out = Vec::new();
    let total = per_axis.pow(d as u32);
    for idx in 0..total {
        let mut rem = idx;
        let x: Vec<T> = (0..d)
            .map(|k| {
                let i = rem % per_axis;
                rem /= per_axis;
                lo[k] + steps[k] * (T::from_count(i) + T::lit(0.5))
            })
            .collect();
        if shape.contains(&x) {
            out.push(x);
        }
    }
    let spacing = steps.iter().copied().fold(T::zero(), T::max);
    (out, spacing)
}

/// `min_x ν(B(x, r)) / (ω_d r^d)` over the probe set.
pub fn min_ball_fraction<T: Real>(
    dist: &Distribution<T>,
    r: T,
    cfg: &OracleConfig,
) -> Result<MinBallFraction<T>> {
    cfg.validate()?;
    let shape = support(dist);
    let diameter = shape.diameter();
    if !(r > T::zero()) || r >= diameter {
        return Err(Error::RadiusOutOfRange {
            r: r.as_f64(),
            diameter: diameter.as_f64(),
        });
    }
    let d = shape.dim();
    let w: T = unit_ball_volume(d)?;
    let masses = BallMassEvaluator::new(dist, r, cfg.mc_budget, SeedSpec::new(cfg.seed))?;
    let objective = Objective {
        masses: &masses,
        scale: w * r.powi(d as i32),
        shape: &shape,
    };

    let boundary = boundary_probes(&shape, cfg.boundary_grid, cfg.seed);
    let boundary_spacing = match &shape {
        Shape::ConvexPolygon(p) => p.perimeter() / T::from_count(cfg.boundary_grid),
        Shape::Ball(_) => (T::PI() + T::PI()) / T::from_count(cfg.boundary_grid),
    };
    let (interior, lattice_spacing) = interior_probes(&shape, cfg.interior_grid);
    let mut probes = boundary.len() + interior.len();
    let mut candidates = boundary;
    candidates.extend(interior.into_iter().map(|x| (x, None)));
    let mut best = objective
        .best_of(candidates)?
        .ok_or_else(|| Error::InvalidArgument("empty probe set".into()))?;

    // Golden-section search along the boundary around a boundary winner.
    if let Some(s0) = best.boundary_param {
        let phi = T::lit(0.618_033_988_749_894_9);
        let (mut a, mut b) = (s0 - boundary_spacing, s0 + boundary_spacing);
        for _ in 0..cfg.refine_iters * 8 {
            let c = b - phi * (b - a);
            let e = a + phi * (b - a);
            let (Some(xc), Some(xe)) = (objective.boundary_at(c), objective.boundary_at(e)) else {
                break;
            };
            let pc = objective.probe(xc, Some(c))?;
            let pe = objective.probe(xe, Some(e))?;
            probes += 2;
            if pc.value <= pe.value {
                b = e;
                if better(&pc, &best) {
                    best = pc;
                }
            } else {
                a = c;
                if better(&pe, &best) {
                    best = pe;
                }
            }
        }
    }

    // Compass search in the ambient coordinates.
    let mut step = lattice_spacing / T::lit(2.0);
    for _ in 0..cfg.refine_iters {
        let mut moves = Vec::with_capacity(2 * d);
        for k in 0..d {
            for sign in [-T::one(), T::one()] {
                let mut x = best.x.clone();
                x[k] = x[k] + sign * step;
                if let Some(x) = objective.project(x) {
                    moves.push((x, None));
                }
            }
        }
        probes += moves.len();
        if let Some(p) = objective.best_of(moves)? {
            if better(&p, &best) {
                best = p;
            }
        }
        step = step / T::lit(2.0);
    }

    Ok(MinBallFraction {
        value: best.value,
        argmin: best.x,
        std_error: best.std_error,
        probes,
    })
}

/// Floor on `Ω(r)` when ball masses are exact.
pub const EXACT_NOISE_FLOOR: f64 = 1e-9;

/// `Ω(r) = |min_ball_fraction(r) − Υ|`.
pub fn omega<T: Real>(
    dist: &Distribution<T>,
    r: T,
    upsilon_true: T,
    cfg: &OracleConfig,
) -> Result<T> {
    Ok((min_ball_fraction(dist, r, cfg)?.value - upsilon_true).abs())
}

/// `Ω` along strictly decreasing radii, with its log-log slope.
pub fn omega_curve<T: Real>(
    dist: &Distribution<T>,
    radii: &[T],
    upsilon_true: T,
    cfg: &OracleConfig,
) -> Result<OmegaCurve<T>> {
    if radii.is_empty() {
        return Err(Error::InvalidArgument("no radii given".into()));
    }
    if radii.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidArgument(
            "radii must be strictly decreasing".into(),
        ));
    }
    let mut omega_values = Vec::with_capacity(radii.len());
    let mut fractions = Vec::with_capacity(radii.len());
    let mut usable = Vec::with_capacity(radii.len());
    for &r in radii {
        let m = min_ball_fraction(dist, r, cfg)?;
        let o = (m.value - upsilon_true).abs();
        let floor = if m.std_error > T::zero() {
            T::lit(cfg.noise_floor).max(T::lit(3.0) * m.std_error)
        } else {
            T::lit(EXACT_NOISE_FLOOR)
        };
        if o > floor {
            usable.push((r.ln(), o.ln()));
        }
        omega_values.push(o);
        fractions.push(m);
    }
    let slope = least_squares_slope(&usable);
    Ok(OmegaCurve {
        radii: radii.to_vec(),
        omega_values,
        fractions,
        slope,
    })
}

fn least_squares_slope<T: Real>(points: &[(T, T)]) -> Option<T> {
    if points.len() < 3 {
        return None;
    }
    let n = T::from_count(points.len());
    let mx = points.iter().map(|p| p.0).sum::<T>() / n;
    let my = points.iter().map(|p| p.1).sum::<T>() / n;
    let sxy: T = points.iter().map(|&(x, y)| (x - mx) * (y - my)).sum();
    let sxx: T = points.iter().map(|&(x, _)| (x - mx) * (x - mx)).sum();
    (sxx > T::zero()).then(|| sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{make_regular_polygon, Ball};

    fn uniform(shape: Shape<f64>) -> Distribution<f64> {
        Distribution::UniformOnShape(shape)
    }

    #[test]
    fn config_bounds() {
        assert!(OracleConfig::default().validate().is_ok());
        for cfg in [
            OracleConfig {
                boundary_grid: 99,
                ..Default::default()
            },
            OracleConfig {
                interior_grid: 19,
                ..Default::default()
            },
            OracleConfig {
                mc_budget: 9_999,
                ..Default::default()
            },
        ] {
            assert!(cfg.validate().is_err());
        }
    }

    #[test]
    fn square_corner_minimum() {
        let m = min_ball_fraction(
            &uniform(Shape::unit_square()),
            0.02,
            &OracleConfig::default(),
        )
        .unwrap();
        assert!((m.value - 0.25).abs() < 5e-3);
        let corner_dist = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]
            .iter()
            .map(|c: &[f64; 2]| {
                ((c[0] - m.argmin[0]).powi(2) + (c[1] - m.argmin[1]).powi(2)).sqrt()
            })
            .fold(f64::INFINITY, f64::min);
        assert!(corner_dist < 0.04);
        assert_eq!(m.std_error, 0.0);
    }

    #[test]
    fn disk_boundary_minimum() {
        let disk = Shape::Ball(Ball::with_volume(2, 1.0).unwrap());
        let m = min_ball_fraction(&uniform(disk), 0.01, &OracleConfig::default()).unwrap();
        assert!((m.value - 0.5).abs() < 5e-3, "{}", m.value);
        assert!(m.value < 0.5);
    }

    #[test]
    fn triangle_minimum() {
        let tri = make_regular_polygon(3, 1.0).unwrap();
        let m = min_ball_fraction(&uniform(tri), 0.02, &OracleConfig::default()).unwrap();
        assert!((m.value - 1.0 / 6.0).abs() < 5e-3);
    }

    #[test]
    fn radius_out_of_range() {
        let err = min_ball_fraction(
            &uniform(Shape::unit_square()),
            2.0,
            &OracleConfig::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::RadiusOutOfRange { .. }));
    }

    #[test]
    fn repeated_calls_identical() {
        let hex = uniform(make_regular_polygon(6, 1.0).unwrap());
        let a = min_ball_fraction(&hex, 0.05, &OracleConfig::default()).unwrap();
        let b = min_ball_fraction(&hex, 0.05, &OracleConfig::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn omega_on_square_vanishes() {
        let o = omega(
            &uniform(Shape::unit_square()),
            0.02,
            0.25,
            &OracleConfig::default(),
        )
        .unwrap();
        assert!(o <= 5e-3);
    }

    #[test]
    fn curve_validation() {
        let sq = uniform(Shape::unit_square());
        let cfg = OracleConfig::default();
        assert!(omega_curve(&sq, &[], 0.25, &cfg).is_err());
        assert!(omega_curve(&sq, &[0.05, 0.1], 0.25, &cfg).is_err());
        let single = omega_curve(&sq, &[0.1], 0.25, &cfg).unwrap();
        assert_eq!(single.omega_values.len(), 1);
        assert_eq!(single.slope, None);
    }

    #[test]
    fn slope_of_exact_power_law() {
        let pts: Vec<(f64, f64)> = [0.1f64, 0.05, 0.025]
            .iter()
            .map(|&r| (r.ln(), (3.0 * r * r).ln()))
            .collect();
        assert!((least_squares_slope(&pts).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(least_squares_slope(&pts[..2]), None);
    }

    #[test]
    fn radial_mixture_interval() {
        let dist = Distribution::<f64>::RadialCombination;
        let cfg = OracleConfig {
            boundary_grid: 200,
            interior_grid: 20,
            ..Default::default()
        };
        let m = min_ball_fraction(&dist, 0.2, &cfg).unwrap();
        let (lo, hi) = m.interval();
        assert!(lo < hi);
        assert!(m.std_error > 0.0);
    }
}
