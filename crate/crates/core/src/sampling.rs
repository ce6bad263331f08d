//! Seeded samplers and ball-mass queries for the supported laws.
//!
//! # Stream derivation
//!
//! Every random stream is a ChaCha20 generator (`rand_chacha` 0.9) keyed by
//! `seed_from_u64(master_seed)`, with its 64-bit stream selector set to
//! `(cell_index << 32) | replication_index`. Distinct `(cell, replication)`
//! pairs therefore select disjoint keystreams of the same key, and a given
//! pair always reproduces the same bytes independently of scheduling. The
//! scheme is versioned by [`STREAM_SCHEME_VERSION`]; changing the generator,
//! the crate versions or the selector layout must bump it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::{GridIndex, SampleCloud};
use crate::geometry::{ball_shape_intersection, Ball, ConvexPolygon, Shape};
use crate::scalar::Real;

/// Identifies the stream-derivation rule documented at module level.
pub const STREAM_SCHEME_VERSION: &str = "chacha20-stream-v1";

/// Cell index reserved for the Monte Carlo ball-mass stream.
pub const BALL_MASS_CELL: u32 = u32::MAX;

/// Minimum Monte Carlo budget accepted by [`nu_ball`] for laws without a
/// closed-form ball mass.
pub const MIN_MC_BUDGET: usize = 10_000;

/// Master seed from which all per-cell, per-replication streams derive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedSpec {
    pub master_seed: u64,
}

impl SeedSpec {
    pub fn new(master_seed: u64) -> Self {
        Self { master_seed }
    }

    /// Stream selector for `(cell, replication)`. Injective.
    pub fn child_seed(cell: u32, replication: u32) -> u64 {
        (u64::from(cell) << 32) | u64::from(replication)
    }

    pub fn stream(&self, cell: u32, replication: u32) -> Stream {
        let mut rng = ChaCha20Rng::seed_from_u64(self.master_seed);
        rng.set_stream(Self::child_seed(cell, replication));
        Stream { rng }
    }
}

/// An owned random stream. Move it between threads, never share it.
#[derive(Debug, Clone)]
pub struct Stream {
    rng: ChaCha20Rng,
}

impl Stream {
    /// Uniform on `[0, 1)`.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    #[inline]
    pub fn normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }
}

/// A sampleable probability law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "DistributionRepr<T>", into = "DistributionRepr<T>")]
#[serde(bound = "T: Real")]
pub enum Distribution<T: Real> {
    /// Normalized Lebesgue measure on a shape.
    UniformOnShape(Shape<T>),
    /// Mixture on the unit disk: with probability 1/4 draw
    /// `Y₁ = √R (cos θ, sin θ)` (uniform on the disk), otherwise
    /// `Y₂ = R^{1/4} (cos θ, sin θ)`, with `R ~ U[0,1]`, `θ ~ U[0,2π]`.
    /// Its density `1/(4π) + 3|y|²/(2π)` has an antimode at the origin.
    RadialCombination,
    /// The scaled sum `(Y₁ + 3Y₂)/4` of independent `Y₁`, `Y₂` as above.
    /// Supported on the unit disk, but its density vanishes on the boundary
    /// circle, so no positive closed-form constant is attached to it.
    RadialScaledSum,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
#[serde(bound = "T: Real")]
enum DistributionRepr<T: Real> {
    Uniform { shape: Shape<T> },
    RadialCombination,
    RadialScaledSum,
}

impl<T: Real> From<DistributionRepr<T>> for Distribution<T> {
    fn from(repr: DistributionRepr<T>) -> Self {
        match repr {
            DistributionRepr::Uniform { shape } => Distribution::UniformOnShape(shape),
            DistributionRepr::RadialCombination => Distribution::RadialCombination,
            DistributionRepr::RadialScaledSum => Distribution::RadialScaledSum,
        }
    }
}

impl<T: Real> From<Distribution<T>> for DistributionRepr<T> {
    fn from(dist: Distribution<T>) -> Self {
        match dist {
            Distribution::UniformOnShape(shape) => DistributionRepr::Uniform { shape },
            Distribution::RadialCombination => DistributionRepr::RadialCombination,
            Distribution::RadialScaledSum => DistributionRepr::RadialScaledSum,
        }
    }
}

impl<T: Real> Distribution<T> {
    pub fn dim(&self) -> usize {
        match self {
            Distribution::UniformOnShape(shape) => shape.dim(),
            Distribution::RadialCombination | Distribution::RadialScaledSum => 2,
        }
    }
}

/// Closed support of `dist`.
pub fn support<T: Real>(dist: &Distribution<T>) -> Shape<T> {
    match dist {
        Distribution::UniformOnShape(shape) => shape.clone(),
        Distribution::RadialCombination | Distribution::RadialScaledSum => {
            Shape::Ball(Ball::centered(2, T::one()).expect("unit disk"))
        }
    }
}

/// Draws `n` i.i.d. points from `dist`.
pub fn sample<T: Real>(
    dist: &Distribution<T>,
    n: usize,
    stream: &mut Stream,
) -> Result<SampleCloud<T>> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "sample size must be at least 1".into(),
        ));
    }
    let d = dist.dim();
    let mut data = Vec::with_capacity(n * d);
    match dist {
        Distribution::UniformOnShape(Shape::ConvexPolygon(p)) => {
            let fan = TriangleFan::new(p);
            for _ in 0..n {
                let [x, y] = fan.draw(stream);
                data.push(T::lit(x));
                data.push(T::lit(y));
            }
        }
        Distribution::UniformOnShape(Shape::Ball(b)) => {
            let center: Vec<f64> = b.center().iter().map(|c| c.as_f64()).collect();
            let radius = b.radius().as_f64();
            let mut dir = vec![0.0; d];
            for _ in 0..n {
                draw_in_ball(stream, &center, radius, &mut dir);
                data.extend(dir.iter().map(|&v| T::lit(v)));
            }
        }
        Distribution::RadialCombination | Distribution::RadialScaledSum => {
            let draw = if matches!(dist, Distribution::RadialCombination) {
                draw_radial_mixture
            } else {
                draw_radial_sum
            };
            for _ in 0..n {
                let [x, y] = draw(stream);
                data.push(T::lit(x));
                data.push(T::lit(y));
            }
        }
    }
    SampleCloud::from_flat(d, data)
}

/// Fan triangulation from the vertex average, with cumulative areas for
/// area-proportional triangle selection.
struct TriangleFan {
    apex: [f64; 2],
    rim: Vec<([f64; 2], [f64; 2])>,
    cumulative: Vec<f64>,
}

impl TriangleFan {
    fn new<T: Real>(p: &ConvexPolygon<T>) -> Self {
        let c = p.centroid();
        let apex = [c[0].as_f64(), c[1].as_f64()];
        let mut rim = Vec::with_capacity(p.len());
        let mut cumulative = Vec::with_capacity(p.len());
        let mut acc = 0.0;
        for i in 0..p.len() {
            let (a, b) = p.edge(i);
            let a = [a[0].as_f64(), a[1].as_f64()];
            let b = [b[0].as_f64(), b[1].as_f64()];
            let area =
                0.5 * ((a[0] - apex[0]) * (b[1] - apex[1]) - (a[1] - apex[1]) * (b[0] - apex[0]));
            acc += area;
            rim.push((a, b));
            cumulative.push(acc);
        }
        Self {
            apex,
            rim,
            cumulative,
        }
    }

    fn draw(&self, stream: &mut Stream) -> [f64; 2] {
        let total = *self.cumulative.last().expect("non-empty fan");
        let pick = stream.uniform() * total;
        let idx = self
            .cumulative
            .partition_point(|&c| c <= pick)
            .min(self.rim.len() - 1);
        let (a, b) = self.rim[idx];
        let su = stream.uniform().sqrt();
        let v = stream.uniform();
        // barycentric (1 - √u, √u (1 - v), √u v)
        let (wa, wb, wc) = (1.0 - su, su * (1.0 - v), su * v);
        [
            wa * self.apex[0] + wb * a[0] + wc * b[0],
            wa * self.apex[1] + wb * a[1] + wc * b[1],
        ]
    }
}

fn draw_in_ball(stream: &mut Stream, center: &[f64], radius: f64, out: &mut [f64]) {
    let d = center.len();
    let norm = loop {
        for v in out.iter_mut() {
            *v = stream.normal();
        }
        let norm = out.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            break norm;
        }
    };
    let rho = radius * stream.uniform().powf(1.0 / d as f64);
    for (v, c) in out.iter_mut().zip(center) {
        *v = c + rho * *v / norm;
    }
}

fn draw_radial_mixture(stream: &mut Stream) -> [f64; 2] {
    let pick = stream.uniform();
    let theta = 2.0 * std::f64::consts::PI * stream.uniform();
    let u = stream.uniform();
    let rho = if pick < 0.25 { u.sqrt() } else { u.powf(0.25) };
    [rho * theta.cos(), rho * theta.sin()]
}

fn draw_radial_sum(stream: &mut Stream) -> [f64; 2] {
    let two_pi = 2.0 * std::f64::consts::PI;
    let theta1 = two_pi * stream.uniform();
    let theta2 = two_pi * stream.uniform();
    let r1 = stream.uniform().sqrt();
    let r2 = stream.uniform().powf(0.25);
    [
        0.25 * (r1 * theta1.cos() + 3.0 * r2 * theta2.cos()),
        0.25 * (r1 * theta1.sin() + 3.0 * r2 * theta2.sin()),
    ]
}

/// `ν(B(x, r))` with its standard error (zero when exact).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BallMass<T> {
    pub value: T,
    pub std_error: T,
}

/// Evaluates `ν(B(x, r))` at many centers for a fixed radius.
///
/// Uniform laws use the exact intersection measure. The radial laws draw `mc_budget` points once from the reserved stream of `seed` and
/// counts them with a grid index, so all centers share the same draws.
pub struct BallMassEvaluator<T: Real> {
    r: T,
    kind: EvaluatorKind<T>,
}

enum EvaluatorKind<T: Real> {
    Exact { shape: Shape<T>, area: T },
    MonteCarlo { grid: GridIndex<T>, budget: usize },
}

impl<T: Real> BallMassEvaluator<T> {
    pub fn new(dist: &Distribution<T>, r: T, mc_budget: usize, seed: SeedSpec) -> Result<Self> {
        if !(r > T::zero() && r.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "radius must be positive, got {r}"
            )));
        }
        let kind = match dist {
            Distribution::UniformOnShape(shape) => EvaluatorKind::Exact {
                shape: shape.clone(),
                area: shape.area(),
            },
            Distribution::RadialCombination | Distribution::RadialScaledSum => {
                if mc_budget < MIN_MC_BUDGET {
                    return Err(Error::BudgetTooSmall {
                        budget: mc_budget,
                        min: MIN_MC_BUDGET,
                    });
                }
                let mut stream = seed.stream(BALL_MASS_CELL, 0);
                let cloud = sample(dist, mc_budget, &mut stream)?;
                EvaluatorKind::MonteCarlo {
                    grid: GridIndex::build(&cloud, r)?,
                    budget: mc_budget,
                }
            }
        };
        Ok(Self { r, kind })
    }

    pub fn radius(&self) -> T {
        self.r
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.kind, EvaluatorKind::Exact { .. })
    }

    pub fn eval(&self, x: &[T]) -> Result<BallMass<T>> {
        match &self.kind {
            EvaluatorKind::Exact { shape, area } => Ok(BallMass {
                value: (ball_shape_intersection(shape, x, self.r)? / *area).min(T::one()),
                std_error: T::zero(),
            }),
            EvaluatorKind::MonteCarlo { grid, budget } => {
                let hits = grid.count_within(x, self.r)?;
                let n = T::from_count(*budget);
                let p = T::from_count(hits) / n;
                Ok(BallMass {
                    value: p,
                    std_error: (p * (T::one() - p) / n).sqrt(),
                })
            }
        }
    }
}

/// Default seed of the ball-mass Monte Carlo stream.
pub const DEFAULT_BALL_MASS_SEED: u64 = 0x5eed_ba11;

/// `ν(B(x, r))` for a single center.
pub fn nu_ball<T: Real>(
    dist: &Distribution<T>,
    x: &[T],
    r: T,
    mc_budget: usize,
) -> Result<BallMass<T>> {
    if x.len() != dist.dim() {
        return Err(Error::DimensionMismatch {
            expected: dist.dim(),
            got: x.len(),
        });
    }
    BallMassEvaluator::new(dist, r, mc_budget, SeedSpec::new(DEFAULT_BALL_MASS_SEED))?.eval(x)
}
