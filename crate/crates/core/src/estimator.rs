//! Plug-in and bias-corrected standardness estimators.
//!
//! Both estimators reduce to closed-ball neighbor counts
//! `#{i : ‖X_i − X_j‖ ≤ r}` (self included) over the sample. Counting uses a
//! uniform grid with cell size `r`: every neighbor of a point lies in one of
//! the `3^d` cells around its own, and each unordered cell pair is visited
//! once so that every point pair is tested once.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::unit_ball_volume;
use crate::scalar::Real;

/// `n` points in `R^d`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleCloud<T> {
    d: usize,
    data: Vec<T>,
}

impl<T: Real> SampleCloud<T> {
    pub fn new(points: Vec<Vec<T>>) -> Result<Self> {
        let d = points.first().map(Vec::len).unwrap_or(0);
        if let Some(bad) = points.iter().find(|p| p.len() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: bad.len(),
            });
        }
        Self::from_flat(d, points.into_iter().flatten().collect())
    }

    pub fn from_flat(d: usize, data: Vec<T>) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidDimension(
                "points must have at least one coordinate".into(),
            ));
        }
        if data.is_empty() {
            return Err(Error::InvalidArgument(
                "sample cloud needs at least one point".into(),
            ));
        }
        if !data.len().is_multiple_of(d) {
            return Err(Error::InvalidArgument(format!(
                "{} coordinates do not split into points of dimension {d}",
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "non-finite coordinate in point {}",
                pos / d
            )));
        }
        Ok(Self { d, data })
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.d
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn point(&self, i: usize) -> &[T] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[T]> + '_ {
        self.data.chunks_exact(self.d)
    }

    pub fn as_flat(&self) -> &[T] {
        &self.data
    }

    pub fn translated(&self, offset: &[T]) -> Result<Self> {
        if offset.len() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                got: offset.len(),
            });
        }
        let data = self
            .points()
            .flat_map(|p| p.iter().zip(offset).map(|(&a, &b)| a + b))
            .collect();
        Self::from_flat(self.d, data)
    }

    pub fn scaled(&self, factor: T) -> Result<Self> {
        Self::from_flat(self.d, self.data.iter().map(|&v| v * factor).collect())
    }

    /// Reorders points so that point `k` of the result is point `order[k]`.
    pub fn permuted(&self, order: &[usize]) -> Result<Self> {
        if order.len() != self.len() {
            return Err(Error::InvalidArgument(
                "permutation length differs from cloud size".into(),
            ));
        }
        let mut seen = vec![false; order.len()];
        for &i in order {
            if i >= order.len() || std::mem::replace(&mut seen[i], true) {
                return Err(Error::InvalidArgument("not a permutation".into()));
            }
        }
        Self::from_flat(
            self.d,
            order
                .iter()
                .flat_map(|&i| self.point(i).iter().copied())
                .collect(),
        )
    }

    /// Componentwise minimum and maximum.
    pub fn bounds(&self) -> (Vec<T>, Vec<T>) {
        let mut lo = vec![T::infinity(); self.d];
        let mut hi = vec![T::neg_infinity(); self.d];
        for p in self.points() {
            for k in 0..self.d {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        (lo, hi)
    }
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    start: usize,
    end: usize,
}

/// Uniform grid over a sample cloud.
///
/// The cell of point `p` is `floor((p − origin) / cell_size)` componentwise,
/// with `origin` pinned to the minimum corner of the cloud. Points are stored
/// grouped by cell.
#[derive(Debug, Clone)]
pub struct GridIndex<T> {
    d: usize,
    cell_size: T,
    origin: Vec<T>,
    upper: Vec<T>,
    /// Original index of the point at each sorted position.
    order: Vec<usize>,
    /// Coordinates in sorted order.
    coords: Vec<T>,
    cells: Vec<Cell>,
    keys: Vec<i64>,
    lookup: HashMap<Box<[i64]>, usize>,
}

impl<T: Real> GridIndex<T> {
    pub fn build(cloud: &SampleCloud<T>, cell_size: T) -> Result<Self> {
        if !(cell_size > T::zero() && cell_size.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "cell size must be positive, got {cell_size}"
            )));
        }
        let d = cloud.dim();
        let (origin, upper) = cloud.bounds();
        let n = cloud.len();
        let mut point_keys = Vec::with_capacity(n * d);
        for p in cloud.points() {
            point_keys.extend(
                p.iter()
                    .zip(&origin)
                    .map(|(&v, &o)| cell_coord(v - o, cell_size)),
            );
        }
        let key_of = |i: usize| &point_keys[i * d..(i + 1) * d];
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| key_of(a).cmp(key_of(b)).then(a.cmp(&b)));

        let mut coords = Vec::with_capacity(n * d);
        let mut cells = Vec::new();
        let mut keys = Vec::new();
        let mut lookup = HashMap::new();
        for (pos, &i) in order.iter().enumerate() {
            coords.extend_from_slice(cloud.point(i));
            let key = key_of(i);
            let fresh = match cells.last() {
                None => true,
                Some(_) => &keys[keys.len() - d..] != key,
            };
            if fresh {
                lookup.insert(key.to_vec().into_boxed_slice(), cells.len());
                keys.extend_from_slice(key);
                cells.push(Cell {
                    start: pos,
                    end: pos + 1,
                });
            } else {
                cells.last_mut().expect("cell exists").end = pos + 1;
            }
        }
        Ok(Self {
            d,
            cell_size,
            origin,
            upper,
            order,
            coords,
            cells,
            keys,
            lookup,
        })
    }

    pub fn cell_size(&self) -> T {
        self.cell_size
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    /// Bounding box of the indexed points.
    pub fn bounding_box(&self) -> (&[T], &[T]) {
        (&self.origin, &self.upper)
    }

    /// Cell coordinates of an arbitrary point.
    pub fn cell_of(&self, x: &[T]) -> Vec<i64> {
        x.iter()
            .zip(&self.origin)
            .map(|(&v, &o)| cell_coord(v - o, self.cell_size))
            .collect()
    }

    /// Original point indices grouped by cell, in cell order.
    pub fn cells(&self) -> impl Iterator<Item = (&[i64], Vec<usize>)> + '_ {
        self.cells.iter().enumerate().map(move |(c, cell)| {
            (
                &self.keys[c * self.d..(c + 1) * self.d],
                self.order[cell.start..cell.end].to_vec(),
            )
        })
    }

    fn cell_index(&self, key: &[i64]) -> Option<usize> {
        self.lookup.get(key).copied()
    }

    /// Indices of the cells adjacent to `key` (itself included).
    fn neighborhood(&self, key: &[i64], offsets: &[Vec<i64>], out: &mut Vec<usize>) {
        out.clear();
        let mut probe = vec![0i64; self.d];
        for off in offsets {
            for k in 0..self.d {
                probe[k] = key[k].saturating_add(off[k]);
            }
            if let Some(c) = self.cell_index(&probe) {
                out.push(c);
            }
        }
    }

    /// Number of indexed points in the closed ball `B(x, r)`, `r ≤ cell_size`.
    pub fn count_within(&self, x: &[T], r: T) -> Result<usize> {
        if x.len() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                got: x.len(),
            });
        }
        if !(r > T::zero()) || r > self.cell_size {
            return Err(Error::InvalidArgument(format!(
                "query radius {r} must be positive and at most the cell size {}",
                self.cell_size
            )));
        }
        let r2 = r * r;
        let offsets = all_offsets(self.d);
        let mut cells = Vec::new();
        self.neighborhood(&self.cell_of(x), &offsets, &mut cells);
        let mut total = 0;
        for c in cells {
            let cell = self.cells[c];
            total += self.coords[cell.start * self.d..cell.end * self.d]
                .chunks_exact(self.d)
                .filter(|q| dist2(x, q) <= r2)
                .count();
        }
        Ok(total)
    }

    /// Closed-ball neighbor counts for every indexed point at radius
    /// `cell_size`, in original point order.
    pub fn neighbor_counts(&self) -> Vec<u32> {
        let r2 = self.cell_size * self.cell_size;
        let mut sorted = vec![0u32; self.len()];
        match self.d {
            1 => self.pair_counts_fixed::<1>(r2, &mut sorted),
            2 => self.pair_counts_fixed::<2>(r2, &mut sorted),
            3 => self.pair_counts_fixed::<3>(r2, &mut sorted),
            4 => self.pair_counts_fixed::<4>(r2, &mut sorted),
            _ => self.pair_counts_dyn(r2, &mut sorted),
        }
        let mut counts = vec![0u32; self.len()];
        for (pos, &i) in self.order.iter().enumerate() {
            counts[i] = sorted[pos];
        }
        counts
    }

    /// For each cell, the cells that follow it in the half-neighborhood.
    fn forward_neighbors(&self) -> Vec<Vec<usize>> {
        let offsets = forward_offsets(self.d);
        let mut scratch = Vec::new();
        (0..self.cells.len())
            .map(|c| {
                self.neighborhood(
                    &self.keys[c * self.d..(c + 1) * self.d],
                    &offsets,
                    &mut scratch,
                );
                scratch.clone()
            })
            .collect()
    }

    fn pair_counts_fixed<const D: usize>(&self, r2: T, counts: &mut [u32]) {
        let pts: Vec<[T; D]> = self
            .coords
            .chunks_exact(D)
            .map(|c| std::array::from_fn(|k| c[k]))
            .collect();
        let forward = self.forward_neighbors();
        for (c, cell) in self.cells.iter().enumerate() {
            let a = &pts[cell.start..cell.end];
            {
                let ca = &mut counts[cell.start..cell.end];
                for i in 0..a.len() {
                    ca[i] += 1;
                    for j in i + 1..a.len() {
                        if dist2_fixed(&a[i], &a[j]) <= r2 {
                            ca[i] += 1;
                            ca[j] += 1;
                        }
                    }
                }
            }
            for &nb in &forward[c] {
                let other = self.cells[nb];
                let b = &pts[other.start..other.end];
                let (ca, cb) =
                    disjoint_pair(counts, (cell.start, cell.end), (other.start, other.end));
                for (p, slot) in a.iter().zip(ca.iter_mut()) {
                    let mut hits = 0u32;
                    for (q, cq) in b.iter().zip(cb.iter_mut()) {
                        let hit = u32::from(dist2_fixed(p, q) <= r2);
                        hits += hit;
                        *cq += hit;
                    }
                    *slot += hits;
                }
            }
        }
    }

    fn pair_counts_dyn(&self, r2: T, counts: &mut [u32]) {
        let d = self.d;
        let point = |k: usize| &self.coords[k * d..(k + 1) * d];
        let forward = self.forward_neighbors();
        for (c, cell) in self.cells.iter().enumerate() {
            for i in cell.start..cell.end {
                counts[i] += 1;
                for j in i + 1..cell.end {
                    if dist2(point(i), point(j)) <= r2 {
                        counts[i] += 1;
                        counts[j] += 1;
                    }
                }
            }
            for &nb in &forward[c] {
                let other = self.cells[nb];
                for i in cell.start..cell.end {
                    for j in other.start..other.end {
                        if dist2(point(i), point(j)) <= r2 {
                            counts[i] += 1;
                            counts[j] += 1;
                        }
                    }
                }
            }
        }
    }
}

#[inline]
fn cell_coord<T: Real>(delta: T, cell_size: T) -> i64 {
    // `as` saturates for out-of-range queries far from the cloud.
    (delta / cell_size).floor().to_f64().map_or(0, |v| v as i64)
}

#[inline]
fn dist2<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| (x - y) * (x - y))
        .fold(T::zero(), |s, v| s + v)
}

#[inline(always)]
fn dist2_fixed<T: Real, const D: usize>(a: &[T; D], b: &[T; D]) -> T {
    let mut s = T::zero();
    for k in 0..D {
        let t = a[k] - b[k];
        s = s + t * t;
    }
    s
}

fn disjoint_pair(
    counts: &mut [u32],
    a: (usize, usize),
    b: (usize, usize),
) -> (&mut [u32], &mut [u32]) {
    if a.0 < b.0 {
        let (lo, hi) = counts.split_at_mut(b.0);
        (&mut lo[a.0..a.1], &mut hi[..b.1 - b.0])
    } else {
        let (lo, hi) = counts.split_at_mut(a.0);
        (&mut hi[..a.1 - a.0], &mut lo[b.0..b.1])
    }
}

/// All of `{-1, 0, 1}^d`.
fn all_offsets(d: usize) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::with_capacity(d)];
    for _ in 0..d {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                [-1i64, 0, 1].into_iter().map(move |v| {
                    let mut next = prefix.clone();
                    next.push(v);
                    next
                })
            })
            .collect();
    }
    out
}

/// Offsets whose first non-zero component is positive: one representative
/// of every `{o, -o}` pair, excluding zero.
fn forward_offsets(d: usize) -> Vec<Vec<i64>> {
    all_offsets(d)
        .into_iter()
        .filter(|o| o.iter().find(|&&v| v != 0).is_some_and(|&v| v > 0))
        .collect()
}

/// `r_n = (ln n / n)^{1/(2d)}`.
pub fn default_radius<T: Real>(n: usize, d: usize) -> Result<T> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "default radius needs n >= 2, got {n}"
        )));
    }
    if d == 0 {
        return Err(Error::InvalidDimension(
            "dimension must be at least 1".into(),
        ));
    }
    let nf = T::from_count(n);
    Ok((nf.ln() / nf).powf(T::one() / T::from_count(2 * d)))
}

fn check_radius<T: Real>(r: T) -> Result<()> {
    if r > T::zero() && r.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "radius must be positive and finite, got {r}"
        )))
    }
}

/// Closed-ball neighbor counts (self included) through the grid index.
pub fn neighbor_counts<T: Real>(cloud: &SampleCloud<T>, r: T) -> Result<Vec<u32>> {
    check_radius(r)?;
    Ok(GridIndex::build(cloud, r)?.neighbor_counts())
}

/// Closed-ball neighbor counts by the direct `O(n²)` double loop.
pub fn neighbor_counts_naive<T: Real>(cloud: &SampleCloud<T>, r: T) -> Result<Vec<u32>> {
    check_radius(r)?;
    let r2 = r * r;
    let n = cloud.len();
    let mut counts = vec![1u32; n];
    for i in 0..n {
        let p = cloud.point(i);
        for j in i + 1..n {
            if dist2(p, cloud.point(j)) <= r2 {
                counts[i] += 1;
                counts[j] += 1;
            }
        }
    }
    Ok(counts)
}

/// Multiplier `c` of the tolerance `c · r^{d/2}` defining the near-minimum set.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Slack<T> {
    /// `c = ω_d`.
    #[default]
    BallVolume,
    Constant(T),
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EstimatorConfig<T> {
    pub slack: Slack<T>,
    /// Count neighbors with the double loop instead of the grid.
    pub naive: bool,
}

/// One estimation run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateResult<T> {
    pub n: usize,
    pub d: usize,
    pub r: T,
    pub upsilon_hat: T,
    pub upsilon_tilde: T,
    pub a_count: usize,
    pub min_count: u32,
}

/// Estimates from precomputed neighbor counts.
///
/// `Υ̂ = min_j c_j / (n ω_d r^d)`; the near-minimum set collects every `i`
/// with `c_i / (n ω_d r^d) ≤ Υ̂ (1 + slack · r^{d/2})` and
/// `Υ̃ = Υ̂ (1 + #set / n)`.
pub fn estimate_from_counts<T: Real>(
    counts: &[u32],
    d: usize,
    r: T,
    slack: Slack<T>,
) -> Result<EstimateResult<T>> {
    check_radius(r)?;
    let n = counts.len();
    let min_count = *counts
        .iter()
        .min()
        .ok_or_else(|| Error::InvalidArgument("no neighbor counts".into()))?;
    let w: T = unit_ball_volume(d)?;
    let denom = T::from_count(n) * w * r.powi(d as i32);
    let upsilon_hat = T::from_u32(min_count).expect("u32 fits") / denom;
    let c = match slack {
        Slack::BallVolume => w,
        Slack::Constant(c) => c,
    };
    let threshold = upsilon_hat * (T::one() + c * r.powf(T::from_count(d) / T::lit(2.0)));
    let a_count = counts
        .iter()
        .filter(|&&ci| T::from_u32(ci).expect("u32 fits") / denom <= threshold)
        .count();
    let upsilon_tilde = upsilon_hat * (T::one() + T::from_count(a_count) / T::from_count(n));
    Ok(EstimateResult {
        n,
        d,
        r,
        upsilon_hat,
        upsilon_tilde,
        a_count,
        min_count,
    })
}

/// Plug-in estimate `min_j (c_j / n) / (ω_d r^d)`.
pub fn plugin_estimate<T: Real>(cloud: &SampleCloud<T>, r: T) -> Result<T> {
    Ok(bias_corrected_estimate(cloud, r)?.upsilon_hat)
}

/// Plug-in and bias-corrected estimates with the default slack.
pub fn bias_corrected_estimate<T: Real>(cloud: &SampleCloud<T>, r: T) -> Result<EstimateResult<T>> {
    bias_corrected_estimate_with(cloud, r, &EstimatorConfig::default())
}

pub fn bias_corrected_estimate_with<T: Real>(
    cloud: &SampleCloud<T>,
    r: T,
    config: &EstimatorConfig<T>,
) -> Result<EstimateResult<T>> {
    let counts = if config.naive {
        neighbor_counts_naive(cloud, r)?
    } else {
        neighbor_counts(cloud, r)?
    };
    estimate_from_counts(&counts, cloud.dim(), r, config.slack)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{E, PI};

    fn cloud(points: &[&[f64]]) -> SampleCloud<f64> {
        SampleCloud::new(points.iter().map(|p| p.to_vec()).collect()).unwrap()
    }

    #[test]
    fn default_radius_values() {
        let r: f64 = default_radius(9000, 2).unwrap();
        // evaluated independently: (ln 9000 / 9000)^(1/4)
        assert!((r - 0.178_344_253_352_028_4).abs() < 1e-15, "{r}");
        let r: f64 = default_radius(3000, 3).unwrap();
        assert!((r - (3000f64.ln() / 3000.0).powf(1.0 / 6.0)).abs() < 1e-15);
        assert!(default_radius::<f64>(1, 2).is_err());
        assert!(default_radius::<f64>(0, 2).is_err());
    }

    #[test]
    fn default_radius_at_e_squared() {
        // ln(e²) = 2 is not an integer sample size; check the closed form directly.
        let n = E * E;
        let r = (n.ln() / n).powf(0.5);
        assert!((r - (2.0 / (E * E)).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn cloud_validation() {
        assert!(SampleCloud::<f64>::new(vec![]).is_err());
        assert!(SampleCloud::new(vec![vec![0.0, 1.0], vec![1.0]]).is_err());
        assert!(SampleCloud::new(vec![vec![f64::INFINITY]]).is_err());
        assert!(SampleCloud::<f64>::from_flat(2, vec![1.0, 2.0, 3.0]).is_err());
        assert!(SampleCloud::<f64>::from_flat(0, vec![1.0]).is_err());
    }

    #[test]
    fn single_point() {
        let c = cloud(&[&[0.0, 0.0]]);
        assert_eq!(neighbor_counts(&c, 1.0).unwrap(), vec![1]);
        assert!((plugin_estimate(&c, 1.0).unwrap() - 1.0 / PI).abs() < 1e-15);
        let res = bias_corrected_estimate(&c, 1.0).unwrap();
        assert_eq!(res.a_count, 1);
        assert_eq!(res.upsilon_tilde, 2.0 * res.upsilon_hat);
    }

    #[test]
    fn closed_ball_boundary() {
        let c = cloud(&[&[0.0, 0.0], &[1.0, 0.0]]);
        assert_eq!(neighbor_counts(&c, 1.0).unwrap(), vec![2, 2]);
        assert_eq!(neighbor_counts_naive(&c, 1.0).unwrap(), vec![2, 2]);
    }

    #[test]
    fn isolated_pair() {
        let c = cloud(&[&[0.0, 0.0], &[3.0, 0.0]]);
        assert!((plugin_estimate(&c, 1.0).unwrap() - 0.5 / PI).abs() < 1e-15);
        let res = bias_corrected_estimate(&c, 1.0).unwrap();
        assert_eq!(res.a_count, 2);
        assert!((res.upsilon_tilde - 1.0 / PI).abs() < 1e-15);
    }

    #[test]
    fn duplicates_count_with_multiplicity() {
        let c = cloud(&[&[0.5, 0.5], &[0.5, 0.5], &[0.5, 0.5], &[9.0, 9.0]]);
        assert_eq!(neighbor_counts(&c, 0.1).unwrap(), vec![3, 3, 3, 1]);
    }

    #[test]
    fn rejects_bad_radius() {
        let c = cloud(&[&[0.0]]);
        assert!(neighbor_counts(&c, 0.0).is_err());
        assert!(neighbor_counts(&c, f64::NAN).is_err());
        assert!(bias_corrected_estimate(&c, -1.0).is_err());
    }

    #[test]
    fn forward_offsets_cover_half() {
        for d in 1..=4 {
            let fwd = forward_offsets(d);
            assert_eq!(fwd.len(), (3usize.pow(d as u32) - 1) / 2);
            for o in &fwd {
                let neg: Vec<i64> = o.iter().map(|v| -v).collect();
                assert!(!fwd.contains(&neg));
            }
        }
    }

    #[test]
    fn grid_assigns_every_point_once() {
        let pts: Vec<Vec<f64>> = (0..50)
            .map(|i| vec![(i as f64 * 0.37) % 1.0, (i as f64 * 0.71) % 1.0])
            .collect();
        let c = SampleCloud::new(pts).unwrap();
        let grid = GridIndex::build(&c, 0.2).unwrap();
        let mut seen = vec![0; c.len()];
        for (key, members) in grid.cells() {
            for i in members {
                seen[i] += 1;
                assert_eq!(grid.cell_of(c.point(i)), key);
            }
        }
        assert!(seen.iter().all(|&s| s == 1));
    }

    #[test]
    fn count_within_matches_scan() {
        let pts: Vec<Vec<f64>> = (0..200)
            .map(|i| vec![(i as f64 * 0.37) % 1.0, (i as f64 * 0.71) % 1.0])
            .collect();
        let c = SampleCloud::new(pts).unwrap();
        let grid = GridIndex::build(&c, 0.15).unwrap();
        for x in [[0.5, 0.5], [0.0, 0.0], [-3.0, 0.2], [0.99, 0.01]] {
            let expected = c.points().filter(|p| dist2(p, &x) <= 0.15 * 0.15).count();
            assert_eq!(grid.count_within(&x, 0.15).unwrap(), expected);
        }
        assert!(grid.count_within(&[0.5, 0.5], 0.2).is_err());
    }

    #[test]
    fn high_dimension_fallback() {
        let pts: Vec<Vec<f64>> = (0..120)
            .map(|i| {
                (0..5)
                    .map(|k| ((i * (k + 3)) as f64 * 0.173) % 1.0)
                    .collect()
            })
            .collect();
        let c = SampleCloud::new(pts).unwrap();
        assert_eq!(
            neighbor_counts(&c, 0.45).unwrap(),
            neighbor_counts_naive(&c, 0.45).unwrap()
        );
    }

    #[test]
    fn custom_slack() {
        let c = cloud(&[&[0.0, 0.0], &[0.5, 0.0], &[3.0, 0.0]]);
        let cfg = EstimatorConfig {
            slack: Slack::Constant(0.0),
            naive: false,
        };
        let res = bias_corrected_estimate_with(&c, 1.0, &cfg).unwrap();
        assert_eq!(res.min_count, 1);
        assert_eq!(res.a_count, 1);
        let wide = EstimatorConfig {
            slack: Slack::Constant(10.0),
            naive: true,
        };
        assert_eq!(
            bias_corrected_estimate_with(&c, 1.0, &wide)
                .unwrap()
                .a_count,
            3
        );
    }
}
