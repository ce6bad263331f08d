//! Monte Carlo harness for replicated estimation experiments.
//!
//! A cell fixes a law, a sample size and a replication count. Replication
//! `k` of cell `c` samples from stream `(c, k)` of the master seed, so every
//! numeric field of a report depends only on the [`ExperimentSpec`]. Cells
//! run one after another; replications within a cell run on a bounded
//! thread pool and are reduced in replication order.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::estimator::{bias_corrected_estimate, default_radius};
use crate::geometry::{analytic_upsilon, make_regular_polygon, Ball, Shape};
use crate::oracle::{min_ball_fraction, OracleConfig};
use crate::sampling::{sample, support, Distribution, SeedSpec, STREAM_SCHEME_VERSION};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Sample sizes used by the reference tables.
pub const TABLE_SAMPLE_SIZES: [usize; 5] = [1000, 3000, 5000, 7000, 9000];

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadiusRule {
    /// `(ln n / n)^{1/(2d)}`.
    #[default]
    Default,
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellSpec {
    pub dist_id: String,
    pub dist: Distribution<f64>,
    pub n: usize,
    pub replications: usize,
    #[serde(default)]
    pub radius_rule: RadiusRule,
}

impl CellSpec {
    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::InvalidArgument(format!(
                "cell {}: replications must be >= 1",
                self.dist_id
            )));
        }
        match self.radius_rule {
            RadiusRule::Default if self.n < 2 => Err(Error::InvalidArgument(format!(
                "cell {}: default radius needs n >= 2",
                self.dist_id
            ))),
            RadiusRule::Fixed(r) if !(r > 0.0 && r.is_finite()) => Err(Error::InvalidArgument(
                format!("cell {}: fixed radius must be positive", self.dist_id),
            )),
            _ if self.n == 0 => Err(Error::InvalidArgument(format!(
                "cell {}: n must be >= 1",
                self.dist_id
            ))),
            _ => Ok(()),
        }
    }

    pub fn radius(&self) -> Result<f64> {
        match self.radius_rule {
            RadiusRule::Default => default_radius(self.n, self.dist.dim()),
            RadiusRule::Fixed(r) => Ok(r),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub cells: Vec<CellSpec>,
    pub master_seed: u64,
    /// Concurrent replications; 0 picks the number of available cores.
    #[serde(default)]
    pub parallelism: usize,
}

impl ExperimentSpec {
    /// SHA-256 of the canonical JSON encoding, excluding `parallelism`
    /// (which never changes numeric output).
    pub fn hash(&self) -> String {
        let canonical = serde_json::json!({ "cells": self.cells, "master_seed": self.master_seed });
        sha256_hex(canonical.to_string().as_bytes())
    }
}

/// Where a cell's ground-truth constant came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TruthSource {
    Analytic,
    Oracle,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellReport {
    pub dist_id: String,
    pub d: usize,
    pub n: usize,
    pub replications: usize,
    pub r_used: f64,
    pub mean_hat: f64,
    /// Unbiased sample variance; `None` for a single replication.
    pub var_hat: Option<f64>,
    pub mean_tilde: f64,
    pub var_tilde: Option<f64>,
    pub upsilon_true: Option<f64>,
    pub upsilon_source: TruthSource,
    pub wall_time_secs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum CellOutcome {
    Completed(CellReport),
    Failed {
        dist_id: String,
        n: usize,
        error: String,
    },
}

impl CellOutcome {
    pub fn report(&self) -> Option<&CellReport> {
        match self {
            CellOutcome::Completed(r) => Some(r),
            CellOutcome::Failed { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub master_seed: u64,
    pub spec_hash: String,
    pub tool_version: String,
    pub stream_scheme: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub cells: Vec<CellOutcome>,
    pub provenance: Provenance,
}

impl ExperimentReport {
    pub fn completed(&self) -> impl Iterator<Item = &CellReport> {
        self.cells.iter().filter_map(CellOutcome::report)
    }

    pub fn find(&self, dist_id: &str, n: usize) -> Option<&CellReport> {
        self.completed().find(|c| c.dist_id == dist_id && c.n == n)
    }

    /// CSV with one row per cell and estimator:
    /// `dist_id,d,n,estimator,mean,variance,upsilon_true,r,reps,seed`.
    /// Missing values are empty fields.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::InvalidArgument(format!("csv: {e}"));
        w.write_record([
            "dist_id",
            "d",
            "n",
            "estimator",
            "mean",
            "variance",
            "upsilon_true",
            "r",
            "reps",
            "seed",
        ])
        .map_err(io)?;
        let seed = self.provenance.master_seed;
        for c in self.completed() {
            for (name, mean, var) in [
                (Estimator::Hat, c.mean_hat, c.var_hat),
                (Estimator::Tilde, c.mean_tilde, c.var_tilde),
            ] {
                w.serialize((
                    &c.dist_id,
                    c.d,
                    c.n,
                    name,
                    mean,
                    var,
                    c.upsilon_true,
                    c.r_used,
                    c.replications,
                    seed,
                ))
                .map_err(io)?;
            }
        }
        let bytes = w
            .into_inner()
            .map_err(|e| Error::InvalidArgument(format!("csv: {e}")))?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }
}

/// Lowercase hex SHA-256.
pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Sum in a fixed binary-tree order.
fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        len => {
            let (a, b) = values.split_at(len / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}

/// Mean and unbiased variance (`None` below two values).
fn mean_and_variance(values: &[f64]) -> (f64, Option<f64>) {
    let n = values.len() as f64;
    let mean = pairwise_sum(values) / n;
    if values.len() < 2 {
        return (mean, None);
    }
    let squares: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
    (mean, Some(pairwise_sum(&squares) / (n - 1.0)))
}

/// Ground truth: closed form when available, else the oracle at a small
/// radius relative to the support.
pub fn ground_truth(dist: &Distribution<f64>) -> (Option<f64>, TruthSource) {
    if let Some(u) = analytic_upsilon(dist) {
        return (Some(u), TruthSource::Analytic);
    }
    let r = 0.02 * support(dist).diameter();
    match min_ball_fraction(dist, r, &OracleConfig::default()) {
        Ok(m) => (Some(m.value), TruthSource::Oracle),
        Err(_) => (None, TruthSource::Unknown),
    }
}

/// Runs every replication of one cell on the current rayon pool.
pub fn run_cell(cell: &CellSpec, cell_index: u32, master_seed: u64) -> Result<CellReport> {
    cell.validate()?;
    let started = Instant::now();
    let r = cell.radius()?;
    let seed = SeedSpec::new(master_seed);
    let estimates = (0..cell.replications)
        .into_par_iter()
        .map(|k| {
            let rep = u32::try_from(k)
                .map_err(|_| Error::InvalidArgument("too many replications".into()))?;
            let cloud = sample(&cell.dist, cell.n, &mut seed.stream(cell_index, rep))?;
            let est = bias_corrected_estimate(&cloud, r)?;
            Ok((est.upsilon_hat, est.upsilon_tilde))
        })
        .collect::<Vec<Result<(f64, f64)>>>();
    let mut hats = Vec::with_capacity(cell.replications);
    let mut tildes = Vec::with_capacity(cell.replications);
    for (k, est) in estimates.into_iter().enumerate() {
        let (h, t) = est.map_err(|e| Error::Replication {
            replication: k,
            source: Box::new(e),
        })?;
        hats.push(h);
        tildes.push(t);
    }
    let (mean_hat, var_hat) = mean_and_variance(&hats);
    let (mean_tilde, var_tilde) = mean_and_variance(&tildes);
    let (upsilon_true, upsilon_source) = ground_truth(&cell.dist);
    Ok(CellReport {
        dist_id: cell.dist_id.clone(),
        d: cell.dist.dim(),
        n: cell.n,
        replications: cell.replications,
        r_used: r,
        mean_hat,
        var_hat,
        mean_tilde,
        var_tilde,
        upsilon_true,
        upsilon_source,
        wall_time_secs: started.elapsed().as_secs_f64(),
    })
}

/// Runs all cells. A failing cell is recorded and the rest still run.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.parallelism)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    let cells = pool.install(|| {
        spec.cells
            .iter()
            .enumerate()
            .map(|(i, cell)| {
                let index = u32::try_from(i).unwrap_or(u32::MAX - 2);
                match run_cell(cell, index, spec.master_seed) {
                    Ok(report) => CellOutcome::Completed(report),
                    Err(e) => CellOutcome::Failed {
                        dist_id: cell.dist_id.clone(),
                        n: cell.n,
                        error: e.to_string(),
                    },
                }
            })
            .collect()
    });
    Ok(ExperimentReport {
        cells,
        provenance: Provenance {
            master_seed: spec.master_seed,
            spec_hash: spec.hash(),
            tool_version: TOOL_VERSION.to_string(),
            stream_scheme: STREAM_SCHEME_VERSION.to_string(),
        },
    })
}

/// Laws of the reference tables, keyed by their `dist_id`.
pub fn reference_law(dist_id: &str) -> Option<Distribution<f64>> {
    let uniform = Distribution::UniformOnShape;
    Some(match dist_id {
        "S1_triangle" => uniform(make_regular_polygon(3, 1.0).ok()?),
        "S2_square" => uniform(Shape::unit_square()),
        "S3_hexagon" => uniform(make_regular_polygon(6, 1.0).ok()?),
        "S4_disk" => uniform(Shape::Ball(Ball::with_volume(2, 1.0).ok()?)),
        "ball_d3" => uniform(Shape::Ball(Ball::with_volume(3, 1.0).ok()?)),
        "ball_d4" => uniform(Shape::Ball(Ball::with_volume(4, 1.0).ok()?)),
        "radial_mixture" => Distribution::RadialCombination,
        _ => return None,
    })
}

/// Which reference table to reproduce.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Table {
    /// Planar uniform laws.
    One,
    /// Unit-volume balls in dimensions 3 and 4.
    Two,
    /// Radial mixture on the unit disk.
    Three,
}

impl Table {
    pub fn from_number(k: u8) -> Result<Self> {
        match k {
            1 => Ok(Table::One),
            2 => Ok(Table::Two),
            3 => Ok(Table::Three),
            _ => Err(Error::InvalidArgument(format!(
                "unknown table {k} (expected 1, 2 or 3)"
            ))),
        }
    }

    pub fn dist_ids(self) -> &'static [&'static str] {
        match self {
            Table::One => &["S1_triangle", "S2_square", "S3_hexagon", "S4_disk"],
            Table::Two => &["ball_d3", "ball_d4"],
            Table::Three => &["radial_mixture"],
        }
    }

    pub fn spec(self, replications: usize, master_seed: u64, parallelism: usize) -> ExperimentSpec {
        let cells = self
            .dist_ids()
            .iter()
            .flat_map(|id| {
                let dist = reference_law(id).expect("built-in law");
                TABLE_SAMPLE_SIZES.iter().map(move |&n| CellSpec {
                    dist_id: id.to_string(),
                    dist: dist.clone(),
                    n,
                    replications,
                    radius_rule: RadiusRule::Default,
                })
            })
            .collect();
        ExperimentSpec {
            cells,
            master_seed,
            parallelism,
        }
    }

    pub fn reference(self) -> ReferenceTable {
        let raw = match self {
            Table::One => include_str!("../data/table1.json"),
            Table::Two => include_str!("../data/table2.json"),
            Table::Three => include_str!("../data/table3.json"),
        };
        serde_json::from_str(raw).expect("shipped reference table parses")
    }

    /// Full-run tolerance on means (500 replications); doubled for reduced runs.
    pub fn tolerance(self, replications: usize) -> Tolerance {
        let base = match self {
            Table::One => 0.006,
            Table::Two => 0.01,
            Table::Three => 0.003,
        };
        Tolerance(if replications >= 500 {
            base
        } else {
            2.0 * base
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    Hat,
    Tilde,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceEntry {
    pub dist_id: String,
    pub d: usize,
    pub n: usize,
    pub estimator: Estimator,
    pub mean: f64,
    pub variance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceTable {
    pub table: u8,
    pub source: String,
    pub replications: usize,
    pub entries: Vec<ReferenceEntry>,
}

/// Absolute tolerance on means.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance(pub f64);

/// `d = 2` cells at 0.006, higher dimensions at 0.01.
pub fn dimension_tolerance(d: usize) -> Tolerance {
    Tolerance(if d <= 2 { 0.006 } else { 0.01 })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub dist_id: String,
    pub d: usize,
    pub n: usize,
    pub estimator: Estimator,
    pub reference_mean: f64,
    pub observed_mean: f64,
    pub reference_variance: f64,
    pub observed_variance: Option<f64>,
    pub tolerance: f64,
    pub pass: bool,
}

impl Verdict {
    pub fn deviation(&self) -> f64 {
        (self.observed_mean - self.reference_mean).abs()
    }
}

/// Checks every reference entry against the matching report cell.
pub fn compare_to_reference(
    report: &ExperimentReport,
    reference: &ReferenceTable,
    tolerance: Tolerance,
) -> Result<Vec<Verdict>> {
    reference
        .entries
        .iter()
        .map(|entry| {
            let cell = report.find(&entry.dist_id, entry.n).ok_or_else(|| {
                Error::ReferenceMismatch(format!(
                    "no completed cell for {} at n = {}",
                    entry.dist_id, entry.n
                ))
            })?;
            if cell.d != entry.d {
                return Err(Error::ReferenceMismatch(format!(
                    "{} has dimension {} in the report and {} in the reference",
                    entry.dist_id, cell.d, entry.d
                )));
            }
            let (observed_mean, observed_variance) = match entry.estimator {
                Estimator::Hat => (cell.mean_hat, cell.var_hat),
                Estimator::Tilde => (cell.mean_tilde, cell.var_tilde),
            };
            Ok(Verdict {
                dist_id: entry.dist_id.clone(),
                d: entry.d,
                n: entry.n,
                estimator: entry.estimator,
                reference_mean: entry.mean,
                observed_mean,
                reference_variance: entry.variance,
                observed_variance,
                tolerance: tolerance.0,
                pass: (observed_mean - entry.mean).abs() <= tolerance.0,
            })
        })
        .collect()
}

pub fn all_pass(verdicts: &[Verdict]) -> bool {
    verdicts.iter().all(|v| v.pass)
}
