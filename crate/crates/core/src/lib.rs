//! Estimation of the standardness constant `Υ(S, ν)` of a probability
//! measure from i.i.d. samples.
//!
//! The crate provides:
//! - [`geometry`]: supports, unit-ball volumes, exact `μ(B(x,r) ∩ S)` and
//!   closed-form constants for uniform laws;
//! - [`sampling`]: seeded samplers and ball-mass queries;
//! - [`estimator`]: the plug-in estimator `Υ̂ₙ` and its bias-corrected
//!   variant `Υ̃ₙ` over a grid-based neighbor counter;
//! - [`oracle`]: numeric ground truth from the minimum ball fraction;
//! - [`experiments`]: a Monte Carlo harness with reference tables.
//!
//! Geometry and estimators are generic over [`Real`] (`f32` or `f64`); the
//! `*64` aliases below fix the scalar to `f64`.

// `!(x > 0)` style checks are intentional: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod estimator;
pub mod experiments;
pub mod geometry;
pub mod oracle;
pub mod sampling;
pub mod scalar;

pub use error::{Error, Result};
pub use estimator::{
    bias_corrected_estimate, bias_corrected_estimate_with, default_radius, neighbor_counts,
    neighbor_counts_naive, plugin_estimate, EstimateResult, EstimatorConfig, GridIndex,
    SampleCloud, Slack,
};
pub use experiments::{
    compare_to_reference, run_cell, run_experiment, CellSpec, ExperimentReport, ExperimentSpec,
    RadiusRule, Table, Tolerance, Verdict,
};
pub use geometry::{
    analytic_upsilon, ball_shape_intersection, make_regular_polygon, min_interior_angle,
    unit_ball_volume, BallVolumeTable, Shape,
};
pub use oracle::{
    min_ball_fraction, omega, omega_curve, MinBallFraction, OmegaCurve, OracleConfig,
};
pub use sampling::{nu_ball, sample, support, BallMass, Distribution, SeedSpec, Stream};
pub use scalar::Real;

pub type Shape64 = Shape<f64>;
pub type Distribution64 = Distribution<f64>;
pub type SampleCloud64 = SampleCloud<f64>;
pub type EstimateResult64 = EstimateResult<f64>;
pub type Shape32 = Shape<f32>;
pub type SampleCloud32 = SampleCloud<f32>;
