//! Monte Carlo estimators and exact checks built on the samplers.
//!
//! Every estimator takes a [`Replicates`] budget. Replicate `i` draws from
//! stream `i` of the run seed (see [`crate::rng`]) and reductions happen in
//! replicate order, so reports do not depend on the worker count.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::{fit_line, mean_stderr};

mod arms;
mod monotone;
mod reversal;
mod signature;
mod walks;

pub use arms::{
    crossing_components, crossings_joined_inside, detect_four_arm, estimate_k_statistic, four_arm_probability,
    four_arm_sweep, k_statistic, FourArmPoint,
};
pub use monotone::{
    conditional_fixtures, conditional_monotonicity_check, connected_graphs, deletion_pairs,
    edge_marginal_monotonicity_check, GraphPair, MonotonicityReport, MONOTONICITY_LIMIT,
};
pub use reversal::{
    exact_time_reversal, merge_trace_backward, merge_trace_forward, sampled_time_reversal, time_reversal_tv_test,
    ExactReversal, MergeStep, ReversalReport, EXACT_REVERSAL_LIMIT,
};
pub use signature::{rescaled_trajectory_law_matches, weight_scaling_signature, SignatureReport};
pub use walks::{escape_scaling, estimate_es, lerw_length_scaling, lerw_lengths, EsOptions, GridWalker};

/// Replicate budget of one estimator call.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Replicates {
    pub samples: usize,
    pub seed: u64,
    pub workers: usize,
}

impl Replicates {
    pub fn new(samples: usize, seed: u64) -> Self {
        Replicates {
            samples,
            seed,
            workers: 1,
        }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    /// The same budget on an independent seed.
    pub fn derived(self, tag: u64) -> Self {
        Replicates {
            seed: crate::rng::derive_seed(self.seed, tag),
            ..self
        }
    }

    fn check(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::InsufficientInput("zero samples".into()));
        }
        Ok(())
    }
}

/// Mean of per-replicate values with its standard error and normal 95% interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub estimate: f64,
    pub stderr: f64,
    pub samples: usize,
    pub seed: u64,
    pub ci95: (f64, f64),
    pub metadata: BTreeMap<String, String>,
}

impl EstimateReport {
    pub fn from_values(values: &[f64], seed: u64, metadata: BTreeMap<String, String>) -> Self {
        let (estimate, stderr) = mean_stderr(values);
        EstimateReport {
            estimate,
            stderr,
            samples: values.len(),
            seed,
            ci95: (estimate - 1.96 * stderr, estimate + 1.96 * stderr),
            metadata,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.ci95.0 <= x && x <= self.ci95.1
    }
}

/// One size of a log-log sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalePoint {
    pub size: f64,
    pub mean: f64,
    pub stderr: f64,
    pub samples: usize,
}

/// Least-squares slope of `log mean` against `log size`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub slope: f64,
    pub slope_stderr: f64,
    pub intercept: f64,
    pub points: Vec<ScalePoint>,
    pub seed: u64,
}

impl ScalingFit {
    pub fn from_points(points: Vec<ScalePoint>, seed: u64) -> Result<Self> {
        if points.iter().any(|p| !(p.mean > 0.0)) {
            return Err(Error::DegenerateFit("non-positive mean in a log-log fit".into()));
        }
        let x: Vec<f64> = points.iter().map(|p| p.size.ln()).collect();
        let y: Vec<f64> = points.iter().map(|p| p.mean.ln()).collect();
        let s: Vec<f64> = points.iter().map(|p| p.stderr / p.mean).collect();
        let f = fit_line(&x, &y, &s)?;
        Ok(ScalingFit {
            slope: f.slope,
            slope_stderr: f.slope_stderr,
            intercept: f.intercept,
            points,
            seed,
        })
    }

    /// Whether `target` lies within `k` standard errors of the slope.
    pub fn slope_within(&self, target: f64, k: f64) -> bool {
        (self.slope - target).abs() <= k * self.slope_stderr
    }
}

pub(crate) fn meta(pairs: &[(&str, String)]) -> BTreeMap<String, String> {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}
