//! Sequential k-center algorithms: Gonzalez's farthest-first traversal,
//! threshold (parametric) pruning in its permutation-stable form, and a
//! brute-force exact oracle for desk-scale instances.

mod exact;
mod gonzalez;
mod pruning;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metric::{MetricError, PointId};

pub use exact::{
    exact_k_subset_radius, exact_kcenter, oracle_fits, ORACLE_MAX_COMBINATIONS, ORACLE_MAX_POINTS,
};
pub use gonzalez::{gonzalez, FirstPoint};
pub use pruning::{
    classic_parametric_pruning, greedy_cover, permutation_stable_pruning, pruning_with,
    CoverRecord, PruningMode, WRecord,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("k must be at least 1")]
    ZeroK,
    #[error("empty point subset")]
    EmptySubset,
    #[error("k = {k} exceeds the {n} points available")]
    KTooLarge { k: usize, n: usize },
    #[error("instance too large for the exact oracle: {points} points, {combinations} subsets")]
    InstanceTooLarge { points: usize, combinations: u128 },
    #[error(transparent)]
    Metric(#[from] MetricError),
}

/// Which procedure produced a solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Gonzalez,
    Pruning,
    Exact,
    Alg2,
    Baseline4,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::Exact,
        Algorithm::Gonzalez,
        Algorithm::Pruning,
        Algorithm::Baseline4,
        Algorithm::Alg2,
    ];

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "gonzalez" => Algorithm::Gonzalez,
            "pruning" => Algorithm::Pruning,
            "exact" => Algorithm::Exact,
            "alg2" => Algorithm::Alg2,
            "baseline4" => Algorithm::Baseline4,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Gonzalez => "gonzalez",
            Algorithm::Pruning => "pruning",
            Algorithm::Exact => "exact",
            Algorithm::Alg2 => "alg2",
            Algorithm::Baseline4 => "baseline4",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// At most `k` centers and a radius at which they cover the input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    /// Center ids in increasing id order.
    pub centers: Vec<PointId>,
    pub radius: f64,
    pub algorithm: Algorithm,
    /// 1-based machine index when the solution was computed on one machine.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub machine: Option<usize>,
}

impl Solution {
    pub fn new(mut centers: Vec<PointId>, radius: f64, algorithm: Algorithm) -> Self {
        centers.sort_unstable();
        centers.dedup();
        Self {
            centers,
            radius,
            algorithm,
            machine: None,
        }
    }

    pub fn on_machine(mut self, machine: usize) -> Self {
        self.machine = Some(machine);
        self
    }
}

/// Deduplicate a subset and check its ids against the instance.
pub(crate) fn normalize_subset(
    instance: &crate::metric::MetricInstance,
    subset: &[PointId],
) -> Result<Vec<PointId>, SolverError> {
    if subset.is_empty() {
        return Err(SolverError::EmptySubset);
    }
    instance.check_ids(subset)?;
    let mut v = subset.to_vec();
    v.sort_unstable();
    v.dedup();
    Ok(v)
}
