//! Seeded synthetic instances.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metric::{MetricError, MetricInstance, ValidationPolicy};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GenerateError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Metric(#[from] MetricError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InstanceKind {
    UniformRandomEuclidean,
    ClusteredEuclidean,
    RandomMetricMatrix,
}

impl InstanceKind {
    pub fn name(self) -> &'static str {
        match self {
            InstanceKind::UniformRandomEuclidean => "uniform-random-euclidean",
            InstanceKind::ClusteredEuclidean => "clustered-euclidean",
            InstanceKind::RandomMetricMatrix => "random-metric-matrix",
        }
    }
}

impl fmt::Display for InstanceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for InstanceKind {
    type Err = GenerateError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "uniform-random-euclidean" | "uniform" => InstanceKind::UniformRandomEuclidean,
            "clustered-euclidean" | "clustered" => InstanceKind::ClusteredEuclidean,
            "random-metric-matrix" | "matrix" => InstanceKind::RandomMetricMatrix,
            other => {
                return Err(GenerateError::InvalidParams(format!(
                    "unknown kind {other:?}"
                )))
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenParams {
    pub n: usize,
    pub dim: usize,
    /// Coordinates are drawn from `[0, extent)` for uniform instances.
    pub extent: f64,
    pub clusters: usize,
    /// Per-coordinate offset bound around a cluster center.
    pub spread: f64,
    /// Gap between consecutive cluster centers along the first axis.
    pub separation: f64,
    /// Edge weights of random matrices are integers in `1..=max_weight`.
    pub max_weight: u32,
}

impl Default for GenParams {
    fn default() -> Self {
        Self {
            n: 12,
            dim: 2,
            extent: 100.0,
            clusters: 3,
            spread: 1.0,
            separation: 10.0,
            max_weight: 20,
        }
    }
}

impl GenParams {
    pub fn with_n(mut self, n: usize) -> Self {
        self.n = n;
        self
    }
}

pub fn generate(
    kind: InstanceKind,
    params: &GenParams,
    seed: u64,
) -> Result<MetricInstance, GenerateError> {
    if params.n == 0 {
        return Err(GenerateError::InvalidParams("n must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match kind {
        InstanceKind::UniformRandomEuclidean => {
            if params.dim == 0 || params.extent.is_nan() || params.extent <= 0.0 {
                return Err(GenerateError::InvalidParams(
                    "dimension and extent must be positive".into(),
                ));
            }
            let points = (0..params.n)
                .map(|_| {
                    (0..params.dim)
                        .map(|_| rng.gen_range(0.0..params.extent))
                        .collect()
                })
                .collect();
            Ok(MetricInstance::from_coordinates(points)?)
        }
        InstanceKind::ClusteredEuclidean => {
            if params.dim == 0
                || params.clusters == 0
                || params.spread < 0.0
                || params.separation < 0.0
            {
                return Err(GenerateError::InvalidParams(
                    "clustered instances need dim >= 1, clusters >= 1, spread >= 0, separation >= 0".into(),
                ));
            }
            let points = (0..params.n)
                .map(|i| {
                    let c = (i % params.clusters) as f64;
                    (0..params.dim)
                        .map(|axis| {
                            let base = if axis == 0 {
                                c * params.separation
                            } else {
                                0.0
                            };
                            let jitter = if params.spread > 0.0 {
                                rng.gen_range(-params.spread..=params.spread)
                            } else {
                                0.0
                            };
                            base + jitter
                        })
                        .collect()
                })
                .collect();
            Ok(MetricInstance::from_coordinates(points)?)
        }
        InstanceKind::RandomMetricMatrix => {
            if params.max_weight == 0 {
                return Err(GenerateError::InvalidParams(
                    "max_weight must be positive".into(),
                ));
            }
            let n = params.n;
            let mut d = vec![vec![0.0f64; n]; n];
            #[allow(clippy::needless_range_loop)]
            for i in 0..n {
                for j in (i + 1)..n {
                    let w = f64::from(rng.gen_range(1..=params.max_weight));
                    d[i][j] = w;
                    d[j][i] = w;
                }
            }
            // Shortest-path closure; integer weights keep every sum exact.
            for via in 0..n {
                for i in 0..n {
                    for j in 0..n {
                        let detour = d[i][via] + d[via][j];
                        if detour < d[i][j] {
                            d[i][j] = detour;
                        }
                    }
                }
            }
            Ok(MetricInstance::from_matrix(
                d,
                &ValidationPolicy::default(),
            )?)
        }
    }
}
