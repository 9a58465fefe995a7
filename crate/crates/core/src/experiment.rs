//! Running algorithms against the oracle and collecting reports.

use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coreset::OrderedCoreset;
use crate::dkcenter::{
    run_algorithm2, run_baseline4, suggested_memory, DistributedRun, DkError, RunDetails,
    RunOptions, SelectionRule,
};
use crate::io::PartitionStrategy;
use crate::metric::{
    center_covers, covering_radius, MetricInstance, MetricKind, PointId, PointOrder,
};
use crate::mpcsim::{ClusterConfig, ClusterTrace, Partition};
use crate::solvers::{
    classic_parametric_pruning, exact_kcenter, gonzalez, Algorithm, FirstPoint, PruningMode,
    Solution, SolverError,
};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Distributed(#[from] DkError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("oracle unavailable: {0}")]
    OracleUnavailable(SolverError),
}

/// Hard approximation bound each algorithm is checked against.
pub fn bound_for(algorithm: Algorithm) -> f64 {
    match algorithm {
        Algorithm::Exact => 1.0,
        Algorithm::Baseline4 => 4.0,
        Algorithm::Gonzalez | Algorithm::Pruning | Algorithm::Alg2 => 2.0,
    }
}

/// Slack on every ratio comparison; radii are exact distances.
pub const RATIO_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RatioStatus {
    Ok,
    /// The optimum is 0, so no ratio exists; the run passes only at radius 0.
    Degenerate,
    Unavailable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ratio {
    pub value: Option<f64>,
    pub status: RatioStatus,
    /// `None` when no oracle was available.
    pub within_bound: Option<bool>,
}

pub fn ratio(radius: f64, oracle: Option<f64>, bound: f64) -> Ratio {
    match oracle {
        None => Ratio {
            value: None,
            status: RatioStatus::Unavailable,
            within_bound: None,
        },
        Some(opt) if opt > 0.0 => Ratio {
            value: Some(radius / opt),
            status: RatioStatus::Ok,
            within_bound: Some(radius <= bound * opt + RATIO_SLACK),
        },
        Some(_) => Ratio {
            value: None,
            status: RatioStatus::Degenerate,
            within_bound: Some(radius == 0.0),
        },
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmReport {
    pub algorithm: Algorithm,
    pub radius: f64,
    /// Covering radius of `centers` over the whole input.
    pub cost: f64,
    pub centers: Vec<PointId>,
    pub ratio: Ratio,
    pub feasible: bool,
    pub coverage_ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub within_coreset: Option<bool>,
    pub rounds: usize,
    pub points_communicated: usize,
    pub entries_communicated: usize,
    pub warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coreset: Option<OrderedCoreset>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<ClusterTrace>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceSummary {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    pub n: usize,
    pub metric: MetricKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dimension: Option<usize>,
    pub k: usize,
    #[serde(rename = "L")]
    pub machines: usize,
    pub memory: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunFlags {
    pub partition: PartitionStrategy,
    pub seed: u64,
    pub compat_literal_alg1: bool,
    pub compat_literal_select: bool,
}

impl Default for RunFlags {
    fn default() -> Self {
        Self {
            partition: PartitionStrategy::RoundRobin,
            seed: 0,
            compat_literal_alg1: false,
            compat_literal_select: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub instance: InstanceSummary,
    pub oracle_radius: Option<f64>,
    pub algorithms: Vec<AlgorithmReport>,
    pub flags: RunFlags,
    pub warnings: Vec<String>,
    /// Wall time per algorithm in milliseconds; excluded from determinism checks.
    pub timing_ms: BTreeMap<String, f64>,
}

impl ExperimentReport {
    /// JSON with the wall-time fields blanked, for determinism checks.
    pub fn deterministic_json(&self) -> String {
        let mut copy = self.clone();
        copy.timing_ms.clear();
        serde_json::to_string(&copy).expect("report serializes")
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// One row per algorithm.
    pub fn csv_summary(&self) -> String {
        let mut out = String::from(
            "algorithm,radius,cost,ratio,status,feasible,rounds,points_communicated\n",
        );
        for a in &self.algorithms {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                a.algorithm,
                a.radius,
                a.cost,
                a.ratio.value.map(|v| v.to_string()).unwrap_or_default(),
                serde_json::to_value(a.ratio.status)
                    .ok()
                    .and_then(|v| v.as_str().map(str::to_string))
                    .unwrap_or_default(),
                a.feasible,
                a.rounds,
                a.points_communicated
            ));
        }
        out
    }

    pub fn algorithm(&self, alg: Algorithm) -> Option<&AlgorithmReport> {
        self.algorithms.iter().find(|a| a.algorithm == alg)
    }

    pub fn any_bound_violated(&self) -> bool {
        self.algorithms
            .iter()
            .any(|a| a.ratio.within_bound == Some(false))
    }
}

/// Everything that fixes a run besides the instance.
#[derive(Debug, Clone)]
pub struct RunSetup {
    pub k: usize,
    pub partition: Partition,
    pub config: ClusterConfig,
    pub options: RunOptions,
    pub flags: RunFlags,
}

impl RunSetup {
    /// Default memory budget and row-order φ for `partition`.
    pub fn new(k: usize, partition: Partition) -> Self {
        let config = ClusterConfig::new(partition.machines(), suggested_memory(&partition, k));
        Self {
            k,
            partition,
            config,
            options: RunOptions::default(),
            flags: RunFlags::default(),
        }
    }

    pub fn with_flags(mut self, flags: RunFlags) -> Self {
        self.options.pruning = if flags.compat_literal_alg1 {
            PruningMode::LiteralCap
        } else {
            PruningMode::Uncapped
        };
        self.options.selection = if flags.compat_literal_select {
            SelectionRule::LiteralMax
        } else {
            SelectionRule::MinKappa
        };
        self.flags = flags;
        self
    }
}

fn sequential_report(
    instance: &MetricInstance,
    solution: Solution,
    oracle: Option<f64>,
) -> AlgorithmReport {
    let all: Vec<PointId> = instance.ids().collect();
    let cost = covering_radius(&solution.centers, instance, &all).unwrap_or(f64::INFINITY);
    AlgorithmReport {
        algorithm: solution.algorithm,
        ratio: ratio(solution.radius, oracle, bound_for(solution.algorithm)),
        radius: solution.radius,
        cost,
        coverage_ok: center_covers(&solution.centers, instance, &all, solution.radius),
        centers: solution.centers,
        feasible: true,
        within_coreset: None,
        rounds: 0,
        points_communicated: 0,
        entries_communicated: 0,
        warnings: Vec::new(),
        coreset: None,
        trace: None,
    }
}

fn distributed_report(run: DistributedRun, oracle: Option<f64>) -> AlgorithmReport {
    let within_coreset = match &run.details {
        RunDetails::Alg2 { within_coreset, .. } => Some(*within_coreset),
        RunDetails::Baseline4 { .. } => None,
    };
    AlgorithmReport {
        algorithm: run.solution.algorithm,
        ratio: ratio(
            run.solution.radius,
            oracle,
            bound_for(run.solution.algorithm),
        ),
        radius: run.solution.radius,
        cost: run.cost,
        centers: run.solution.centers.clone(),
        feasible: run.feasible,
        coverage_ok: run.coverage_ok,
        within_coreset,
        rounds: run.rounds(),
        points_communicated: run.trace.points_communicated(),
        entries_communicated: run.trace.entries_communicated(),
        warnings: run.warnings,
        coreset: Some(run.coreset),
        trace: Some(run.trace),
    }
}

/// Run one algorithm; `oracle` is only used for the ratio.
pub fn run_algorithm(
    algorithm: Algorithm,
    instance: &MetricInstance,
    setup: &RunSetup,
    oracle: Option<f64>,
) -> Result<AlgorithmReport, ExperimentError> {
    let all: Vec<PointId> = instance.ids().collect();
    let k = setup.k;
    Ok(match algorithm {
        Algorithm::Exact => sequential_report(instance, exact_kcenter(instance, &all, k)?, oracle),
        Algorithm::Gonzalez => {
            let phi = PointOrder::identity(instance.len());
            let s = gonzalez(
                instance,
                &all,
                &phi,
                k.min(all.len()),
                FirstPoint::LowestRank,
            )?;
            sequential_report(instance, s, oracle)
        }
        Algorithm::Pruning => sequential_report(
            instance,
            classic_parametric_pruning(instance, k.min(all.len()))?,
            oracle,
        ),
        Algorithm::Alg2 => distributed_report(
            run_algorithm2(instance, &setup.partition, k, &setup.config, &setup.options)?,
            oracle,
        ),
        Algorithm::Baseline4 => distributed_report(
            run_baseline4(instance, &setup.partition, k, &setup.config, &setup.options)?,
            oracle,
        ),
    })
}

/// The exact optimum when the oracle guard allows it.
pub fn try_oracle(instance: &MetricInstance, k: usize) -> Option<f64> {
    let all: Vec<PointId> = instance.ids().collect();
    exact_kcenter(instance, &all, k).ok().map(|s| s.radius)
}

pub fn solve(
    instance: &MetricInstance,
    path: Option<&str>,
    algorithms: &[Algorithm],
    setup: &RunSetup,
) -> Result<ExperimentReport, ExperimentError> {
    let mut timing_ms = BTreeMap::new();
    let started = Instant::now();
    let oracle = try_oracle(instance, setup.k);
    timing_ms.insert("oracle".to_string(), started.elapsed().as_secs_f64() * 1e3);

    let mut reports = Vec::with_capacity(algorithms.len());
    let mut warnings = Vec::new();
    for &alg in algorithms {
        let started = Instant::now();
        let report = run_algorithm(alg, instance, setup, oracle)?;
        timing_ms.insert(
            alg.name().to_string(),
            started.elapsed().as_secs_f64() * 1e3,
        );
        for w in &report.warnings {
            if !warnings.contains(w) {
                warnings.push(w.clone());
            }
        }
        reports.push(report);
    }
    Ok(ExperimentReport {
        instance: InstanceSummary {
            path: path.map(str::to_string),
            n: instance.len(),
            metric: instance.kind(),
            dimension: instance.dimension(),
            k: setup.k,
            machines: setup.config.machines,
            memory: setup.config.memory,
        },
        oracle_radius: oracle,
        algorithms: reports,
        flags: setup.flags.clone(),
        warnings,
        timing_ms,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub algorithm: Algorithm,
    pub bound: f64,
    pub runs: usize,
    /// Runs with a zero optimum (no ratio).
    pub degenerate: usize,
    pub max_ratio: Option<f64>,
    pub mean_ratio: Option<f64>,
    pub violations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub seeds: Vec<u64>,
    pub runs: Vec<ExperimentReport>,
    pub aggregates: Vec<AggregateRow>,
    pub violations: usize,
}

impl CompareReport {
    pub fn aggregate(&self, alg: Algorithm) -> Option<&AggregateRow> {
        self.aggregates.iter().find(|a| a.algorithm == alg)
    }
}

pub fn aggregate(runs: &[ExperimentReport]) -> Vec<AggregateRow> {
    Algorithm::ALL
        .iter()
        .filter_map(|&alg| {
            let rows: Vec<&AlgorithmReport> =
                runs.iter().filter_map(|r| r.algorithm(alg)).collect();
            if rows.is_empty() {
                return None;
            }
            let ratios: Vec<f64> = rows.iter().filter_map(|r| r.ratio.value).collect();
            Some(AggregateRow {
                algorithm: alg,
                bound: bound_for(alg),
                runs: rows.len(),
                degenerate: rows
                    .iter()
                    .filter(|r| r.ratio.status == RatioStatus::Degenerate)
                    .count(),
                max_ratio: ratios.iter().copied().reduce(f64::max),
                mean_ratio: (!ratios.is_empty())
                    .then(|| ratios.iter().sum::<f64>() / ratios.len() as f64),
                violations: rows
                    .iter()
                    .filter(|r| r.ratio.within_bound == Some(false))
                    .count(),
            })
        })
        .collect()
}

/// Run every algorithm on a round-robin partition and on one seeded random
/// partition per seed. Requires the oracle to be available.
pub fn compare(
    instance: &MetricInstance,
    path: Option<&str>,
    k: usize,
    machines: usize,
    memory: Option<usize>,
    seeds: &[u64],
) -> Result<CompareReport, ExperimentError> {
    let all: Vec<PointId> = instance.ids().collect();
    exact_kcenter(instance, &all, k).map_err(ExperimentError::OracleUnavailable)?;

    let mut setups = vec![RunSetup::new(
        k,
        Partition::round_robin(instance.len(), machines),
    )];
    for &seed in seeds {
        setups.push(
            RunSetup::new(k, Partition::seeded_random(instance.len(), machines, seed)).with_flags(
                RunFlags {
                    partition: PartitionStrategy::Random,
                    seed,
                    ..Default::default()
                },
            ),
        );
    }
    if let Some(m) = memory {
        for setup in &mut setups {
            setup.config.memory = m;
        }
    }
    let runs = setups
        .par_iter()
        .map(|setup| solve(instance, path, &Algorithm::ALL, setup))
        .collect::<Result<Vec<_>, _>>()?;
    let aggregates = aggregate(&runs);
    let violations = aggregates.iter().map(|a| a.violations).sum();
    Ok(CompareReport {
        seeds: seeds.to_vec(),
        runs,
        aggregates,
        violations,
    })
}
