//! The two-phase distributed k-center algorithm on the simulator, and the
//! Gonzalez composable-coreset baseline it is compared against.
//!
//! Round layout of the distributed algorithm:
//!
//! 1. every machine runs permutation-stable pruning on `S_i` and sends its
//!    size-k cover `C_i` (with radius `r_i`) to machine 1;
//! 2. machine 1 merges the covers into the ordered coreset `C` and
//!    broadcasts it;
//! 3. every machine promotes `C` to the front of the order, sweeps
//!    `S_i ∪ C` once and sends all of its cover records to machine 1;
//! 4. machine 1 picks the smallest candidate radius at which the
//!    per-machine covers union to at most `k` centers.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coreset::{assemble, CoresetPart, OrderedCoreset};
use crate::metric::{
    center_covers, covering_radius, reorder_prioritizing, MetricError, MetricInstance, PointId,
    PointOrder,
};
use crate::mpcsim::{
    Cluster, ClusterConfig, ClusterTrace, MachineId, MpcError, Partition, Payload, Schedule,
};
use crate::solvers::{
    gonzalez, greedy_cover, pruning_with, Algorithm, FirstPoint, PruningMode, Solution,
    SolverError, WRecord,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DkError {
    #[error("k must be at least 1")]
    ZeroK,
    #[error("ordering covers {got} points, instance has {expected}")]
    OrderMismatch { expected: usize, got: usize },
    #[error("selected centers do not cover the input at radius {radius}")]
    CoverageViolation { radius: f64 },
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Mpc(#[from] MpcError),
    #[error(transparent)]
    Metric(#[from] MetricError),
}

/// How machine 1 picks `t_i` for a candidate radius.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SelectionRule {
    /// Fewest-centers record whose radius is within the candidate.
    #[default]
    MinKappa,
    /// Most-centers record whose radius is within the candidate.
    LiteralMax,
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Global order; row order when absent.
    pub phi: Option<PointOrder>,
    pub pruning: PruningMode,
    pub selection: SelectionRule,
    pub schedule: Schedule,
}

/// Round-one output of one machine.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalCoreset {
    pub centers: Vec<PointId>,
    pub radius: f64,
}

/// Cover `S_i` with the largest recorded cover size (at most `k`).
///
/// Sets with at most `k` points, or whose distinct points number fewer
/// than `k`, end up with the zero-radius cover of their distinct points.
pub fn round1_local_coreset(
    instance: &MetricInstance,
    local: &[PointId],
    phi: &PointOrder,
    k: usize,
    mode: PruningMode,
) -> Result<LocalCoreset, SolverError> {
    if local.is_empty() {
        return Ok(LocalCoreset {
            centers: Vec::new(),
            radius: 0.0,
        });
    }
    if local.len() <= k {
        return Ok(LocalCoreset {
            centers: greedy_cover(instance, local, phi, 0.0)?,
            radius: 0.0,
        });
    }
    let record = pruning_with(instance, local, phi, k, mode)?;
    let best = record.largest().expect("sweep records at least one cover");
    Ok(LocalCoreset {
        centers: best.centers.clone(),
        radius: best.rho,
    })
}

/// Sweep `S_i ∪ C` under the reordered `phi`. One pass yields a record for
/// every achieved cover size up to `k`.
pub fn round2_family(
    instance: &MetricInstance,
    local: &[PointId],
    broadcast: &[PointId],
    phi: &PointOrder,
    k: usize,
    mode: PruningMode,
) -> Result<WRecord, SolverError> {
    let union: Vec<PointId> = local
        .iter()
        .chain(broadcast)
        .copied()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let k = k.min(union.len());
    pruning_with(instance, &union, phi, k, mode)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    pub rho: f64,
    /// Chosen record size per machine; `None` if the machine had none.
    pub t: Vec<Option<usize>>,
    /// Union of the chosen records' centers, in increasing id order.
    pub centers: Vec<PointId>,
    pub feasible: bool,
}

/// Scan the recorded radii in increasing order and return the first one at
/// which the chosen per-machine records union to at most `k` centers. When
/// none does, the attempt with the smallest union is reported as infeasible.
pub fn select_solution(families: &[WRecord], k: usize, rule: SelectionRule) -> SelectionResult {
    let mut radii: Vec<f64> = families
        .iter()
        .flat_map(|f| f.entries().map(|e| e.rho))
        .collect();
    radii.sort_unstable_by(f64::total_cmp);
    radii.dedup();

    let mut best: Option<SelectionResult> = None;
    for &rho in &radii {
        let chosen: Option<Vec<_>> = families
            .iter()
            .map(|f| match rule {
                SelectionRule::MinKappa => f.entries().find(|e| e.rho <= rho),
                SelectionRule::LiteralMax => f.entries().rev().find(|e| e.rho <= rho),
            })
            .collect();
        let Some(chosen) = chosen else { continue };
        let union: BTreeSet<PointId> = chosen
            .iter()
            .flat_map(|e| e.centers.iter().copied())
            .collect();
        let attempt = SelectionResult {
            rho,
            t: chosen.iter().map(|e| Some(e.kappa)).collect(),
            centers: union.into_iter().collect(),
            feasible: false,
        };
        if attempt.centers.len() <= k {
            return SelectionResult {
                feasible: true,
                ..attempt
            };
        }
        if best
            .as_ref()
            .is_none_or(|b| attempt.centers.len() < b.centers.len())
        {
            best = Some(attempt);
        }
    }
    best.unwrap_or(SelectionResult {
        rho: 0.0,
        t: vec![None; families.len()],
        centers: Vec::new(),
        feasible: false,
    })
}

/// Messages exchanged by the distributed algorithm.
#[derive(Debug, Clone, PartialEq)]
enum Alg2Msg {
    Coreset(LocalCoreset),
    Broadcast(Vec<PointId>),
    Family(WRecord),
}

impl Payload for Alg2Msg {
    fn point_ids(&self) -> Vec<PointId> {
        match self {
            Alg2Msg::Coreset(c) => c.centers.clone(),
            Alg2Msg::Broadcast(points) => points.clone(),
            Alg2Msg::Family(w) => w
                .entries()
                .flat_map(|e| e.centers.iter().copied())
                .collect(),
        }
    }

    fn entry_count(&self) -> usize {
        match self {
            Alg2Msg::Coreset(_) => 1,
            Alg2Msg::Broadcast(_) => 0,
            Alg2Msg::Family(w) => w.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RunDetails {
    Alg2 {
        local: Vec<LocalCoreset>,
        families: Vec<WRecord>,
        selection: SelectionResult,
        /// Whether every selected center came from the broadcast coreset.
        within_coreset: bool,
    },
    Baseline4 {
        local: Vec<Solution>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributedRun {
    pub solution: Solution,
    /// Actual covering radius of the selected centers over the whole input.
    pub cost: f64,
    pub coverage_ok: bool,
    pub feasible: bool,
    pub coreset: OrderedCoreset,
    pub trace: ClusterTrace,
    pub warnings: Vec<String>,
    pub details: RunDetails,
}

impl DistributedRun {
    pub fn rounds(&self) -> usize {
        self.trace.rounds.len()
    }

    pub fn points_communicated(&self) -> usize {
        self.trace.points_communicated()
    }
}

/// `kL` points gathered, `kL` points broadcast to each of `L` machines and
/// at most `k` records of at most `k` points from each machine.
pub fn communication_bound(k: usize, machines: usize) -> usize {
    k * machines * (machines + 1) + machines * k * k
}

/// A memory budget that fits every stage of the distributed algorithm for
/// this partition: the largest set plus the coreset plus the gathered records.
pub fn suggested_memory(partition: &Partition, k: usize) -> usize {
    let largest = partition.sets().iter().map(Vec::len).max().unwrap_or(0);
    let l = partition.machines();
    largest + k * l + l * k * k
}

fn resolve_order(instance: &MetricInstance, options: &RunOptions) -> Result<PointOrder, DkError> {
    let phi = options
        .phi
        .clone()
        .unwrap_or_else(|| PointOrder::identity(instance.len()));
    if phi.len() != instance.len() {
        return Err(DkError::OrderMismatch {
            expected: instance.len(),
            got: phi.len(),
        });
    }
    Ok(phi)
}

fn budget_warning(k: usize, config: &ClusterConfig) -> Option<String> {
    let need = k * k * config.machines;
    (need > config.memory).then(|| {
        format!(
            "k^2 L = {need} exceeds the memory budget m = {}; the run is outside the model's regime",
            config.memory
        )
    })
}

/// Run the distributed 2-approximation on the simulator.
pub fn run_algorithm2(
    instance: &MetricInstance,
    partition: &Partition,
    k: usize,
    config: &ClusterConfig,
    options: &RunOptions,
) -> Result<DistributedRun, DkError> {
    if k == 0 {
        return Err(DkError::ZeroK);
    }
    let phi = resolve_order(instance, options)?;
    let mode = options.pruning;
    let warnings: Vec<String> = budget_warning(k, config).into_iter().collect();
    let mut cluster: Cluster<Alg2Msg> = Cluster::scatter(instance, partition, config.clone())?
        .with_schedule(options.schedule.clone());

    let local = cluster
        .run_round("local-coreset", |view, out| {
            let lc = round1_local_coreset(instance, view.local, &phi, k, mode)?;
            if !lc.centers.is_empty() {
                out.send(MachineId::FIRST, Alg2Msg::Coreset(lc.clone()));
            }
            Ok::<_, SolverError>(lc)
        })?
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;

    let parts: Vec<CoresetPart> = cluster
        .machine(MachineId::FIRST)?
        .inbox
        .iter()
        .filter_map(|d| match &d.payload {
            Alg2Msg::Coreset(c) => Some(CoresetPart::new(d.from.0, c.centers.clone())),
            _ => None,
        })
        .collect();
    let coreset = assemble(parts, &phi)?;
    let broadcast = coreset.ids();
    cluster.broadcast(
        "broadcast-coreset",
        MachineId::FIRST,
        Alg2Msg::Broadcast(broadcast.clone()),
    )?;

    let families = cluster
        .run_round("families", |view, out| {
            let c: &[PointId] = view
                .inbox
                .iter()
                .find_map(|d| match &d.payload {
                    Alg2Msg::Broadcast(points) => Some(points.as_slice()),
                    _ => None,
                })
                .unwrap_or(&[]);
            let reordered = reorder_prioritizing(&phi, c).map_err(SolverError::from)?;
            let family =
                round2_family(instance, view.local, c, &reordered, k, mode)?.with_source(view.id.0);
            out.send(MachineId::FIRST, Alg2Msg::Family(family.clone()));
            Ok::<_, SolverError>(family)
        })?
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;

    let rule = options.selection;
    let selection = cluster
        .run_round("select", |view, _| {
            (view.id == MachineId::FIRST).then(|| {
                let gathered: Vec<WRecord> = view
                    .inbox
                    .iter()
                    .filter_map(|d| match &d.payload {
                        Alg2Msg::Family(w) => Some(w.clone()),
                        _ => None,
                    })
                    .collect();
                select_solution(&gathered, k, rule)
            })
        })?
        .swap_remove(0)
        .expect("machine 1 selects");

    let all: Vec<PointId> = instance.ids().collect();
    let coverage_ok = center_covers(&selection.centers, instance, &all, selection.rho);
    if !coverage_ok && mode == PruningMode::Uncapped {
        return Err(DkError::CoverageViolation {
            radius: selection.rho,
        });
    }
    let cost = covering_radius(&selection.centers, instance, &all).unwrap_or(f64::INFINITY);
    let within_coreset = selection.centers.iter().all(|p| broadcast.contains(p));
    let solution = Solution::new(selection.centers.clone(), selection.rho, Algorithm::Alg2);
    Ok(DistributedRun {
        solution,
        cost,
        coverage_ok,
        feasible: selection.feasible,
        coreset,
        trace: cluster.trace(),
        warnings,
        details: RunDetails::Alg2 {
            local,
            families,
            selection,
            within_coreset,
        },
    })
}

/// Two-round baseline: Gonzalez on every machine, Gonzalez again on the
/// union at machine 1, radius evaluated over the whole input.
pub fn run_baseline4(
    instance: &MetricInstance,
    partition: &Partition,
    k: usize,
    config: &ClusterConfig,
    options: &RunOptions,
) -> Result<DistributedRun, DkError> {
    if k == 0 {
        return Err(DkError::ZeroK);
    }
    let phi = resolve_order(instance, options)?;
    let warnings: Vec<String> = budget_warning(k, config).into_iter().collect();
    let mut cluster: Cluster<Vec<PointId>> = Cluster::scatter(instance, partition, config.clone())?
        .with_schedule(options.schedule.clone());

    let local = cluster
        .run_round("local-gonzalez", |view, out| {
            if view.local.is_empty() {
                return Ok(None);
            }
            let s = gonzalez(
                instance,
                view.local,
                &phi,
                k.min(view.local.len()),
                FirstPoint::LowestRank,
            )?
            .on_machine(view.id.0);
            out.send(MachineId::FIRST, s.centers.clone());
            Ok::<_, SolverError>(Some(s))
        })?
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .flatten()
        .collect::<Vec<_>>();

    let merged = cluster
        .run_round("merge-gonzalez", |view, _| {
            if view.id != MachineId::FIRST {
                return Ok(None);
            }
            let parts: Vec<CoresetPart> = view
                .inbox
                .iter()
                .map(|d| CoresetPart::new(d.from.0, d.payload.clone()))
                .collect();
            let coreset = assemble(parts, &phi).map_err(SolverError::from)?;
            let union = coreset.ids();
            let s = gonzalez(
                instance,
                &union,
                &phi,
                k.min(union.len()),
                FirstPoint::LowestRank,
            )?;
            Ok::<_, SolverError>(Some((coreset, s)))
        })?
        .swap_remove(0)?
        .expect("machine 1 merges");
    let (coreset, merged) = merged;

    let all: Vec<PointId> = instance.ids().collect();
    let cost = covering_radius(&merged.centers, instance, &all).expect("nonempty centers");
    let solution = Solution::new(merged.centers, cost, Algorithm::Baseline4);
    Ok(DistributedRun {
        solution,
        cost,
        coverage_ok: true,
        feasible: true,
        coreset,
        trace: cluster.trace(),
        warnings,
        details: RunDetails::Baseline4 { local },
    })
}
