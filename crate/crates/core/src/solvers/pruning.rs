use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{normalize_subset, Algorithm, Solution, SolverError};
use crate::metric::{MetricError, MetricInstance, PointId, PointOrder};

/// One `(rho, centers)` pair: `centers` is the greedy cover at radius `rho`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverRecord {
    pub rho: f64,
    /// Centers in the order the scan selected them.
    pub centers: Vec<PointId>,
    pub kappa: usize,
}

/// Cover records of one input set keyed by their center count.
///
/// Entries are recorded in increasing radius, and a size is only recorded
/// when it is smaller than every size recorded before it, so `rho` strictly
/// decreases as `kappa` grows.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct WRecord {
    pub source_set: Option<usize>,
    entries: BTreeMap<usize, CoverRecord>,
}

impl WRecord {
    pub fn new(source_set: Option<usize>) -> Self {
        Self {
            source_set,
            entries: BTreeMap::new(),
        }
    }

    pub fn with_source(mut self, source_set: usize) -> Self {
        self.source_set = Some(source_set);
        self
    }

    pub fn get(&self, kappa: usize) -> Option<&CoverRecord> {
        self.entries.get(&kappa)
    }

    /// Records in increasing `kappa`.
    pub fn entries(&self) -> impl DoubleEndedIterator<Item = &CoverRecord> {
        self.entries.values()
    }

    pub fn kappas(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Record with the most centers.
    pub fn largest(&self) -> Option<&CoverRecord> {
        self.entries.values().next_back()
    }

    /// Record with the smallest radius (the first one recorded).
    pub fn tightest(&self) -> Option<&CoverRecord> {
        self.entries.values().min_by(|a, b| a.rho.total_cmp(&b.rho))
    }

    /// Total number of center points over all records.
    pub fn point_count(&self) -> usize {
        self.entries.values().map(|r| r.centers.len()).sum()
    }

    fn insert(&mut self, kappa: usize, rho: f64, centers: Vec<PointId>) {
        self.entries.entry(kappa).or_insert(CoverRecord {
            rho,
            centers,
            kappa,
        });
    }
}

/// Variant of the record loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PruningMode {
    /// Uncapped greedy; record each new smaller size `<= k`.
    #[default]
    Uncapped,
    /// Greedy capped at `k` additions, recording only when the size equals a
    /// counter that starts at `k` and is decremented after each record.
    /// Records from this mode need not cover their input.
    LiteralCap,
}

/// Scan `ordered` and keep every point not within `rho` of an earlier pick.
/// Returns `None` as soon as more than `limit` points would be picked.
fn greedy_scan(
    instance: &MetricInstance,
    ordered: &[PointId],
    rho: f64,
    limit: usize,
) -> Option<Vec<PointId>> {
    let mut picked: Vec<PointId> = Vec::new();
    for &s in ordered {
        if !picked.iter().any(|&c| instance.distance(c, s) <= rho) {
            if picked.len() == limit {
                return None;
            }
            picked.push(s);
        }
    }
    Some(picked)
}

fn ordered_subset(
    instance: &MetricInstance,
    subset: &[PointId],
    phi: &PointOrder,
) -> Result<Vec<PointId>, SolverError> {
    let set = normalize_subset(instance, subset)?;
    if let Some(&p) = set.iter().find(|p| !phi.contains(**p)) {
        return Err(MetricError::UnknownPointId(p).into());
    }
    Ok(phi.sorted(&set))
}

/// Distinct pairwise distances of `points` in increasing order, always
/// starting with 0 (the self distance).
fn candidate_radii(instance: &MetricInstance, points: &[PointId]) -> Vec<f64> {
    let mut radii = Vec::with_capacity(points.len() * points.len().saturating_sub(1) / 2 + 1);
    radii.push(0.0);
    for (a, &p) in points.iter().enumerate() {
        for &q in &points[a + 1..] {
            radii.push(instance.distance(p, q));
        }
    }
    radii.sort_unstable_by(f64::total_cmp);
    radii.dedup();
    radii
}

/// φ-first maximal independent set of the disk graph of radius `rho` on
/// `subset`. The result dominates that graph, so it covers `subset` at `rho`.
pub fn greedy_cover(
    instance: &MetricInstance,
    subset: &[PointId],
    phi: &PointOrder,
    rho: f64,
) -> Result<Vec<PointId>, SolverError> {
    if rho.is_nan() || rho < 0.0 {
        return Err(MetricError::InvalidRadius(rho).into());
    }
    let ordered = ordered_subset(instance, subset, phi)?;
    Ok(greedy_scan(instance, &ordered, rho, usize::MAX).expect("unbounded scan"))
}

/// Permutation-stable parametric pruning in the default (uncapped) mode.
pub fn permutation_stable_pruning(
    instance: &MetricInstance,
    subset: &[PointId],
    phi: &PointOrder,
    k: usize,
) -> Result<WRecord, SolverError> {
    pruning_with(instance, subset, phi, k, PruningMode::Uncapped)
}

/// Sweep the candidate radii in increasing order, run the φ-ordered greedy
/// at each one and collect the resulting cover records.
pub fn pruning_with(
    instance: &MetricInstance,
    subset: &[PointId],
    phi: &PointOrder,
    k: usize,
    mode: PruningMode,
) -> Result<WRecord, SolverError> {
    if k == 0 {
        return Err(SolverError::ZeroK);
    }
    let ordered = ordered_subset(instance, subset, phi)?;
    if k > ordered.len() {
        return Err(SolverError::KTooLarge {
            k,
            n: ordered.len(),
        });
    }
    let radii = candidate_radii(instance, &ordered);
    let mut record = WRecord::new(None);
    match mode {
        PruningMode::Uncapped => {
            let mut smallest = k + 1;
            for &rho in &radii {
                if let Some(cover) = greedy_scan(instance, &ordered, rho, smallest - 1) {
                    smallest = cover.len();
                    record.insert(smallest, rho, cover);
                    if smallest == 1 {
                        break;
                    }
                }
            }
        }
        PruningMode::LiteralCap => {
            let mut counter = k;
            for &rho in &radii {
                let mut picked: Vec<PointId> = Vec::new();
                for &s in &ordered {
                    if picked.len() < k && !picked.iter().any(|&c| instance.distance(c, s) <= rho) {
                        picked.push(s);
                    }
                }
                if picked.len() == counter {
                    record.insert(counter, rho, picked);
                    counter -= 1;
                    if counter == 0 {
                        break;
                    }
                }
            }
        }
    }
    Ok(record)
}

/// Classic parametric pruning over the whole instance in row order: the
/// smallest radius whose greedy cover has at most `k` centers.
pub fn classic_parametric_pruning(
    instance: &MetricInstance,
    k: usize,
) -> Result<Solution, SolverError> {
    let all: Vec<PointId> = instance.ids().collect();
    let phi = PointOrder::identity(instance.len());
    let record = permutation_stable_pruning(instance, &all, &phi, k)?;
    let best = record
        .tightest()
        .expect("sweep always records a single-center cover");
    Ok(Solution::new(
        best.centers.clone(),
        best.rho,
        Algorithm::Pruning,
    ))
}
