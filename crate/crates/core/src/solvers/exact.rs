use itertools::Itertools;

use super::{normalize_subset, Algorithm, Solution, SolverError};
use crate::metric::{MetricInstance, PointId};

/// Largest candidate set the oracle accepts.
pub const ORACLE_MAX_POINTS: usize = 20;
/// Largest number of k-subsets the oracle will enumerate.
pub const ORACLE_MAX_COMBINATIONS: u128 = 1_000_000;

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i as u128 + 1))
}

/// Whether the oracle accepts `n` candidates and `k` centers.
pub fn oracle_fits(n: usize, k: usize) -> bool {
    n <= ORACLE_MAX_POINTS && binomial(n, k.min(n)) <= ORACLE_MAX_COMBINATIONS
}

/// Exact k-center on `subset` by enumerating every k-subset of centers.
pub fn exact_kcenter(
    instance: &MetricInstance,
    subset: &[PointId],
    k: usize,
) -> Result<Solution, SolverError> {
    exact_k_subset_radius(instance, subset, subset, k)
}

/// Best covering radius of `targets` using at most `k` centers drawn from
/// `candidates`. The first optimal subset in lexicographic order is returned.
pub fn exact_k_subset_radius(
    instance: &MetricInstance,
    candidates: &[PointId],
    targets: &[PointId],
    k: usize,
) -> Result<Solution, SolverError> {
    if k == 0 {
        return Err(SolverError::ZeroK);
    }
    let candidates = normalize_subset(instance, candidates)?;
    instance.check_ids(targets)?;
    let n = candidates.len();
    let k = k.min(n);
    let combinations = binomial(n, k);
    if n > ORACLE_MAX_POINTS || combinations > ORACLE_MAX_COMBINATIONS {
        return Err(SolverError::InstanceTooLarge {
            points: n,
            combinations,
        });
    }

    // Row-per-target distance table, so each subset costs |targets| * k lookups.
    let table: Vec<Vec<f64>> = targets
        .iter()
        .map(|&t| {
            candidates
                .iter()
                .map(|&c| instance.distance(c, t))
                .collect()
        })
        .collect();

    let mut best: Option<(f64, Vec<usize>)> = None;
    for combo in (0..n).combinations(k) {
        let mut worst = 0.0f64;
        for row in &table {
            let near = combo.iter().map(|&c| row[c]).fold(f64::INFINITY, f64::min);
            worst = worst.max(near);
            if best.as_ref().is_some_and(|(b, _)| worst >= *b) {
                break;
            }
        }
        if best.as_ref().is_none_or(|(b, _)| worst < *b) {
            best = Some((worst, combo));
        }
    }
    let (radius, combo) = best.expect("at least one subset");
    let centers = combo.into_iter().map(|i| candidates[i]).collect();
    Ok(Solution::new(centers, radius, Algorithm::Exact))
}
