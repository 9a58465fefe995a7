use serde::{Deserialize, Serialize};

use super::{normalize_subset, Algorithm, Solution, SolverError};
use crate::metric::{MetricError, MetricInstance, PointId, PointOrder};

/// How the first Gonzalez center is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FirstPoint {
    #[default]
    LowestRank,
    Explicit(PointId),
}

/// Farthest-first traversal. Ties go to the lowest φ-rank; the traversal
/// stops early once every point is at distance 0 from a center.
pub fn gonzalez(
    instance: &MetricInstance,
    subset: &[PointId],
    phi: &PointOrder,
    k: usize,
    first: FirstPoint,
) -> Result<Solution, SolverError> {
    if k == 0 {
        return Err(SolverError::ZeroK);
    }
    let set = normalize_subset(instance, subset)?;
    if let Some(&p) = set.iter().find(|p| !phi.contains(**p)) {
        return Err(MetricError::UnknownPointId(p).into());
    }
    if k > set.len() {
        return Err(SolverError::KTooLarge { k, n: set.len() });
    }
    let ordered = phi.sorted(&set);
    let start = match first {
        FirstPoint::LowestRank => ordered[0],
        FirstPoint::Explicit(p) => {
            if set.binary_search(&p).is_err() {
                return Err(MetricError::UnknownPointId(p).into());
            }
            p
        }
    };

    let mut centers = vec![start];
    let mut nearest: Vec<f64> = ordered
        .iter()
        .map(|&p| instance.distance(start, p))
        .collect();
    while centers.len() < k {
        let mut best: Option<(usize, f64)> = None;
        for (i, &d) in nearest.iter().enumerate() {
            if best.is_none_or(|(_, bd)| d > bd) {
                best = Some((i, d));
            }
        }
        let (idx, far) = best.expect("nonempty subset");
        if far == 0.0 {
            break;
        }
        let next = ordered[idx];
        centers.push(next);
        for (slot, &p) in nearest.iter_mut().zip(&ordered) {
            let d = instance.distance(next, p);
            if d < *slot {
                *slot = d;
            }
        }
    }
    let radius = nearest.iter().copied().fold(0.0, f64::max);
    Ok(Solution::new(centers, radius, Algorithm::Gonzalez))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(xs: &[f64]) -> MetricInstance {
        MetricInstance::from_coordinates(xs.iter().map(|&x| vec![x]).collect()).unwrap()
    }

    fn ids(v: &[usize]) -> Vec<PointId> {
        v.iter().copied().map(PointId).collect()
    }

    #[test]
    fn two_pairs_on_a_line() {
        let m = line(&[0.0, 1.0, 10.0, 11.0]);
        let phi = PointOrder::identity(4);
        let s = gonzalez(
            &m,
            &ids(&[0, 1, 2, 3]),
            &phi,
            2,
            FirstPoint::Explicit(PointId(0)),
        )
        .unwrap();
        assert_eq!(s.centers, ids(&[0, 3]));
        assert_eq!(s.radius, 1.0);
    }

    #[test]
    fn k_equals_n_and_single_point() {
        let m = line(&[0.0, 1.0, 10.0, 11.0]);
        let phi = PointOrder::identity(4);
        let s = gonzalez(&m, &ids(&[0, 1, 2, 3]), &phi, 4, FirstPoint::LowestRank).unwrap();
        assert_eq!(s.radius, 0.0);
        assert_eq!(s.centers.len(), 4);
        let s = gonzalez(&m, &ids(&[2]), &phi, 1, FirstPoint::LowestRank).unwrap();
        assert_eq!((s.centers, s.radius), (ids(&[2]), 0.0));
    }

    #[test]
    fn ties_break_by_rank() {
        // Points 1 and 2 are both at distance 1 from point 0.
        let m = line(&[0.0, -1.0, 1.0]);
        let all = ids(&[0, 1, 2]);
        let s = gonzalez(
            &m,
            &all,
            &PointOrder::identity(3),
            2,
            FirstPoint::LowestRank,
        )
        .unwrap();
        assert_eq!(s.centers, ids(&[0, 1]));
        let phi = PointOrder::from_sequence(ids(&[0, 2, 1])).unwrap();
        let s = gonzalez(&m, &all, &phi, 2, FirstPoint::LowestRank).unwrap();
        assert_eq!(s.centers, ids(&[0, 2]));
    }

    #[test]
    fn duplicates_stop_early() {
        let m = line(&[4.0, 4.0, 4.0]);
        let s = gonzalez(
            &m,
            &ids(&[0, 1, 2]),
            &PointOrder::identity(3),
            3,
            FirstPoint::LowestRank,
        )
        .unwrap();
        assert_eq!((s.centers, s.radius), (ids(&[0]), 0.0));
    }

    #[test]
    fn explicit_start_outside_subset_is_rejected() {
        let m = line(&[0.0, 1.0, 2.0]);
        let err = gonzalez(
            &m,
            &ids(&[0, 1]),
            &PointOrder::identity(3),
            1,
            FirstPoint::Explicit(PointId(2)),
        );
        assert!(err.is_err());
    }
}
