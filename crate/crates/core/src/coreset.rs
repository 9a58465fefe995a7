//! Composable and ordered composable coresets for k-center.

use serde::{Deserialize, Serialize};

use crate::metric::{MetricError, MetricInstance, PointId, PointOrder};
use crate::solvers::{exact_k_subset_radius, SolverError, WRecord};

/// The summary `g(S_i)` one input set contributes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoresetPart {
    /// 1-based index of the input set.
    pub source_set: usize,
    pub points: Vec<PointId>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub payload: Option<WRecord>,
}

impl CoresetPart {
    pub fn new(source_set: usize, points: Vec<PointId>) -> Self {
        Self {
            source_set,
            points,
            payload: None,
        }
    }
}

/// A point of the merged coreset with its global rank.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankedPoint {
    pub id: PointId,
    pub rank: usize,
}

/// Union of the parts' points, deduplicated and sorted by rank.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderedCoreset {
    pub parts: Vec<CoresetPart>,
    pub merged: Vec<RankedPoint>,
}

impl OrderedCoreset {
    pub fn ids(&self) -> Vec<PointId> {
        self.merged.iter().map(|p| p.id).collect()
    }

    pub fn len(&self) -> usize {
        self.merged.len()
    }

    pub fn is_empty(&self) -> bool {
        self.merged.is_empty()
    }

    pub fn contains(&self, p: PointId) -> bool {
        self.merged.iter().any(|r| r.id == p)
    }
}

/// Merge parts into an ordered coreset. The result depends only on the set
/// of parts: parts are kept sorted by source set and their points by rank.
pub fn assemble(parts: Vec<CoresetPart>, phi: &PointOrder) -> Result<OrderedCoreset, MetricError> {
    let mut parts = parts;
    for part in &mut parts {
        if let Some(&p) = part.points.iter().find(|p| !phi.contains(**p)) {
            return Err(MetricError::UnknownPointId(p));
        }
        part.points = phi.sorted(&part.points);
    }
    parts.sort_by(|a, b| {
        a.source_set
            .cmp(&b.source_set)
            .then_with(|| a.points.cmp(&b.points))
    });
    let all: Vec<PointId> = parts
        .iter()
        .flat_map(|p| p.points.iter().copied())
        .collect();
    let merged = phi
        .sorted(&all)
        .into_iter()
        .map(|id| RankedPoint {
            id,
            rank: phi.rank(id),
        })
        .collect();
    Ok(OrderedCoreset { parts, merged })
}

/// Best k-center cost of all of `instance` using centers from the coreset,
/// divided by the optimal radius. A zero optimum gives 1.0 when the coreset
/// also reaches zero and infinity otherwise.
pub fn composition_ratio(
    instance: &MetricInstance,
    coreset: &OrderedCoreset,
    k: usize,
    oracle_radius: f64,
) -> Result<f64, SolverError> {
    let all: Vec<PointId> = instance.ids().collect();
    let restricted = exact_k_subset_radius(instance, &coreset.ids(), &all, k)?;
    Ok(if oracle_radius > 0.0 {
        restricted.radius / oracle_radius
    } else if restricted.radius == 0.0 {
        1.0
    } else {
        f64::INFINITY
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solvers::exact_kcenter;

    fn ids(v: &[usize]) -> Vec<PointId> {
        v.iter().copied().map(PointId).collect()
    }

    #[test]
    fn assemble_dedups_and_sorts() {
        let phi = PointOrder::identity(6);
        let c = assemble(
            vec![
                CoresetPart::new(1, ids(&[0, 3])),
                CoresetPart::new(2, ids(&[3, 5])),
            ],
            &phi,
        )
        .unwrap();
        assert_eq!(c.ids(), ids(&[0, 3, 5]));
        assert_eq!(
            c.merged[2],
            RankedPoint {
                id: PointId(5),
                rank: 6
            }
        );

        let rev = assemble(
            vec![
                CoresetPart::new(2, ids(&[5, 3])),
                CoresetPart::new(1, ids(&[3, 0])),
            ],
            &phi,
        )
        .unwrap();
        assert_eq!(rev, c);
    }

    #[test]
    fn assemble_follows_phi_not_ids() {
        let phi = PointOrder::from_sequence(ids(&[2, 0, 1])).unwrap();
        let c = assemble(vec![CoresetPart::new(1, ids(&[0, 1, 2]))], &phi).unwrap();
        assert_eq!(c.ids(), ids(&[2, 0, 1]));
    }

    #[test]
    fn assemble_rejects_unknown_ids() {
        let phi = PointOrder::identity(2);
        assert_eq!(
            assemble(vec![CoresetPart::new(1, ids(&[4]))], &phi),
            Err(MetricError::UnknownPointId(PointId(4)))
        );
    }

    #[test]
    fn ratio_of_full_set_is_one() {
        let m = MetricInstance::from_coordinates(vec![vec![0.0], vec![1.0], vec![4.0], vec![9.0]])
            .unwrap();
        let all: Vec<PointId> = m.ids().collect();
        let r = exact_kcenter(&m, &all, 2).unwrap().radius;
        let c = assemble(vec![CoresetPart::new(1, all)], &PointOrder::identity(4)).unwrap();
        assert_eq!(composition_ratio(&m, &c, 2, r).unwrap(), 1.0);
    }

    #[test]
    fn ratio_on_coincident_clusters() {
        // Two clusters of three coincident points each, far apart.
        let pts = [0.0, 0.0, 0.0, 50.0, 50.0, 50.0]
            .map(|x| vec![x, 0.0])
            .to_vec();
        let m = MetricInstance::from_coordinates(pts).unwrap();
        let all: Vec<PointId> = m.ids().collect();
        let r = exact_kcenter(&m, &all, 2).unwrap().radius;
        assert_eq!(r, 0.0);
        let c = assemble(
            vec![
                CoresetPart::new(1, ids(&[1])),
                CoresetPart::new(2, ids(&[4])),
            ],
            &PointOrder::identity(6),
        )
        .unwrap();
        assert_eq!(composition_ratio(&m, &c, 2, r).unwrap(), 1.0);
        let lopsided = assemble(
            vec![CoresetPart::new(1, ids(&[1, 2]))],
            &PointOrder::identity(6),
        )
        .unwrap();
        assert_eq!(
            composition_ratio(&m, &lopsided, 2, r).unwrap(),
            f64::INFINITY
        );
    }
}
