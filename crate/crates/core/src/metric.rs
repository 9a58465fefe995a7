//! Finite metric spaces, point orderings, disk graphs and the center-cover
//! predicate.
//!
//! Every algorithm in the crate works on a [`MetricInstance`] addressed by
//! dense [`PointId`]s together with a [`PointOrder`] that fixes the scan
//! order of the greedy procedures. Distances are compared exactly as stored;
//! tolerances only apply while validating raw input.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Dense point identifier: an instance with `n` points uses ids `0..n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PointId(pub usize);

impl PointId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for PointId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricError {
    #[error("instance has no points")]
    Empty,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is asymmetric at ({row}, {col}): {forward} vs {backward}")]
    AsymmetricMatrix {
        row: usize,
        col: usize,
        forward: f64,
        backward: f64,
    },
    #[error("negative distance {value} at ({row}, {col})")]
    NegativeDistance { row: usize, col: usize, value: f64 },
    #[error("non-zero self distance {value} at point {point}")]
    NonZeroDiagonal { point: usize, value: f64 },
    #[error("non-finite value at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("triangle inequality violated on ({p}, {q}, {r}): d(p,r) = {direct} > d(p,q) + d(q,r) = {detour}")]
    TriangleViolation {
        p: usize,
        q: usize,
        r: usize,
        direct: f64,
        detour: f64,
    },
    #[error("unknown point id {0}")]
    UnknownPointId(PointId),
    #[error("ordering is not a bijection onto 1..={0}")]
    NotABijection(usize),
    #[error("negative radius {0}")]
    InvalidRadius(f64),
}

/// How raw distance data is checked before it becomes an instance.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationPolicy {
    /// Maximum allowed `|d(p,q) - d(q,p)|` before symmetrization.
    pub symmetry_tolerance: f64,
    /// Slack allowed on `d(p,r) <= d(p,q) + d(q,r)`.
    pub triangle_tolerance: f64,
    /// Instances with at most this many points get an exhaustive triangle check.
    pub exhaustive_limit: usize,
    /// Seed for the sampled triangle check (3n² triples) above the limit.
    pub sample_seed: u64,
}

impl Default for ValidationPolicy {
    fn default() -> Self {
        Self {
            symmetry_tolerance: 1e-9,
            triangle_tolerance: 1e-9,
            exhaustive_limit: 64,
            sample_seed: 0x006b_6365_6e74_6572,
        }
    }
}

/// Raw input for [`build_instance`].
#[derive(Debug, Clone, PartialEq)]
pub enum RawMetric {
    Matrix(Vec<Vec<f64>>),
    Coordinates(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MetricKind {
    Matrix,
    Euclidean,
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricKind::Matrix => f.write_str("matrix"),
            MetricKind::Euclidean => f.write_str("euclidean"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Storage {
    /// Row-major `n × n` distances.
    Matrix { n: usize, dist: Vec<f64> },
    /// Row-major `n × dim` coordinates.
    Euclidean { dim: usize, coords: Vec<f64> },
}

/// A validated finite metric space. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricInstance {
    storage: Storage,
    labels: Option<Vec<String>>,
}

/// Validate raw data and build an instance. Matrix input is symmetrized by
/// averaging once the symmetry tolerance check has passed.
pub fn build_instance(
    source: RawMetric,
    policy: &ValidationPolicy,
) -> Result<MetricInstance, MetricError> {
    match source {
        RawMetric::Matrix(rows) => MetricInstance::from_matrix(rows, policy),
        RawMetric::Coordinates(points) => MetricInstance::from_coordinates(points),
    }
}

impl MetricInstance {
    pub fn from_matrix(
        rows: Vec<Vec<f64>>,
        policy: &ValidationPolicy,
    ) -> Result<Self, MetricError> {
        let n = rows.len();
        if n == 0 {
            return Err(MetricError::Empty);
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(MetricError::DimensionMismatch(format!(
                    "row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            for (j, &value) in row.iter().enumerate() {
                if !value.is_finite() {
                    return Err(MetricError::NonFinite { row: i, col: j });
                }
                if value < 0.0 {
                    return Err(MetricError::NegativeDistance {
                        row: i,
                        col: j,
                        value,
                    });
                }
            }
        }
        let mut dist = vec![0.0; n * n];
        for i in 0..n {
            if rows[i][i] != 0.0 {
                return Err(MetricError::NonZeroDiagonal {
                    point: i,
                    value: rows[i][i],
                });
            }
            for j in (i + 1)..n {
                let (forward, backward) = (rows[i][j], rows[j][i]);
                if (forward - backward).abs() > policy.symmetry_tolerance {
                    return Err(MetricError::AsymmetricMatrix {
                        row: i,
                        col: j,
                        forward,
                        backward,
                    });
                }
                // `+ 0.0` normalizes a negative zero.
                let value = if forward == backward {
                    forward + 0.0
                } else {
                    (forward + backward) / 2.0
                };
                dist[i * n + j] = value;
                dist[j * n + i] = value;
            }
        }
        let instance = Self {
            storage: Storage::Matrix { n, dist },
            labels: None,
        };
        instance.check_triangle(policy)?;
        Ok(instance)
    }

    pub fn from_coordinates(points: Vec<Vec<f64>>) -> Result<Self, MetricError> {
        let Some(first) = points.first() else {
            return Err(MetricError::Empty);
        };
        let dim = first.len();
        if dim == 0 {
            return Err(MetricError::DimensionMismatch(
                "points must have at least one coordinate".into(),
            ));
        }
        let mut coords = Vec::with_capacity(points.len() * dim);
        for (i, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(MetricError::DimensionMismatch(format!(
                    "point {i} has dimension {}, expected {dim}",
                    p.len()
                )));
            }
            for (j, &x) in p.iter().enumerate() {
                if !x.is_finite() {
                    return Err(MetricError::NonFinite { row: i, col: j });
                }
            }
            coords.extend_from_slice(p);
        }
        Ok(Self {
            storage: Storage::Euclidean { dim, coords },
            labels: None,
        })
    }

    /// Attach external names; must have one label per point.
    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self, MetricError> {
        if labels.len() != self.len() {
            return Err(MetricError::DimensionMismatch(format!(
                "{} labels for {} points",
                labels.len(),
                self.len()
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        match &self.storage {
            Storage::Matrix { n, .. } => *n,
            Storage::Euclidean { dim, coords } => coords.len() / dim,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn kind(&self) -> MetricKind {
        match self.storage {
            Storage::Matrix { .. } => MetricKind::Matrix,
            Storage::Euclidean { .. } => MetricKind::Euclidean,
        }
    }

    /// Coordinate dimension for Euclidean instances.
    pub fn dimension(&self) -> Option<usize> {
        match self.storage {
            Storage::Euclidean { dim, .. } => Some(dim),
            Storage::Matrix { .. } => None,
        }
    }

    pub fn coordinates(&self, p: PointId) -> Option<&[f64]> {
        match &self.storage {
            Storage::Euclidean { dim, coords } => Some(&coords[p.0 * dim..(p.0 + 1) * dim]),
            Storage::Matrix { .. } => None,
        }
    }

    pub fn label(&self, p: PointId) -> Option<&str> {
        self.labels.as_ref().map(|l| l[p.0].as_str())
    }

    pub fn contains(&self, p: PointId) -> bool {
        p.0 < self.len()
    }

    pub fn ids(&self) -> impl Iterator<Item = PointId> + '_ {
        (0..self.len()).map(PointId)
    }

    /// Distance between two points. Panics on ids outside the instance.
    #[inline]
    pub fn distance(&self, p: PointId, q: PointId) -> f64 {
        match &self.storage {
            Storage::Matrix { n, dist } => dist[p.0 * n + q.0],
            Storage::Euclidean { dim, coords } => {
                if p == q {
                    return 0.0;
                }
                let a = &coords[p.0 * dim..(p.0 + 1) * dim];
                let b = &coords[q.0 * dim..(q.0 + 1) * dim];
                a.iter()
                    .zip(b)
                    .map(|(x, y)| (x - y) * (x - y))
                    .sum::<f64>()
                    .sqrt()
            }
        }
    }

    /// Full matrix view of the instance (used when writing matrix files).
    pub fn to_matrix(&self) -> Vec<Vec<f64>> {
        let n = self.len();
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| self.distance(PointId(i), PointId(j)))
                    .collect()
            })
            .collect()
    }

    pub fn check_ids(&self, ids: &[PointId]) -> Result<(), MetricError> {
        match ids.iter().find(|p| !self.contains(**p)) {
            Some(&p) => Err(MetricError::UnknownPointId(p)),
            None => Ok(()),
        }
    }

    fn check_triangle(&self, policy: &ValidationPolicy) -> Result<(), MetricError> {
        let n = self.len();
        let check = |p: usize, q: usize, r: usize| {
            let direct = self.distance(PointId(p), PointId(r));
            let detour =
                self.distance(PointId(p), PointId(q)) + self.distance(PointId(q), PointId(r));
            if direct > detour + policy.triangle_tolerance {
                Err(MetricError::TriangleViolation {
                    p,
                    q,
                    r,
                    direct,
                    detour,
                })
            } else {
                Ok(())
            }
        };
        if n <= policy.exhaustive_limit {
            for p in 0..n {
                for r in (p + 1)..n {
                    for q in 0..n {
                        if q != p && q != r {
                            check(p, q, r)?;
                        }
                    }
                }
            }
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(policy.sample_seed);
            for _ in 0..3 * n * n {
                check(
                    rng.gen_range(0..n),
                    rng.gen_range(0..n),
                    rng.gen_range(0..n),
                )?;
            }
        }
        Ok(())
    }
}

/// A total order on the points of an instance: a bijection id → rank in `1..=n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointOrder {
    /// `rank[id] - 1` is the position of `id` in `sequence`.
    rank: Vec<usize>,
    sequence: Vec<PointId>,
}

impl PointOrder {
    /// Row order: id `i` gets rank `i + 1`.
    pub fn identity(n: usize) -> Self {
        Self {
            rank: (1..=n).collect(),
            sequence: (0..n).map(PointId).collect(),
        }
    }

    /// Build from the points listed first to last.
    pub fn from_sequence(sequence: Vec<PointId>) -> Result<Self, MetricError> {
        let n = sequence.len();
        let mut rank = vec![0usize; n];
        for (pos, p) in sequence.iter().enumerate() {
            if p.0 >= n || rank[p.0] != 0 {
                return Err(MetricError::NotABijection(n));
            }
            rank[p.0] = pos + 1;
        }
        Ok(Self { rank, sequence })
    }

    pub fn len(&self) -> usize {
        self.sequence.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequence.is_empty()
    }

    /// 1-based rank of `p`.
    #[inline]
    pub fn rank(&self, p: PointId) -> usize {
        self.rank[p.0]
    }

    pub fn contains(&self, p: PointId) -> bool {
        p.0 < self.rank.len()
    }

    /// Points from first to last.
    pub fn sequence(&self) -> &[PointId] {
        &self.sequence
    }

    /// Sort `ids` by increasing rank.
    pub fn sort(&self, ids: &mut [PointId]) {
        ids.sort_unstable_by_key(|p| self.rank(*p));
    }

    /// Deduplicated copy of `ids` in increasing rank.
    pub fn sorted(&self, ids: &[PointId]) -> Vec<PointId> {
        let mut out = ids.to_vec();
        self.sort(&mut out);
        out.dedup();
        out
    }
}

/// Rank every point of `priority` ahead of the rest. Both groups keep their
/// relative order under `phi`; repeated ids in `priority` count once.
pub fn reorder_prioritizing(
    phi: &PointOrder,
    priority: &[PointId],
) -> Result<PointOrder, MetricError> {
    if let Some(&p) = priority.iter().find(|p| !phi.contains(**p)) {
        return Err(MetricError::UnknownPointId(p));
    }
    let promoted: BTreeSet<PointId> = priority.iter().copied().collect();
    let (mut front, back): (Vec<PointId>, Vec<PointId>) =
        phi.sequence().iter().partition(|p| promoted.contains(p));
    front.extend(back);
    PointOrder::from_sequence(front)
}

/// The disk graph `H(r, S)`: an edge joins distinct points at distance `<= r`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiskGraph {
    radius: f64,
    adjacency: BTreeMap<PointId, Vec<PointId>>,
}

impl DiskGraph {
    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn vertices(&self) -> impl Iterator<Item = PointId> + '_ {
        self.adjacency.keys().copied()
    }

    /// Neighbors of `p` in increasing id order; empty for non-vertices.
    pub fn neighbors(&self, p: PointId) -> &[PointId] {
        self.adjacency.get(&p).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn has_edge(&self, p: PointId, q: PointId) -> bool {
        self.neighbors(p).binary_search(&q).is_ok()
    }

    /// Edges `(p, q)` with `p < q`.
    pub fn edges(&self) -> Vec<(PointId, PointId)> {
        self.adjacency
            .iter()
            .flat_map(|(&p, adj)| adj.iter().filter(move |&&q| p < q).map(move |&q| (p, q)))
            .collect()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.values().map(Vec::len).sum::<usize>() / 2
    }
}

/// Disk graph of radius `r` on every point of the instance.
pub fn disk_graph(instance: &MetricInstance, r: f64) -> Result<DiskGraph, MetricError> {
    let all: Vec<PointId> = instance.ids().collect();
    disk_graph_on(instance, &all, r)
}

/// Disk graph of radius `r` induced on `vertices`.
pub fn disk_graph_on(
    instance: &MetricInstance,
    vertices: &[PointId],
    r: f64,
) -> Result<DiskGraph, MetricError> {
    if r.is_nan() || r < 0.0 {
        return Err(MetricError::InvalidRadius(r));
    }
    instance.check_ids(vertices)?;
    let mut vs = vertices.to_vec();
    vs.sort_unstable();
    vs.dedup();
    let mut adjacency: BTreeMap<PointId, Vec<PointId>> =
        vs.iter().map(|&p| (p, Vec::new())).collect();
    for (a, &p) in vs.iter().enumerate() {
        for &q in &vs[a + 1..] {
            if instance.distance(p, q) <= r {
                adjacency.get_mut(&p).expect("vertex").push(q);
                adjacency.get_mut(&q).expect("vertex").push(p);
            }
        }
    }
    for adj in adjacency.values_mut() {
        adj.sort_unstable();
    }
    Ok(DiskGraph {
        radius: r,
        adjacency,
    })
}

/// True iff every target lies within `r` of some center.
pub fn center_covers(
    centers: &[PointId],
    instance: &MetricInstance,
    targets: &[PointId],
    r: f64,
) -> bool {
    targets
        .iter()
        .all(|&t| centers.iter().any(|&c| instance.distance(c, t) <= r))
}

/// Largest distance from a target to its nearest center. `None` when there
/// are targets but no centers; `Some(0.0)` for an empty target set.
pub fn covering_radius(
    centers: &[PointId],
    instance: &MetricInstance,
    targets: &[PointId],
) -> Option<f64> {
    let mut worst = 0.0f64;
    for &t in targets {
        let nearest = centers
            .iter()
            .map(|&c| instance.distance(c, t))
            .min_by(f64::total_cmp)?;
        worst = worst.max(nearest);
    }
    Some(worst)
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
    fn zero_matrix_is_degenerate_metric() {
        let m = MetricInstance::from_matrix(vec![vec![0.0; 3]; 3], &ValidationPolicy::default())
            .unwrap();
        assert_eq!(m.len(), 3);
        for p in m.ids() {
            for q in m.ids() {
                assert_eq!(m.distance(p, q), 0.0);
            }
        }
    }

    #[test]
    fn euclidean_three_four_five() {
        let m = MetricInstance::from_coordinates(vec![vec![0.0, 0.0], vec![3.0, 4.0]]).unwrap();
        assert_eq!(m.distance(PointId(0), PointId(1)), 5.0);
        assert_eq!(m.kind(), MetricKind::Euclidean);
    }

    #[test]
    fn triangle_violation_reports_triple() {
        let rows = vec![
            vec![0.0, 1.0, 10.0],
            vec![1.0, 0.0, 1.0],
            vec![10.0, 1.0, 0.0],
        ];
        let err = MetricInstance::from_matrix(rows, &ValidationPolicy::default()).unwrap_err();
        match err {
            MetricError::TriangleViolation {
                p,
                q,
                r,
                direct,
                detour,
            } => {
                assert_eq!((p, q, r), (0, 1, 2));
                assert_eq!(direct, 10.0);
                assert_eq!(detour, 2.0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn sampled_triangle_check_catches_gross_violation() {
        // Unit distances, except pairs with even index sum sit at 5 > 1 + 1.
        let n = 70;
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| match (i == j, (i + j) % 2 == 0) {
                        (true, _) => 0.0,
                        (false, true) => 5.0,
                        (false, false) => 1.0,
                    })
                    .collect()
            })
            .collect();
        let policy = ValidationPolicy::default();
        assert!(n > policy.exhaustive_limit);
        let err = MetricInstance::from_matrix(rows, &policy).unwrap_err();
        assert!(matches!(err, MetricError::TriangleViolation { .. }));
    }

    #[test]
    fn matrix_errors() {
        let p = ValidationPolicy::default();
        assert!(matches!(
            MetricInstance::from_matrix(vec![vec![0.0, 1.0], vec![2.0, 0.0]], &p),
            Err(MetricError::AsymmetricMatrix { row: 0, col: 1, .. })
        ));
        assert!(matches!(
            MetricInstance::from_matrix(vec![vec![0.0, -1.0], vec![-1.0, 0.0]], &p),
            Err(MetricError::NegativeDistance { .. })
        ));
        assert!(matches!(
            MetricInstance::from_matrix(vec![vec![0.0, 1.0], vec![1.0]], &p),
            Err(MetricError::DimensionMismatch(_))
        ));
        assert!(matches!(
            MetricInstance::from_matrix(vec![], &p),
            Err(MetricError::Empty)
        ));
        assert!(matches!(
            MetricInstance::from_coordinates(vec![vec![0.0, 1.0], vec![1.0]]),
            Err(MetricError::DimensionMismatch(_))
        ));
    }

    #[test]
    fn small_asymmetry_is_averaged() {
        let rows = vec![vec![0.0, 1.0], vec![1.0 + 1e-10, 0.0]];
        let m = MetricInstance::from_matrix(rows, &ValidationPolicy::default()).unwrap();
        let d = m.distance(PointId(0), PointId(1));
        assert_eq!(d, m.distance(PointId(1), PointId(0)));
        assert_eq!(d, (1.0 + (1.0 + 1e-10)) / 2.0);
    }

    #[test]
    fn disk_graph_on_line() {
        let m = line(&[0.0, 1.0, 3.0]);
        let g = disk_graph(&m, 1.0).unwrap();
        assert_eq!(g.edges(), vec![(PointId(0), PointId(1))]);
        let g = disk_graph(&m, 3.0).unwrap();
        assert_eq!(g.edge_count(), 3);
        let g = disk_graph(&m, 0.0).unwrap();
        assert_eq!(g.edge_count(), 0);
        assert!(disk_graph(&m, -1.0).is_err());
    }

    #[test]
    fn disk_graph_zero_radius_joins_coincident_points() {
        let m = line(&[2.0, 2.0, 5.0]);
        let g = disk_graph(&m, 0.0).unwrap();
        assert_eq!(g.edges(), vec![(PointId(0), PointId(1))]);
    }

    #[test]
    fn center_cover_examples() {
        let m = line(&[0.0, 1.0, 3.0]);
        let all = ids(&[0, 1, 2]);
        assert!(center_covers(&all, &m, &all, 0.0));
        assert!(!center_covers(&ids(&[0]), &m, &all, 1.0));
        assert!(center_covers(&ids(&[0, 2]), &m, &all, 1.0));
        assert!(center_covers(&[], &m, &[], 0.0));
        assert!(!center_covers(&[], &m, &all, 100.0));
        assert_eq!(covering_radius(&ids(&[0]), &m, &all), Some(3.0));
        assert_eq!(covering_radius(&[], &m, &all), None);
    }

    #[test]
    fn reorder_examples() {
        let phi = PointOrder::identity(4);
        let out = reorder_prioritizing(&phi, &ids(&[2])).unwrap();
        assert_eq!(out.sequence(), ids(&[2, 0, 1, 3]).as_slice());
        assert_eq!(out.rank(PointId(2)), 1);

        let out = reorder_prioritizing(&phi, &ids(&[0, 1, 2, 3])).unwrap();
        assert_eq!(out, phi);

        let phi = PointOrder::identity(5);
        let out = reorder_prioritizing(&phi, &ids(&[3, 1])).unwrap();
        assert_eq!(out.sequence(), ids(&[1, 3, 0, 2, 4]).as_slice());

        assert_eq!(
            reorder_prioritizing(&phi, &ids(&[7])),
            Err(MetricError::UnknownPointId(PointId(7)))
        );
    }

    #[test]
    fn order_rejects_non_bijection() {
        assert!(PointOrder::from_sequence(ids(&[0, 0])).is_err());
        assert!(PointOrder::from_sequence(ids(&[0, 2])).is_err());
        let o = PointOrder::from_sequence(ids(&[2, 0, 1])).unwrap();
        assert_eq!(o.rank(PointId(2)), 1);
        assert_eq!(o.sorted(&ids(&[1, 2, 2, 0])), ids(&[2, 0, 1]));
    }
}
