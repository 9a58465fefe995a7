#![allow(dead_code)]

use kcenter::generate::{generate, GenParams, InstanceKind};
use kcenter::{MetricInstance, PointId};
use proptest::prelude::*;

pub const KINDS: [InstanceKind; 3] = [
    InstanceKind::UniformRandomEuclidean,
    InstanceKind::RandomMetricMatrix,
    InstanceKind::ClusteredEuclidean,
];

/// Small generated instances; small matrix weights and clustered points
/// produce plenty of distance ties.
pub fn instance(max_n: usize) -> impl Strategy<Value = MetricInstance> {
    (0usize..4, 2..=max_n, any::<u64>()).prop_map(|(kind, n, seed)| {
        if kind == 3 {
            // Integer points on a line: many equal distances.
            let xs = (0..n)
                .map(|i| vec![((seed >> (i % 60)) % 7) as f64])
                .collect();
            return MetricInstance::from_coordinates(xs).unwrap();
        }
        let params = GenParams {
            max_weight: 6,
            clusters: 1 + (seed % 3) as usize,
            ..GenParams::default().with_n(n)
        };
        generate(KINDS[kind], &params, seed).unwrap()
    })
}

pub fn all_ids(m: &MetricInstance) -> Vec<PointId> {
    m.ids().collect()
}

pub fn distinct_distances(m: &MetricInstance) -> Vec<f64> {
    let mut ds: Vec<f64> = m
        .ids()
        .flat_map(|p| m.ids().map(move |q| (p, q)))
        .map(|(p, q)| m.distance(p, q))
        .collect();
    ds.sort_by(f64::total_cmp);
    ds.dedup();
    ds
}
