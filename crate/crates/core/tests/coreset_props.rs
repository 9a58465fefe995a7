mod common;

use common::{all_ids, instance};
use kcenter::coreset::{assemble, composition_ratio, CoresetPart};
use kcenter::dkcenter::{run_algorithm2, suggested_memory, RunOptions};
use kcenter::mpcsim::{ClusterConfig, Partition};
use kcenter::solvers::exact_kcenter;
use kcenter::{PointId, PointOrder};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const SLACK: f64 = 1e-12;

fn parts_strategy() -> impl Strategy<Value = Vec<CoresetPart>> {
    prop::collection::vec(
        (
            1usize..5,
            prop::collection::vec((0usize..12).prop_map(PointId), 0..6),
        ),
        1..5,
    )
    .prop_map(|raw| {
        raw.into_iter()
            .map(|(source, points)| CoresetPart::new(source, points))
            .collect()
    })
}

proptest! {
    #[test]
    fn assemble_ignores_arrival_order(parts in parts_strategy(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut seq: Vec<PointId> = (0..12).map(PointId).collect();
        seq.shuffle(&mut rng);
        let phi = PointOrder::from_sequence(seq).unwrap();
        let base = assemble(parts.clone(), &phi).unwrap();
        let mut shuffled = parts.clone();
        shuffled.shuffle(&mut rng);
        for p in &mut shuffled {
            p.points.shuffle(&mut rng);
        }
        let again = assemble(shuffled, &phi).unwrap();
        prop_assert_eq!(&base, &again);

        let union: Vec<PointId> = parts.iter().flat_map(|p| p.points.iter().copied()).collect();
        prop_assert_eq!(base.ids(), phi.sorted(&union));
        let ranks: Vec<usize> = base.merged.iter().map(|p| p.rank).collect();
        prop_assert!(ranks.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn restricted_centers_never_beat_the_optimum(
        m in instance(10),
        k in 1usize..4,
        seed in any::<u64>(),
    ) {
        let all = all_ids(&m);
        let k = k.min(all.len());
        let opt = exact_kcenter(&m, &all, k).unwrap().radius;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let size = 1 + (seed as usize) % all.len();
        let pick: Vec<PointId> = all.choose_multiple(&mut rng, size).copied().collect();
        let coreset = assemble(vec![CoresetPart::new(1, pick)], &PointOrder::identity(all.len())).unwrap();
        let ratio = composition_ratio(&m, &coreset, k, opt).unwrap();
        prop_assert!(ratio >= 1.0 - SLACK);
    }

    #[test]
    fn algorithm2_coreset_composes_within_two(
        m in instance(12),
        k in 1usize..4,
        machines in 1usize..4,
    ) {
        let all = all_ids(&m);
        let k = k.min(all.len());
        let opt = exact_kcenter(&m, &all, k).unwrap().radius;
        let partition = Partition::round_robin(all.len(), machines);
        let config = ClusterConfig::new(machines, suggested_memory(&partition, k));
        let run = run_algorithm2(&m, &partition, k, &config, &RunOptions::default()).unwrap();
        let ratio = composition_ratio(&m, &run.coreset, k, opt).unwrap();
        prop_assert!((1.0 - SLACK..=2.0 + SLACK).contains(&ratio), "ratio {}", ratio);
    }
}

#[test]
fn whole_instance_as_coreset_has_ratio_one() {
    let m =
        kcenter::MetricInstance::from_coordinates(vec![vec![0.0], vec![1.0], vec![2.0], vec![3.0]])
            .unwrap();
    let all = all_ids(&m);
    let coreset = assemble(
        vec![CoresetPart::new(1, all.clone())],
        &PointOrder::identity(4),
    )
    .unwrap();
    let opt = exact_kcenter(&m, &all, 2).unwrap().radius;
    assert_eq!(composition_ratio(&m, &coreset, 2, opt).unwrap(), 1.0);
}
