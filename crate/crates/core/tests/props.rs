//! Property tests for the structural invariants.

use proptest::prelude::*;
use qdtest_core::envs::{default_behavior_space, extract_behavior, LanderWorld};
use qdtest_core::mdp::{run_episode, EnvId, SolutionInput};
use qdtest_core::metrics::{knn_sparseness, quantile_linear};
use qdtest_core::policies::LanderPilot;
use qdtest_core::qd::GridGeom;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bin_index_stays_inside_the_grid(
        b0 in -1e6f64..1e6, b1 in -1e6f64..1e6, res in 1usize..64
    ) {
        let geom = GridGeom::new([(-3.0, 7.0), (0.5, 2.5)], res);
        let (i, j) = geom.bin_index([b0, b1]);
        prop_assert!(i < res && j < res);
    }

    #[test]
    fn knn_sparseness_is_permutation_and_translation_invariant(
        points in prop::collection::vec(
            prop::collection::vec(-50.0f64..50.0, 3), 2..40
        ),
        shift in -100.0f64..100.0,
        seed in 0u64..1000,
    ) {
        let base = knn_sparseness(&points, 3).unwrap();

        let mut permuted = points.clone();
        let n = permuted.len();
        // cheap deterministic shuffle
        for i in 0..n {
            let j = (seed as usize + i * 7919) % n;
            permuted.swap(i, j);
        }
        let perm = knn_sparseness(&permuted, 3).unwrap();
        prop_assert!((base - perm).abs() < 1e-9);

        let translated: Vec<Vec<f64>> = points
            .iter()
            .map(|p| p.iter().map(|v| v + shift).collect())
            .collect();
        let trans = knn_sparseness(&translated, 3).unwrap();
        prop_assert!((base - trans).abs() < 1e-7);
    }

    #[test]
    fn quantiles_are_ordered(values in prop::collection::vec(-1e3f64..1e3, 1..20)) {
        let mut sorted = values;
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let q1 = quantile_linear(&sorted, 0.25);
        let q2 = quantile_linear(&sorted, 0.5);
        let q3 = quantile_linear(&sorted, 0.75);
        prop_assert!(q1 <= q2 && q2 <= q3);
        prop_assert!(*sorted.first().unwrap() <= q1);
        prop_assert!(q3 <= *sorted.last().unwrap());
    }

    #[test]
    fn lander_episodes_keep_trajectory_shape_and_clipped_behavior(
        fx in -1000.0f64..1000.0, fy in -1000.0f64..1000.0
    ) {
        let mut world = LanderWorld::new();
        let input = SolutionInput::new(EnvId::Lander, vec![fx, fy]);
        let t = run_episode(&mut world, &LanderPilot::new(), &input, 0).unwrap();
        prop_assert_eq!(t.states.len(), t.actions.len() + 1);
        prop_assert_eq!(t.states.len(), t.rewards.len() + 1);
        prop_assert_eq!(t.final_state(), t.states.last().unwrap().as_slice());

        let bspace = default_behavior_space(EnvId::Lander);
        let b = extract_behavior(&bspace, &t);
        prop_assert!(b[0] >= bspace.bounds[0].0 && b[0] <= bspace.bounds[0].1);
        prop_assert!(b[1] >= bspace.bounds[1].0 && b[1] <= bspace.bounds[1].1);
    }
}
