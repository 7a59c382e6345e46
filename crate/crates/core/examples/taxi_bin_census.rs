use qdtest_core::envs::{default_behavior_space, TaxiWorld};
use qdtest_core::mdp::{evaluate, EnvId, SolutionInput};
use qdtest_core::policies::{train_q_learning, TrainParams};
use qdtest_core::qd::GridGeom;
use std::collections::HashMap;

fn main() {
    let mut world = TaxiWorld::builtin();
    let bspace = default_behavior_space(EnvId::Taxi);
    let geom = GridGeom::from_space(&bspace, 50);
    for episodes in [150_000usize, 200_000] {
        let table = train_q_learning(world.map(), &TrainParams { episodes, ..Default::default() });
        let mut bins: HashMap<(usize, usize), usize> = HashMap::new();
        let mut total = 0usize;
        for row in 0..13 {
            for col in 0..18 {
                for p in 0..6 {
                    for d in 0..6 {
                        if p == d { continue; }
                        let input = SolutionInput::new(
                            EnvId::Taxi,
                            vec![row as f64, col as f64, p as f64, d as f64],
                        );
                        let r = evaluate(&mut world, &table, &input, &bspace, 0).unwrap();
                        *bins.entry(geom.bin_index(r.behavior)).or_default() += 1;
                        total += 1;
                    }
                }
            }
        }
        let mut counts: Vec<usize> = bins.values().cloned().collect();
        counts.sort_unstable();
        let rare = counts.iter().filter(|&&c| (c as f64) < total as f64 * 0.002).count();
        println!(
            "episodes={episodes}: support={} bins, rare(<0.2%)={rare}, counts={counts:?}",
            bins.len()
        );
    }
}
