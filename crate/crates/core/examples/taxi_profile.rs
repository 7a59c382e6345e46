use qdtest_core::envs::TaxiWorld;
use qdtest_core::mdp::{run_episode, EnvId, Mdp, SolutionInput, Termination};
use qdtest_core::policies::{solve_rate, train_q_learning, TrainParams};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let mut world = TaxiWorld::builtin();
    for episodes in [140_000usize, 150_000, 160_000, 180_000, 200_000] {
        let table = train_q_learning(world.map(), &TrainParams { episodes, ..Default::default() });
        let rate = solve_rate(world.map(), &table, 1000, 999);
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let mut outcomes = [0usize; 3];
        for _ in 0..2000 {
            let input = world.sample_input(&mut rng);
            let t = run_episode(&mut world, &table, &input, 0).unwrap();
            outcomes[match t.terminated_by {
                Termination::Goal => 0,
                Termination::Fault => 1,
                Termination::StepLimit => 2,
            }] += 1;
        }
        println!(
            "episodes={episodes}: solve={rate:.3} goal={} fault={} wander={}",
            outcomes[0], outcomes[1], outcomes[2]
        );
    }
}
