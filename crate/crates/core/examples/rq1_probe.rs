use qdtest_core::envs::{default_behavior_space, TaxiWorld};
use qdtest_core::mdp::{EnvId, Mdp};
use qdtest_core::policies::{solve_rate, train_q_learning, TrainParams};
use qdtest_core::qd::{faults_from_log, map_elites_run, CampaignConfig, CampaignSeeds};
use qdtest_core::baselines::random_testing_run;

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 { v[n / 2] } else { (v[n / 2 - 1] + v[n / 2]) / 2.0 }
}

fn main() {
    let bspace = default_behavior_space(EnvId::Taxi);
    for episodes in [300_000usize, 400_000, 500_000, 600_000] {
        let mut world = TaxiWorld::builtin();
        let params = TrainParams { episodes, ..Default::default() };
        let table = train_q_learning(world.map(), &params);
        let rate = solve_rate(world.map(), &table, 1000, 999);
        let config = CampaignConfig::paper_scale(EnvId::Taxi);
        let mut me = Vec::new();
        let mut rt = Vec::new();
        for seed in 0..10u64 {
            let seeds = CampaignSeeds::new(seed * 2 + 1, seed * 2 + 2);
            let (_, log) =
                map_elites_run(&mut world, &table, &bspace, &config, seeds, seed).unwrap();
            me.push(faults_from_log(&log).len() as f64);
            let log = random_testing_run(&mut world, &table, &bspace, &config, seeds, seed).unwrap();
            rt.push(faults_from_log(&log).len() as f64);
        }
        println!(
            "episodes={episodes}: solve={rate:.3} ME median {} (all {me:?}) vs RT median {} (all {rt:?})",
            median(me.clone()),
            median(rt.clone())
        );
    }
}
