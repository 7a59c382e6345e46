use qdtest_core::baselines::random_testing_run;
use qdtest_core::envs::{default_behavior_space, WalkerWorld};
use qdtest_core::mdp::EnvId;
use qdtest_core::metrics::coverage_series;
use qdtest_core::policies::WalkerGait;
use qdtest_core::qd::{map_elites_run, CampaignConfig, GridGeom, Method};
use qdtest_harness::seeds::derive_seeds;

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 { v[n / 2] } else { (v[n / 2 - 1] + v[n / 2]) / 2.0 }
}

fn main() {
    let env = EnvId::Walker;
    let bspace = default_behavior_space(env);
    let gait = WalkerGait::new();
    for budget in [500usize, 1500, 5000] {
        let mut config = CampaignConfig::paper_scale(env);
        config.budget = budget;
        config.init_budget = budget / 5;
        let geom = GridGeom::from_space(&bspace, config.grid_resolution);
        let (mut me, mut rt, mut me_f, mut rt_f) = (vec![], vec![], vec![], vec![]);
        for seed in 0..5u64 {
            let mut world = WalkerWorld::new();
            let s = derive_seeds(0, Method::MapElites, seed, &bspace.name);
            let (_, log) = map_elites_run(&mut world, &gait, &bspace, &config, s, seed).unwrap();
            let (c, f) = coverage_series(&log, &geom);
            me.push(*c.values.last().unwrap());
            me_f.push(*f.values.last().unwrap());
            let s = derive_seeds(0, Method::Random, seed, &bspace.name);
            let log = random_testing_run(&mut world, &gait, &bspace, &config, s, seed).unwrap();
            let (c, f) = coverage_series(&log, &geom);
            rt.push(*c.values.last().unwrap());
            rt_f.push(*f.values.last().unwrap());
        }
        println!(
            "N={budget}: cov ME {} vs RT {} | faulty ME {} vs RT {}",
            median(me), median(rt), median(me_f), median(rt_f)
        );
    }
}
