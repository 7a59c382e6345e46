use qdtest_core::baselines::random_testing_run;
use qdtest_core::envs::{default_behavior_space, LanderWorld, TaxiWorld, WalkerWorld};
use qdtest_core::mdp::{EnvId, Mdp, Policy};
use qdtest_core::metrics::coverage_series;
use qdtest_core::policies::{train_q_learning, LanderPilot, TrainParams, WalkerGait};
use qdtest_core::qd::{map_elites_run, CampaignConfig, CampaignSeeds, GridGeom};

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 { v[n / 2] } else { (v[n / 2 - 1] + v[n / 2]) / 2.0 }
}

fn probe(env: EnvId, mdp: &mut dyn Mdp, policy: &dyn Policy) {
    let bspace = default_behavior_space(env);
    let config = CampaignConfig::desk_scale(env);
    let geom = GridGeom::from_space(&bspace, config.grid_resolution);
    let (mut me_cov, mut rt_cov, mut me_fcov, mut rt_fcov) =
        (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for seed in 0..5u64 {
        let seeds = CampaignSeeds::new(seed * 2 + 1, seed * 2 + 2);
        let (_, log) = map_elites_run(mdp, policy, &bspace, &config, seeds, seed).unwrap();
        let (cov, fcov) = coverage_series(&log, &geom);
        me_cov.push(*cov.values.last().unwrap());
        me_fcov.push(*fcov.values.last().unwrap());
        let log = random_testing_run(mdp, policy, &bspace, &config, seeds, seed).unwrap();
        let (cov, fcov) = coverage_series(&log, &geom);
        rt_cov.push(*cov.values.last().unwrap());
        rt_fcov.push(*fcov.values.last().unwrap());
    }
    println!(
        "{}: coverage ME {} vs RT {} | faulty ME {} vs RT {}",
        env.name(),
        median(me_cov.clone()),
        median(rt_cov.clone()),
        median(me_fcov.clone()),
        median(rt_fcov.clone())
    );
    println!("   ME cov {me_cov:?} RT cov {rt_cov:?}");
    println!("   ME fcov {me_fcov:?} RT fcov {rt_fcov:?}");
}

fn main() {
    let mut lander = LanderWorld::new();
    probe(EnvId::Lander, &mut lander, &LanderPilot::new());
    let mut walker = WalkerWorld::new();
    probe(EnvId::Walker, &mut walker, &WalkerGait::new());
    let mut taxi = TaxiWorld::builtin();
    let table = train_q_learning(taxi.map(), &TrainParams::default());
    probe(EnvId::Taxi, &mut taxi, &table);
}
