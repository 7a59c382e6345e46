// criterion-7 probe under the exact experiment seed derivation, over
// several master seeds to gauge robustness
use qdtest_core::baselines::random_testing_run;
use qdtest_core::envs::{default_behavior_space, LanderWorld, TaxiWorld, WalkerWorld};
use qdtest_core::mdp::{EnvId, Mdp, Policy};
use qdtest_core::metrics::coverage_series;
use qdtest_core::policies::{train_q_learning, LanderPilot, TrainParams, WalkerGait};
use qdtest_core::qd::{map_elites_run, CampaignConfig, GridGeom, Method};
use qdtest_harness::seeds::derive_seeds;

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 { v[n / 2] } else { (v[n / 2 - 1] + v[n / 2]) / 2.0 }
}

fn probe(env: EnvId, mdp: &mut dyn Mdp, policy: &dyn Policy, master: u64) {
    let bspace = default_behavior_space(env);
    let config = CampaignConfig::desk_scale(env);
    let geom = GridGeom::from_space(&bspace, config.grid_resolution);
    let (mut me_cov, mut rt_cov, mut me_f, mut rt_f) =
        (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for seed in 0..5u64 {
        let s = derive_seeds(master, Method::MapElites, seed, &bspace.name);
        let (_, log) = map_elites_run(mdp, policy, &bspace, &config, s, seed).unwrap();
        let (c, f) = coverage_series(&log, &geom);
        me_cov.push(*c.values.last().unwrap());
        me_f.push(*f.values.last().unwrap());
        let s = derive_seeds(master, Method::Random, seed, &bspace.name);
        let log = random_testing_run(mdp, policy, &bspace, &config, s, seed).unwrap();
        let (c, f) = coverage_series(&log, &geom);
        rt_cov.push(*c.values.last().unwrap());
        rt_f.push(*f.values.last().unwrap());
    }
    println!(
        "master {master} {:6}: cov ME {:5} vs RT {:5} | faulty ME {:4} vs RT {:4}",
        env.name(),
        median(me_cov),
        median(rt_cov),
        median(me_f),
        median(rt_f)
    );
}

fn main() {
    let table = {
        let taxi = TaxiWorld::builtin();
        train_q_learning(taxi.map(), &TrainParams { episodes: 150_000, ..Default::default() })
    };
    for master in [0u64, 1, 2] {
        let mut lander = LanderWorld::new();
        probe(EnvId::Lander, &mut lander, &LanderPilot::new(), master);
        let mut walker = WalkerWorld::new();
        probe(EnvId::Walker, &mut walker, &WalkerGait::new(), master);
        let mut taxi = TaxiWorld::builtin();
        probe(EnvId::Taxi, &mut taxi, &table, master);
    }
}
