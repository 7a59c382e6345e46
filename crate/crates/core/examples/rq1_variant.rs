use qdtest_core::baselines::random_testing_run;
use qdtest_core::envs::{default_behavior_space, TaxiWorld};
use qdtest_core::mdp::{evaluate, EnvId, Mdp, SolutionInput};
use qdtest_core::policies::{train_q_learning, TrainParams};
use qdtest_core::qd::{faults_from_log, CampaignConfig, CampaignLog, CampaignSeeds, GridArchive, GridGeom, Method};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashSet;

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 { v[n / 2] } else { (v[n / 2 - 1] + v[n / 2]) / 2.0 }
}

// map-elites with parent selection over archive elites AND the previous
// offspring (Algorithm-1 style select(A, X_offspring) with batch size 1)
fn me_batch_variant(
    world: &mut TaxiWorld,
    table: &qdtest_core::policies::QTable,
    config: &CampaignConfig,
    seeds: CampaignSeeds,
) -> CampaignLog {
    let bspace = default_behavior_space(EnvId::Taxi);
    let mut init_rng = ChaCha8Rng::seed_from_u64(seeds.init);
    let mut search_rng = ChaCha8Rng::seed_from_u64(seeds.search);
    let mut archive = GridArchive::new(GridGeom::from_space(&bspace, config.grid_resolution));
    let mut log = CampaignLog::new(EnvId::Taxi, Method::MapElites, 0, 4, 4);
    let mut last_offspring: Option<SolutionInput> = None;
    for index in 1..=config.budget {
        let input = if index <= config.init_budget {
            world.sample_input(&mut init_rng)
        } else {
            // 50/50 archive elite vs previous offspring
            let use_batch = last_offspring.is_some() && search_rng.gen::<bool>();
            let parent = if use_batch {
                last_offspring.clone().unwrap()
            } else {
                let rank = search_rng.gen_range(0..archive.len());
                archive.elite_by_rank(rank).input.clone()
            };
            world.mutate_input(&parent, &config.mutation, &mut search_rng)
        };
        let result = evaluate(world, table, &input, &bspace, config.sim_seed).unwrap();
        if index > config.init_budget {
            last_offspring = Some(input);
        }
        archive.attempt_add(&result, index);
        log.push(result);
    }
    log
}

fn main() {
    let mut world = TaxiWorld::builtin();
    let table = train_q_learning(world.map(), &TrainParams::default());
    let config = CampaignConfig::paper_scale(EnvId::Taxi);
    let bspace = default_behavior_space(EnvId::Taxi);
    let mut me = Vec::new();
    let mut rt = Vec::new();
    let mut me_distinct = Vec::new();
    for seed in 0..10u64 {
        let seeds = CampaignSeeds::new(seed * 2 + 1, seed * 2 + 2);
        let log = me_batch_variant(&mut world, &table, &config, seeds);
        me.push(faults_from_log(&log).len() as f64);
        let distinct: HashSet<_> = log.records.iter().map(|r| r.input.dedup_key()).collect();
        me_distinct.push(distinct.len());
        let log = random_testing_run(&mut world, &table, &bspace, &config, seeds, seed).unwrap();
        rt.push(faults_from_log(&log).len() as f64);
    }
    println!(
        "batch-variant ME median {} (distinct inputs {:?}) vs RT median {}",
        median(me.clone()), me_distinct, median(rt.clone())
    );
    println!("ME all {me:?}");
    println!("RT all {rt:?}");
}
