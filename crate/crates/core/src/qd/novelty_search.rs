//! Novelty Search adapted to policy testing.
//!
//! The search runs `ns_iterations` batches of `ns_population` evaluations
//! (their product must equal the budget). The first batch is uniform random;
//! afterwards parents are picked by binary tournament on novelty. Novelty
//! scores are computed once per iteration for all members against the
//! archive plus the full current population (the member itself excluded by
//! identity), so results do not depend on the evaluation order within an
//! iteration. A member's behaviour enters the archive when its score
//! strictly exceeds the threshold.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::mdp::{evaluate, BehaviorSpace, Mdp, Policy, SolutionInput};

use super::campaign::{CampaignConfig, CampaignError, CampaignLog, CampaignSeeds, Method};
use super::novelty::{novelty_score_excluding, NoveltyArchive};

/// Scores each population member against archive + population (self
/// excluded) and batch-inserts the behaviours that clear the threshold.
/// Returns the per-member scores, used for parent selection.
fn score_and_insert(
    archive: &mut NoveltyArchive,
    population: &[[f64; 2]],
    k: usize,
) -> Vec<f64> {
    let mut references: Vec<[f64; 2]> = Vec::with_capacity(archive.len() + population.len());
    references.extend_from_slice(archive.behaviors());
    references.extend_from_slice(population);
    let offset = archive.len();
    let scores: Vec<f64> = population
        .iter()
        .enumerate()
        .map(|(i, &b)| novelty_score_excluding(b, &references, k, Some(offset + i)))
        .collect();
    for (i, &score) in scores.iter().enumerate() {
        if score > archive.threshold() {
            archive.push(population[i]);
        }
    }
    scores
}

/// Runs one Novelty Search campaign. Requires
/// `ns_population * ns_iterations == budget`.
pub fn novelty_search_run(
    mdp: &mut dyn Mdp,
    policy: &dyn Policy,
    bspace: &BehaviorSpace,
    config: &CampaignConfig,
    seeds: CampaignSeeds,
    seed_label: u64,
) -> Result<(NoveltyArchive, CampaignLog), CampaignError> {
    config.validate()?;
    if config.ns_population == 0 {
        return Err(CampaignError::Config("population size must be positive".into()));
    }
    if config.ns_population * config.ns_iterations != config.budget {
        return Err(CampaignError::Config(format!(
            "population {} x iterations {} must equal the budget {}",
            config.ns_population, config.ns_iterations, config.budget
        )));
    }

    let mut init_rng = ChaCha8Rng::seed_from_u64(seeds.init);
    let mut search_rng = ChaCha8Rng::seed_from_u64(seeds.search);
    let mut archive = NoveltyArchive::new(config.novelty_threshold, config.novelty_k);
    let mut log = CampaignLog::new(
        mdp.env_id(),
        Method::NoveltySearch,
        seed_label,
        mdp.input_space().dim(),
        mdp.observation_dim(),
    );

    let population = config.ns_population;
    let mut inputs: Vec<SolutionInput> = Vec::with_capacity(population);
    let mut behaviors: Vec<[f64; 2]> = Vec::with_capacity(population);
    let mut scores: Vec<f64> = Vec::new();

    for iteration in 0..config.ns_iterations {
        let offspring: Vec<SolutionInput> = if iteration == 0 {
            (0..population).map(|_| mdp.sample_input(&mut init_rng)).collect()
        } else {
            (0..population)
                .map(|_| {
                    let a = search_rng.gen_range(0..population);
                    let b = search_rng.gen_range(0..population);
                    let winner = if scores[b] > scores[a] { b } else { a };
                    mdp.mutate_input(&inputs[winner], &config.mutation, &mut search_rng)
                })
                .collect()
        };

        behaviors.clear();
        for input in &offspring {
            let result = evaluate(mdp, policy, input, bspace, config.sim_seed)?;
            behaviors.push(result.behavior);
            log.push(result);
        }
        scores = score_and_insert(&mut archive, &behaviors, config.novelty_k);
        inputs = offspring;
    }
    Ok((archive, log))
}
