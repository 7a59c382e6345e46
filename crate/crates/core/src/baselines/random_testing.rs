//! Random testing: independent uniform samples from the input space.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::mdp::{evaluate, BehaviorSpace, Mdp, Policy};
use crate::qd::{CampaignConfig, CampaignError, CampaignLog, CampaignSeeds, Method};

/// Evaluates `config.budget` uniform random inputs. The whole campaign draws
/// from the initialisation stream, so its input sequence is the common
/// random prefix shared with the guided methods at equal seeds.
pub fn random_testing_run(
    mdp: &mut dyn Mdp,
    policy: &dyn Policy,
    bspace: &BehaviorSpace,
    config: &CampaignConfig,
    seeds: CampaignSeeds,
    seed_label: u64,
) -> Result<CampaignLog, CampaignError> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seeds.init);
    let mut log = CampaignLog::new(
        mdp.env_id(),
        Method::Random,
        seed_label,
        mdp.input_space().dim(),
        mdp.observation_dim(),
    );
    for _ in 0..config.budget {
        let input = mdp.sample_input(&mut rng);
        let result = evaluate(mdp, policy, &input, bspace, config.sim_seed)?;
        log.push(result);
    }
    Ok(log)
}
