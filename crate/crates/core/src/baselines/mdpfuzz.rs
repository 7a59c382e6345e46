//! GMM-guided fuzzer: a seed pool plus a freshness gate on trajectory
//! features.
//!
//! Phase 1 evaluates `init_budget` random inputs, seeds the pool with all of
//! them and fits a Gaussian mixture on their trajectory features (the final
//! state concatenated with the behaviour descriptor). The freshness
//! threshold is a low quantile of the initialisation features'
//! log-likelihoods. Phase 2 mutates uniformly drawn pool seeds; fault
//! mutants are logged as findings (the parent stays in the pool), non-fault
//! mutants whose features look unlikely under the mixture (log-likelihood
//! below the threshold) are added to the pool as fresh seeds. The mixture is
//! refit periodically on all features seen so far, and the threshold is
//! recomputed on the initialisation features under the refit model.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::mdp::{evaluate, BehaviorSpace, EvalResult, Mdp, Policy, SolutionInput};
use crate::qd::{CampaignConfig, CampaignError, CampaignLog, CampaignSeeds, Method};

use super::gmm::{gmm_fit, gmm_loglik, GmmModel};

/// One pool entry: the input, the fitness observed when it entered the pool,
/// and whether it was admitted by the freshness gate (initial seeds are not).
#[derive(Debug, Clone, PartialEq)]
pub struct SeedEntry {
    pub input: SolutionInput,
    pub fitness: f64,
    pub fresh: bool,
}

/// The fuzzer's seed pool; never empty after initialisation and only grows.
#[derive(Debug, Clone, Default)]
pub struct SeedPool {
    pub entries: Vec<SeedEntry>,
}

impl SeedPool {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Campaign log plus the fuzzer's internal state, exposed for inspection.
#[derive(Debug)]
pub struct MdpFuzzOutcome {
    pub log: CampaignLog,
    pub pool: SeedPool,
    /// Freshness threshold in effect at the end of the run.
    pub threshold: f64,
    pub refits: usize,
}

fn features(result: &EvalResult) -> Vec<f64> {
    let mut f = result.final_state.clone();
    f.extend_from_slice(&result.behavior);
    f
}

/// Lower `q`-quantile with linear interpolation between order statistics.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * q;
    let lo = h.floor() as usize;
    let frac = h - lo as f64;
    if lo + 1 < n {
        sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
    } else {
        sorted[n - 1]
    }
}

fn fit_and_threshold(
    all_features: &[Vec<f64>],
    init_count: usize,
    config: &CampaignConfig,
    rng: &mut ChaCha8Rng,
) -> (GmmModel, f64) {
    let k = config.gmm_components.min(all_features.len());
    let fit = gmm_fit(all_features, k, config.gmm_em_iters, rng)
        .expect("feature matrix is non-empty, finite and rectangular");
    let threshold = match config.freshness_override {
        Some(t) => t,
        None => {
            let mut init_logliks: Vec<f64> = all_features[..init_count]
                .iter()
                .map(|f| gmm_loglik(&fit.model, f))
                .collect();
            init_logliks.sort_by(|a, b| a.partial_cmp(b).expect("finite log-likelihoods"));
            quantile(&init_logliks, config.freshness_quantile)
        }
    };
    (fit.model, threshold)
}

/// Runs one fuzzing campaign of exactly `config.budget` evaluations.
pub fn mdpfuzz_run(
    mdp: &mut dyn Mdp,
    policy: &dyn Policy,
    bspace: &BehaviorSpace,
    config: &CampaignConfig,
    seeds: CampaignSeeds,
    seed_label: u64,
) -> Result<MdpFuzzOutcome, CampaignError> {
    config.validate()?;
    let mut init_rng = ChaCha8Rng::seed_from_u64(seeds.init);
    let mut search_rng = ChaCha8Rng::seed_from_u64(seeds.search);
    let mut log = CampaignLog::new(
        mdp.env_id(),
        Method::MdpFuzz,
        seed_label,
        mdp.input_space().dim(),
        mdp.observation_dim(),
    );
    let mut pool = SeedPool::default();
    let mut all_features: Vec<Vec<f64>> = Vec::with_capacity(config.budget);

    let init_count = config.init_budget.min(config.budget);
    for _ in 0..init_count {
        let input = mdp.sample_input(&mut init_rng);
        let result = evaluate(mdp, policy, &input, bspace, config.sim_seed)?;
        all_features.push(features(&result));
        pool.entries.push(SeedEntry {
            input,
            fitness: result.fitness,
            fresh: false,
        });
        log.push(result);
    }

    if log.len() == config.budget {
        return Ok(MdpFuzzOutcome {
            log,
            pool,
            threshold: f64::NEG_INFINITY,
            refits: 0,
        });
    }

    let (mut model, mut threshold) =
        fit_and_threshold(&all_features, init_count, config, &mut search_rng);
    let mut refits = 0usize;

    for index in init_count + 1..=config.budget {
        let pick = search_rng.gen_range(0..pool.len());
        let parent = pool.entries[pick].input.clone();
        let input = mdp.mutate_input(&parent, &config.mutation, &mut search_rng);
        let result = evaluate(mdp, policy, &input, bspace, config.sim_seed)?;
        let feats = features(&result);
        if !result.oracle {
            // non-faulting mutants join the pool when their trajectory
            // features are unlikely under the mixture
            let loglik = gmm_loglik(&model, &feats);
            if loglik < threshold {
                pool.entries.push(SeedEntry {
                    input,
                    fitness: result.fitness,
                    fresh: true,
                });
            }
        }
        all_features.push(feats);
        log.push(result);

        let done = index - init_count;
        if config.gmm_refit_period > 0
            && done % config.gmm_refit_period == 0
            && index < config.budget
        {
            let (m, t) = fit_and_threshold(&all_features, init_count, config, &mut search_rng);
            model = m;
            threshold = t;
            refits += 1;
        }
    }
    Ok(MdpFuzzOutcome {
        log,
        pool,
        threshold,
        refits,
    })
}
