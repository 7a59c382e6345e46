//! Experiment specification: a declarative TOML file over preset defaults,
//! with every campaign knob overridable.

use std::path::{Path, PathBuf};

use qdtest_core::envs::{behavior_space, behavior_space_names, default_behavior_space};
use qdtest_core::mdp::{EnvId, MutationParams};
use qdtest_core::policies::TrainParams;
use qdtest_core::qd::{default_novelty_threshold, CampaignConfig, Method};
use serde::{Deserialize, Serialize};

use crate::HarnessError;

/// Scale presets. Desk: budget 500, init 100, 5 seeds, finishes in minutes.
/// Paper: budget 5000, init 1000, 10 seeds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Desk,
    Paper,
}

impl Preset {
    pub fn parse(s: &str) -> Option<Preset> {
        match s {
            "desk" => Some(Preset::Desk),
            "paper" => Some(Preset::Paper),
            _ => None,
        }
    }
}

/// The raw, fully optional file format. Unknown keys are rejected.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSpec {
    pub environment: Option<String>,
    pub methods: Option<Vec<String>>,
    pub behavior_spaces: Option<Vec<String>>,
    pub seeds: Option<Vec<u64>>,
    pub master_seed: Option<u64>,
    pub output: Option<PathBuf>,
    /// Checkpoint count for the sparseness series.
    pub sparseness_checkpoints: Option<usize>,
    #[serde(default)]
    pub campaign: RawCampaign,
    #[serde(default)]
    pub mutation: RawMutation,
    #[serde(default)]
    pub policy: RawPolicy,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawCampaign {
    pub budget: Option<usize>,
    pub init_budget: Option<usize>,
    pub ns_population: Option<usize>,
    pub ns_iterations: Option<usize>,
    pub grid_resolution: Option<usize>,
    pub novelty_threshold: Option<f64>,
    pub novelty_k: Option<usize>,
    pub sim_seed: Option<u64>,
    pub gmm_components: Option<usize>,
    pub gmm_em_iters: Option<usize>,
    pub gmm_refit_period: Option<usize>,
    pub freshness_quantile: Option<f64>,
    pub freshness_override: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawMutation {
    pub lander_sigma: Option<f64>,
    pub walker_resample_p: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawPolicy {
    pub qtable_path: Option<PathBuf>,
    pub train_episodes: Option<usize>,
    pub train_seed: Option<u64>,
}

impl RawSpec {
    pub fn from_toml(text: &str) -> Result<RawSpec, HarnessError> {
        toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<RawSpec, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            HarnessError::Config(format!("cannot read config {}: {e}", path.display()))
        })?;
        RawSpec::from_toml(&text)
    }
}

/// The fully resolved experiment: what actually runs. Echoed verbatim into
/// the run manifest.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentSpec {
    pub environment: String,
    pub methods: Vec<String>,
    pub behavior_spaces: Vec<String>,
    pub seeds: Vec<u64>,
    pub master_seed: u64,
    pub sparseness_checkpoints: usize,
    pub budget: usize,
    pub init_budget: usize,
    pub ns_population: usize,
    pub ns_iterations: usize,
    pub grid_resolution: usize,
    pub novelty_threshold: f64,
    pub novelty_k: usize,
    pub sim_seed: u64,
    pub gmm_components: usize,
    pub gmm_em_iters: usize,
    pub gmm_refit_period: usize,
    pub freshness_quantile: f64,
    pub freshness_override: Option<f64>,
    pub lander_sigma: f64,
    pub walker_resample_p: f64,
    pub qtable_path: Option<PathBuf>,
    pub train_episodes: usize,
    pub train_seed: u64,
}

impl ExperimentSpec {
    /// Overlays a raw spec on preset defaults and validates every name.
    pub fn resolve(raw: &RawSpec, preset: Preset) -> Result<ExperimentSpec, HarnessError> {
        let env_name = raw
            .environment
            .clone()
            .ok_or_else(|| HarnessError::Config("missing `environment`".into()))?;
        let env = EnvId::parse(&env_name)
            .ok_or_else(|| HarnessError::Config(format!("unknown environment '{env_name}'")))?;

        let defaults = match preset {
            Preset::Desk => CampaignConfig::desk_scale(env),
            Preset::Paper => CampaignConfig::paper_scale(env),
        };
        let default_seeds: Vec<u64> = match preset {
            Preset::Desk => (0..5).collect(),
            Preset::Paper => (0..10).collect(),
        };

        let methods = match &raw.methods {
            None => Method::ALL.iter().map(|m| m.name().to_string()).collect(),
            Some(names) => {
                for name in names {
                    if Method::parse(name).is_none() {
                        return Err(HarnessError::Config(format!(
                            "unknown method '{name}' (known: random, map-elites, novelty-search, mdpfuzz)"
                        )));
                    }
                }
                if names.is_empty() {
                    return Err(HarnessError::Config("method list is empty".into()));
                }
                names.clone()
            }
        };

        let behavior_spaces = match &raw.behavior_spaces {
            None => vec![default_behavior_space(env).name],
            Some(names) => {
                for name in names {
                    behavior_space(env, name)
                        .map_err(|e| HarnessError::Config(e.to_string()))?;
                }
                if names.is_empty() {
                    return Err(HarnessError::Config("behaviour-space list is empty".into()));
                }
                names.clone()
            }
        };

        let seeds = raw.seeds.clone().unwrap_or(default_seeds);
        if seeds.is_empty() {
            return Err(HarnessError::Config("seed list is empty".into()));
        }
        let mut unique = seeds.clone();
        unique.sort_unstable();
        unique.dedup();
        if unique.len() != seeds.len() {
            return Err(HarnessError::Config("seed list contains duplicates".into()));
        }

        let c = &raw.campaign;
        let spec = ExperimentSpec {
            environment: env_name,
            methods,
            behavior_spaces,
            seeds,
            master_seed: raw.master_seed.unwrap_or(0),
            sparseness_checkpoints: raw.sparseness_checkpoints.unwrap_or(50),
            budget: c.budget.unwrap_or(defaults.budget),
            init_budget: c.init_budget.unwrap_or(defaults.init_budget),
            ns_population: c.ns_population.unwrap_or(defaults.ns_population),
            ns_iterations: c.ns_iterations.unwrap_or(defaults.ns_iterations),
            grid_resolution: c.grid_resolution.unwrap_or(defaults.grid_resolution),
            novelty_threshold: c
                .novelty_threshold
                .unwrap_or_else(|| default_novelty_threshold(env)),
            novelty_k: c.novelty_k.unwrap_or(defaults.novelty_k),
            sim_seed: c.sim_seed.unwrap_or(defaults.sim_seed),
            gmm_components: c.gmm_components.unwrap_or(defaults.gmm_components),
            gmm_em_iters: c.gmm_em_iters.unwrap_or(defaults.gmm_em_iters),
            gmm_refit_period: c.gmm_refit_period.unwrap_or(defaults.gmm_refit_period),
            freshness_quantile: c.freshness_quantile.unwrap_or(defaults.freshness_quantile),
            freshness_override: c.freshness_override,
            lander_sigma: raw.mutation.lander_sigma.unwrap_or(50.0),
            walker_resample_p: raw.mutation.walker_resample_p.unwrap_or(0.5),
            qtable_path: raw.policy.qtable_path.clone(),
            train_episodes: raw
                .policy
                .train_episodes
                .unwrap_or_else(|| TrainParams::default().episodes),
            train_seed: raw.policy.train_seed.unwrap_or_else(|| TrainParams::default().seed),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn env(&self) -> EnvId {
        EnvId::parse(&self.environment).expect("validated at resolution")
    }

    pub fn method_list(&self) -> Vec<Method> {
        self.methods
            .iter()
            .map(|m| Method::parse(m).expect("validated at resolution"))
            .collect()
    }

    pub fn campaign_config(&self) -> CampaignConfig {
        CampaignConfig {
            budget: self.budget,
            init_budget: self.init_budget,
            ns_population: self.ns_population,
            ns_iterations: self.ns_iterations,
            grid_resolution: self.grid_resolution,
            mutation: MutationParams {
                lander_sigma: self.lander_sigma,
                walker_resample_p: self.walker_resample_p,
            },
            novelty_threshold: self.novelty_threshold,
            novelty_k: self.novelty_k,
            sim_seed: self.sim_seed,
            gmm_components: self.gmm_components,
            gmm_em_iters: self.gmm_em_iters,
            gmm_refit_period: self.gmm_refit_period,
            freshness_quantile: self.freshness_quantile,
            freshness_override: self.freshness_override,
        }
    }

    pub fn train_params(&self) -> TrainParams {
        TrainParams {
            episodes: self.train_episodes,
            seed: self.train_seed,
            ..Default::default()
        }
    }

    fn validate(&self) -> Result<(), HarnessError> {
        let env = EnvId::parse(&self.environment)
            .ok_or_else(|| HarnessError::Config(format!("unknown environment '{}'", self.environment)))?;
        for name in &self.behavior_spaces {
            if !behavior_space_names(env).contains(&name.as_str()) {
                return Err(HarnessError::Config(format!(
                    "behaviour space '{name}' is not registered for '{}'",
                    self.environment
                )));
            }
        }
        self.campaign_config()
            .validate()
            .map_err(|e| HarnessError::Config(e.to_string()))?;
        if self.method_list().contains(&Method::NoveltySearch)
            && self.ns_population * self.ns_iterations != self.budget
        {
            return Err(HarnessError::Config(format!(
                "novelty search needs population x iterations == budget ({} x {} != {})",
                self.ns_population, self.ns_iterations, self.budget
            )));
        }
        Ok(())
    }
}
