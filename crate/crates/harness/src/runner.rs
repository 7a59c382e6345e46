//! Campaign execution: resolves the policy under test, runs the
//! method x seed x behaviour-space grid in parallel, writes one log CSV per
//! campaign, then metric reports and the run manifest.

use std::collections::HashMap;
use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, OnceLock};
use std::time::Instant;

use qdtest_core::baselines::{mdpfuzz_run, random_testing_run};
use qdtest_core::envs::{behavior_space, LanderWorld, TaxiWorld, WalkerWorld};
use qdtest_core::mdp::{EnvId, Mdp, Policy};
use qdtest_core::policies::{
    load_qtable, save_qtable, train_q_learning_gated, LanderPilot, QTable, WalkerGait,
};
use qdtest_core::qd::{map_elites_run, novelty_search_run, CampaignLog, Method};

use crate::config::ExperimentSpec;
use crate::manifest::{CampaignEntry, Manifest};
use crate::report;
use crate::seeds::derive_seeds;
use crate::HarnessError;

pub fn make_env(env: EnvId) -> Box<dyn Mdp> {
    match env {
        EnvId::Taxi => Box::new(TaxiWorld::builtin()),
        EnvId::Lander => Box::new(LanderWorld::new()),
        EnvId::Walker => Box::new(WalkerWorld::new()),
    }
}

type SharedPolicy = Arc<dyn Policy + Send + Sync>;

/// Q-tables are expensive to train; identical training requests within one
/// process share the result.
fn qtable_cache() -> &'static Mutex<HashMap<(u64, usize, u64), Arc<QTable>>> {
    static CACHE: OnceLock<Mutex<HashMap<(u64, usize, u64), Arc<QTable>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Resolves the policy under test for an environment. For the taxi this
/// loads the configured artifact or trains a gate-passing table (persisted
/// into the run directory for reuse).
pub fn resolve_policy(
    spec: &ExperimentSpec,
    run_dir: Option<&Path>,
) -> Result<SharedPolicy, HarnessError> {
    match spec.env() {
        EnvId::Lander => Ok(Arc::new(LanderPilot::new())),
        EnvId::Walker => Ok(Arc::new(WalkerGait::new())),
        EnvId::Taxi => {
            let world = TaxiWorld::builtin();
            if let Some(path) = &spec.qtable_path {
                let file = fs::File::open(path).map_err(|e| {
                    HarnessError::Config(format!("cannot open q-table {}: {e}", path.display()))
                })?;
                let table = load_qtable(world.map(), std::io::BufReader::new(file))
                    .map_err(|e| HarnessError::Config(e.to_string()))?;
                return Ok(Arc::new(table));
            }
            let params = spec.train_params();
            let key = (world.map().content_hash(), params.episodes, params.seed);
            let cached = qtable_cache().lock().expect("cache lock").get(&key).cloned();
            let table = match cached {
                Some(table) => table,
                None => {
                    let trained = train_q_learning_gated(world.map(), &params, 1)
                        .map_err(|e| HarnessError::Campaign(e.to_string()))?;
                    let table = Arc::new(trained);
                    qtable_cache()
                        .lock()
                        .expect("cache lock")
                        .insert(key, table.clone());
                    table
                }
            };
            if let Some(dir) = run_dir {
                let path = dir.join("qtable.txt");
                let file = fs::File::create(&path).map_err(|e| {
                    HarnessError::Campaign(format!("cannot write {}: {e}", path.display()))
                })?;
                save_qtable(&table, BufWriter::new(file))
                    .map_err(|e| HarnessError::Campaign(e.to_string()))?;
            }
            Ok(table)
        }
    }
}

/// Runs one campaign with the method's runner; returns its log.
pub fn run_campaign(
    spec: &ExperimentSpec,
    policy: &dyn Policy,
    method: Method,
    seed: u64,
    bspace_name: &str,
) -> Result<CampaignLog, HarnessError> {
    let env = spec.env();
    let bspace =
        behavior_space(env, bspace_name).map_err(|e| HarnessError::Config(e.to_string()))?;
    let config = spec.campaign_config();
    let seeds = derive_seeds(spec.master_seed, method, seed, bspace_name);
    let mut mdp = make_env(env);
    let log = match method {
        Method::Random => random_testing_run(mdp.as_mut(), policy, &bspace, &config, seeds, seed),
        Method::MapElites => {
            map_elites_run(mdp.as_mut(), policy, &bspace, &config, seeds, seed).map(|r| r.1)
        }
        Method::NoveltySearch => {
            novelty_search_run(mdp.as_mut(), policy, &bspace, &config, seeds, seed).map(|r| r.1)
        }
        Method::MdpFuzz => {
            mdpfuzz_run(mdp.as_mut(), policy, &bspace, &config, seeds, seed).map(|o| o.log)
        }
    };
    log.map_err(|e| HarnessError::Campaign(format!("{} seed {seed}: {e}", method.name())))
}

pub fn log_file_name(env: EnvId, bspace: &str, method: Method, seed: u64) -> String {
    format!("{}__{}__{}__seed{}.csv", env.name(), bspace, method.name(), seed)
}

/// Picks the output directory: `--force` writes into `out_root` directly,
/// otherwise a fresh timestamped subdirectory is created.
fn pick_run_dir(out_root: &Path, force: bool) -> Result<PathBuf, HarnessError> {
    if force {
        fs::create_dir_all(out_root)
            .map_err(|e| HarnessError::Config(format!("cannot create output dir: {e}")))?;
        return Ok(out_root.to_path_buf());
    }
    let stamp = chrono::Utc::now().format("%Y%m%d-%H%M%S");
    for k in 0..1000 {
        let name = if k == 0 {
            format!("run-{stamp}")
        } else {
            format!("run-{stamp}-{k}")
        };
        let dir = out_root.join(name);
        if !dir.exists() {
            fs::create_dir_all(&dir)
                .map_err(|e| HarnessError::Config(format!("cannot create run dir: {e}")))?;
            return Ok(dir);
        }
    }
    Err(HarnessError::Config("cannot find a fresh run directory name".into()))
}

pub struct RunOutcome {
    pub dir: PathBuf,
    /// Logs keyed by (behaviour space, method, seed), in execution order.
    pub logs: Vec<(String, Method, u64, CampaignLog)>,
}

/// Runs the full experiment grid and writes logs, metric CSVs, the plot
/// manifest and the run manifest. Campaign failures abort the run; finished
/// logs stay on disk and the manifest is marked incomplete.
pub fn run_experiment(
    spec: &ExperimentSpec,
    out_root: &Path,
    workers: usize,
    force: bool,
) -> Result<RunOutcome, HarnessError> {
    let run_dir = pick_run_dir(out_root, force)?;
    let logs_dir = run_dir.join("logs");
    fs::create_dir_all(&logs_dir)
        .map_err(|e| HarnessError::Campaign(format!("cannot create logs dir: {e}")))?;

    let policy = resolve_policy(spec, Some(&run_dir))?;
    let env = spec.env();

    let mut jobs: Vec<(String, Method, u64)> = Vec::new();
    for bspace in &spec.behavior_spaces {
        for method in spec.method_list() {
            for &seed in &spec.seeds {
                jobs.push((bspace.clone(), method, seed));
            }
        }
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| HarnessError::Campaign(format!("cannot build worker pool: {e}")))?;

    let results: Vec<Result<(String, Method, u64, CampaignLog, u128), HarnessError>> =
        pool.install(|| {
            use rayon::prelude::*;
            jobs.par_iter()
                .map(|(bspace, method, seed)| {
                    let started = Instant::now();
                    let log = run_campaign(spec, policy.as_ref(), *method, *seed, bspace)?;
                    let wall_ms = started.elapsed().as_millis();
                    let file = logs_dir.join(log_file_name(env, bspace, *method, *seed));
                    let writer = fs::File::create(&file).map_err(|e| {
                        HarnessError::Campaign(format!("cannot write {}: {e}", file.display()))
                    })?;
                    log.write_csv(BufWriter::new(writer))
                        .map_err(|e| HarnessError::Campaign(e.to_string()))?;
                    Ok((bspace.clone(), *method, *seed, log, wall_ms))
                })
                .collect()
        });

    let mut manifest = Manifest::new(spec);
    let mut logs = Vec::new();
    let mut first_error = None;
    for result in results {
        match result {
            Ok((bspace, method, seed, log, wall_ms)) => {
                manifest.campaigns.push(CampaignEntry {
                    environment: env.name().to_string(),
                    behavior_space: bspace.clone(),
                    method: method.name().to_string(),
                    seed,
                    wall_ms: wall_ms as u64,
                    log: format!("logs/{}", log_file_name(env, &bspace, method, seed)),
                });
                logs.push((bspace, method, seed, log));
            }
            Err(e) => first_error = Some(first_error.unwrap_or(e)),
        }
    }

    if let Some(error) = first_error {
        manifest.status = "incomplete".into();
        manifest.error = Some(error.to_string());
        manifest.write(&run_dir)?;
        return Err(error);
    }

    report::write_reports(&run_dir, spec, &logs)?;
    manifest.write(&run_dir)?;
    Ok(RunOutcome { dir: run_dir, logs })
}

/// The behaviour-space sweep: the full grid once per registered walker
/// descriptor pair, plus a combined comparison CSV keyed by
/// (behaviour space, method, metric).
pub fn rq3_sweep(
    spec: &ExperimentSpec,
    out_root: &Path,
    workers: usize,
    force: bool,
) -> Result<RunOutcome, HarnessError> {
    if spec.env() != EnvId::Walker {
        return Err(HarnessError::Config(
            "the behaviour-space sweep is defined for the walker environment".into(),
        ));
    }
    let mut sweep_spec = spec.clone();
    sweep_spec.behavior_spaces = qdtest_core::envs::behavior_space_names(EnvId::Walker)
        .iter()
        .map(|s| s.to_string())
        .collect();
    let outcome = run_experiment(&sweep_spec, out_root, workers, force)?;
    report::write_rq3_combined(&outcome.dir, &sweep_spec, &outcome.logs)?;
    Ok(outcome)
}
