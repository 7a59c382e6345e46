//! Campaign configuration, evaluation log and its CSV form.
//!
//! The campaign log is the ground truth for every metric: one record per
//! evaluation, indices dense from 1 to the budget. The CSV rendering uses
//! fixed nine-decimal formatting so identical campaigns serialize to
//! identical bytes.

use std::io::{BufRead, Write};

use thiserror::Error;

use crate::mdp::{fmt_f64, EnvId, EpisodeError, EvalResult, MutationParams, SolutionInput};

/// Test-generation method tags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Method {
    Random,
    MapElites,
    NoveltySearch,
    MdpFuzz,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::Random,
        Method::MapElites,
        Method::NoveltySearch,
        Method::MdpFuzz,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Random => "random",
            Method::MapElites => "map-elites",
            Method::NoveltySearch => "novelty-search",
            Method::MdpFuzz => "mdpfuzz",
        }
    }

    pub fn parse(s: &str) -> Option<Method> {
        Method::ALL.into_iter().find(|m| m.name() == s)
    }
}

/// Per-campaign RNG seeds. The initialisation stream drives every uniform
/// random draw of the initial phase (and all of random testing); the search
/// stream drives selection and mutation afterwards. Keeping them separate
/// lets campaigns that differ only in behaviour space share their random
/// initialisation prefix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CampaignSeeds {
    pub init: u64,
    pub search: u64,
}

impl CampaignSeeds {
    pub fn new(init: u64, search: u64) -> CampaignSeeds {
        CampaignSeeds { init, search }
    }
}

/// Shared campaign knobs. Method-specific invariants (for instance that the
/// novelty-search population times iterations equals the budget) are checked
/// by the runner that uses them.
#[derive(Debug, Clone, PartialEq)]
pub struct CampaignConfig {
    /// Total evaluation budget N.
    pub budget: usize,
    /// Random evaluations before the guided phase (MAP-Elites, fuzzer).
    pub init_budget: usize,
    pub ns_population: usize,
    pub ns_iterations: usize,
    pub grid_resolution: usize,
    pub mutation: MutationParams,
    pub novelty_threshold: f64,
    pub novelty_k: usize,
    /// Global simulator seed; fixes all in-simulator randomness.
    pub sim_seed: u64,
    pub gmm_components: usize,
    pub gmm_em_iters: usize,
    pub gmm_refit_period: usize,
    /// Quantile of initialisation-phase log-likelihoods used as the
    /// freshness threshold.
    pub freshness_quantile: f64,
    /// Fixed freshness threshold; overrides the quantile rule when set.
    pub freshness_override: Option<f64>,
}

impl CampaignConfig {
    /// Paper-scale defaults for an environment (budget 5000, init 1000,
    /// population 100 x 50 iterations, 50x50 grid, per-environment novelty
    /// threshold).
    pub fn paper_scale(env: EnvId) -> CampaignConfig {
        CampaignConfig {
            budget: 5000,
            init_budget: 1000,
            ns_population: 100,
            ns_iterations: 50,
            grid_resolution: 50,
            mutation: MutationParams::default(),
            novelty_threshold: default_novelty_threshold(env),
            novelty_k: 3,
            sim_seed: 0,
            gmm_components: 10,
            gmm_em_iters: 30,
            gmm_refit_period: 500,
            freshness_quantile: 0.10,
            freshness_override: None,
        }
    }

    /// Desk-scale defaults: budget 500, init 100, population 100 x 5.
    pub fn desk_scale(env: EnvId) -> CampaignConfig {
        CampaignConfig {
            budget: 500,
            init_budget: 100,
            ns_population: 100,
            ns_iterations: 5,
            ..CampaignConfig::paper_scale(env)
        }
    }

    pub fn validate(&self) -> Result<(), CampaignError> {
        if self.init_budget > self.budget {
            return Err(CampaignError::Config(format!(
                "init budget {} exceeds total budget {}",
                self.init_budget, self.budget
            )));
        }
        if self.grid_resolution == 0 {
            return Err(CampaignError::Config("grid resolution must be positive".into()));
        }
        if self.novelty_k == 0 {
            return Err(CampaignError::Config("novelty k must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.freshness_quantile) {
            return Err(CampaignError::Config("freshness quantile must lie in [0, 1]".into()));
        }
        if self.gmm_components == 0 {
            return Err(CampaignError::Config("GMM needs at least one component".into()));
        }
        Ok(())
    }
}

/// Novelty-archive insertion thresholds: 0.9 for the taxi, 0.005 for walker
/// and lander.
pub fn default_novelty_threshold(env: EnvId) -> f64 {
    match env {
        EnvId::Taxi => 0.9,
        EnvId::Lander | EnvId::Walker => 0.005,
    }
}

#[derive(Debug, Error)]
pub enum CampaignError {
    #[error("invalid campaign configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Episode(#[from] EpisodeError),
}

/// One evaluation as recorded in the campaign log.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalRecord {
    /// Dense 1-based evaluation index.
    pub index: usize,
    pub input: SolutionInput,
    pub behavior: [f64; 2],
    pub fitness: f64,
    pub oracle: bool,
    pub final_state: Vec<f64>,
}

impl EvalRecord {
    pub fn from_result(index: usize, result: EvalResult) -> EvalRecord {
        EvalRecord {
            index,
            input: result.input,
            behavior: result.behavior,
            fitness: result.fitness,
            oracle: result.oracle,
            final_state: result.final_state,
        }
    }
}

/// Ordered record of every evaluation in one campaign.
#[derive(Debug, Clone, PartialEq)]
pub struct CampaignLog {
    pub env: EnvId,
    pub method: Method,
    /// The repetition seed this campaign belongs to (not an RNG state).
    pub seed: u64,
    pub input_dim: usize,
    pub state_dim: usize,
    pub records: Vec<EvalRecord>,
}

impl CampaignLog {
    pub fn new(
        env: EnvId,
        method: Method,
        seed: u64,
        input_dim: usize,
        state_dim: usize,
    ) -> CampaignLog {
        CampaignLog {
            env,
            method,
            seed,
            input_dim,
            state_dim,
            records: Vec::new(),
        }
    }

    pub fn push(&mut self, result: EvalResult) {
        debug_assert_eq!(result.input.values.len(), self.input_dim);
        debug_assert_eq!(result.final_state.len(), self.state_dim);
        let index = self.records.len() + 1;
        self.records.push(EvalRecord::from_result(index, result));
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// CSV header: `index,method,seed,input_*,behavior_0,behavior_1,fitness,
    /// oracle,state_*`.
    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        let mut header = String::from("index,method,seed");
        for i in 0..self.input_dim {
            header.push_str(&format!(",input_{i}"));
        }
        header.push_str(",behavior_0,behavior_1,fitness,oracle");
        for i in 0..self.state_dim {
            header.push_str(&format!(",state_{i}"));
        }
        writeln!(w, "{header}")?;
        for r in &self.records {
            let mut row = format!("{},{},{}", r.index, self.method.name(), self.seed);
            for v in &r.input.values {
                row.push(',');
                row.push_str(&fmt_f64(*v));
            }
            row.push_str(&format!(
                ",{},{},{},{}",
                fmt_f64(r.behavior[0]),
                fmt_f64(r.behavior[1]),
                fmt_f64(r.fitness),
                r.oracle
            ));
            for v in &r.final_state {
                row.push(',');
                row.push_str(&fmt_f64(*v));
            }
            writeln!(w, "{row}")?;
        }
        Ok(())
    }

    /// Parses a log back from its CSV form. The environment tag is not a CSV
    /// column and must be supplied by the caller (it is part of the file
    /// name convention in the experiment layout).
    pub fn read_csv(env: EnvId, r: impl BufRead) -> Result<CampaignLog, CsvError> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or(CsvError::Empty)?
            .map_err(|e| CsvError::Io(e.to_string()))?;
        let columns: Vec<&str> = header.split(',').collect();
        let input_dim = columns.iter().filter(|c| c.starts_with("input_")).count();
        let state_dim = columns.iter().filter(|c| c.starts_with("state_")).count();
        let expected = 3 + input_dim + 4 + state_dim;
        if columns.len() != expected || input_dim == 0 {
            return Err(CsvError::Header(header));
        }

        let mut log: Option<CampaignLog> = None;
        for (line_no, line) in lines.enumerate() {
            let line = line.map_err(|e| CsvError::Io(e.to_string()))?;
            if line.is_empty() {
                continue;
            }
            let row = line_no + 2;
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != expected {
                return Err(CsvError::Row {
                    row,
                    message: format!("expected {expected} fields, found {}", fields.len()),
                });
            }
            let bad = |message: &str| CsvError::Row {
                row,
                message: message.to_string(),
            };
            let index: usize = fields[0].parse().map_err(|_| bad("bad index"))?;
            let method = Method::parse(fields[1]).ok_or_else(|| bad("unknown method"))?;
            let seed: u64 = fields[2].parse().map_err(|_| bad("bad seed"))?;
            let parse_f64 = |s: &str, what: &str| -> Result<f64, CsvError> {
                s.parse().map_err(|_| bad(what))
            };
            let mut at = 3;
            let mut values = Vec::with_capacity(input_dim);
            for _ in 0..input_dim {
                values.push(parse_f64(fields[at], "bad input value")?);
                at += 1;
            }
            let behavior = [
                parse_f64(fields[at], "bad behaviour value")?,
                parse_f64(fields[at + 1], "bad behaviour value")?,
            ];
            let fitness = parse_f64(fields[at + 2], "bad fitness")?;
            let oracle = match fields[at + 3] {
                "true" => true,
                "false" => false,
                _ => return Err(bad("oracle must be true or false")),
            };
            at += 4;
            let mut final_state = Vec::with_capacity(state_dim);
            for _ in 0..state_dim {
                final_state.push(parse_f64(fields[at], "bad state value")?);
                at += 1;
            }
            let log = log.get_or_insert_with(|| {
                CampaignLog::new(env, method, seed, input_dim, state_dim)
            });
            if method != log.method || seed != log.seed {
                return Err(bad("method/seed change mid-file"));
            }
            if index != log.records.len() + 1 {
                return Err(bad("evaluation indices must be dense from 1"));
            }
            log.records.push(EvalRecord {
                index,
                input: SolutionInput::new(env, values),
                behavior,
                fitness,
                oracle,
                final_state,
            });
        }
        log.ok_or(CsvError::Empty)
    }
}

#[derive(Debug, Error)]
pub enum CsvError {
    #[error("campaign CSV is empty")]
    Empty,
    #[error("unrecognized campaign CSV header: {0}")]
    Header(String),
    #[error("campaign CSV row {row}: {message}")]
    Row { row: usize, message: String },
    #[error("i/o error: {0}")]
    Io(String),
}

/// Fault records: oracle-positive evaluations deduplicated by exact input
/// equality, in discovery order.
pub fn faults_from_log(log: &CampaignLog) -> Vec<&EvalRecord> {
    let mut seen = std::collections::HashSet::new();
    log.records
        .iter()
        .filter(|r| r.oracle && seen.insert(r.input.dedup_key()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(index: usize, values: Vec<f64>, oracle: bool) -> EvalRecord {
        EvalRecord {
            index,
            input: SolutionInput::new(EnvId::Lander, values),
            behavior: [0.0, 0.0],
            fitness: 1.0,
            oracle,
            final_state: vec![0.0, 0.0],
        }
    }

    fn log_with(records: Vec<EvalRecord>) -> CampaignLog {
        CampaignLog {
            env: EnvId::Lander,
            method: Method::Random,
            seed: 0,
            input_dim: 2,
            state_dim: 2,
            records,
        }
    }

    #[test]
    fn faults_filter_and_dedup() {
        let log = log_with(vec![
            record(1, vec![0.0, 0.0], false),
            record(2, vec![1.0, 0.0], true),
            record(3, vec![2.0, 0.0], true),
        ]);
        assert_eq!(faults_from_log(&log).len(), 2);

        let dup = log_with(vec![
            record(1, vec![1.0, 0.0], true),
            record(2, vec![1.0, 0.0], true),
        ]);
        assert_eq!(faults_from_log(&dup).len(), 1);

        assert!(faults_from_log(&log_with(vec![])).is_empty());
    }

    #[test]
    fn csv_roundtrip_preserves_rendered_values() {
        let mut log = log_with(vec![]);
        log.push(EvalResult {
            input: SolutionInput::new(EnvId::Lander, vec![10.5, -3.25]),
            behavior: [0.125, -1.0],
            fitness: -42.5,
            oracle: true,
            final_state: vec![1.0, 2.0],
        });
        let mut bytes = Vec::new();
        log.write_csv(&mut bytes).unwrap();
        let parsed = CampaignLog::read_csv(EnvId::Lander, bytes.as_slice()).unwrap();
        assert_eq!(parsed.records.len(), 1);
        assert_eq!(parsed.records[0].input.values, vec![10.5, -3.25]);
        assert_eq!(parsed.records[0].fitness, -42.5);
        assert!(parsed.records[0].oracle);
        let mut again = Vec::new();
        parsed.write_csv(&mut again).unwrap();
        assert_eq!(bytes, again);
    }

    #[test]
    fn config_validation_rejects_inverted_budgets() {
        let mut config = CampaignConfig::desk_scale(EnvId::Taxi);
        config.init_budget = config.budget + 1;
        assert!(config.validate().is_err());
    }
}
