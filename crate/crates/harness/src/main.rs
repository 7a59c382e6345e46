use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qdtest_core::envs::TaxiWorld;
use qdtest_core::mdp::EnvId;
use qdtest_core::policies::{save_qtable, solve_rate, train_q_learning_gated};
use qdtest_harness::config::{ExperimentSpec, Preset, RawSpec};
use qdtest_harness::{report, runner, HarnessError};

/// Quality-diversity testing of deterministic decision policies.
#[derive(Parser)]
#[command(name = "qdtest", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct SpecArgs {
    /// Declarative experiment config (TOML); overlays the preset defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Environment name (taxi, lander, walker); overrides the config file.
    #[arg(long)]
    env: Option<String>,
    /// Scale preset supplying defaults.
    #[arg(long, default_value = "desk")]
    preset: String,
}

impl SpecArgs {
    fn resolve(&self) -> Result<ExperimentSpec, HarnessError> {
        let preset = Preset::parse(&self.preset)
            .ok_or_else(|| HarnessError::Config(format!("unknown preset '{}'", self.preset)))?;
        let mut raw = match &self.config {
            Some(path) => RawSpec::from_file(path)?,
            None => RawSpec::default(),
        };
        if self.env.is_some() {
            raw.environment = self.env.clone();
        }
        ExperimentSpec::resolve(&raw, preset)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run the method x seed x behaviour-space experiment grid.
    Run {
        #[command(flatten)]
        spec: SpecArgs,
        /// Output root; each run gets a timestamped subdirectory.
        #[arg(long, default_value = "runs")]
        out: PathBuf,
        /// Parallel campaign workers (0 = all cores).
        #[arg(long, default_value_t = 0)]
        workers: usize,
        /// Write into --out directly, overwriting previous artifacts.
        #[arg(long)]
        force: bool,
    },
    /// Run the walker behaviour-space sweep and the combined comparison.
    Rq3Sweep {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long, default_value = "runs")]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        workers: usize,
        #[arg(long)]
        force: bool,
    },
    /// Train and persist the taxi Q-table (lander/walker use built-ins).
    TrainPolicy {
        #[command(flatten)]
        spec: SpecArgs,
        /// Artifact file to write.
        #[arg(long, default_value = "qtable.txt")]
        out: PathBuf,
    },
    /// Recompute metric CSVs from an existing logs directory.
    Report {
        #[command(flatten)]
        spec: SpecArgs,
        /// A run's `logs/` directory (or the run directory itself).
        #[arg(long)]
        logs: PathBuf,
        #[arg(long, default_value = "report")]
        out: PathBuf,
    },
    /// Parse and validate a config file, printing the resolved experiment.
    ValidateConfig {
        #[command(flatten)]
        spec: SpecArgs,
    },
}

fn run(command: Command) -> Result<(), HarnessError> {
    match command {
        Command::Run { spec, out, workers, force } => {
            let spec = spec.resolve()?;
            let outcome = runner::run_experiment(&spec, &out, workers, force)?;
            println!("run artifacts: {}", outcome.dir.display());
            Ok(())
        }
        Command::Rq3Sweep { spec, out, workers, force } => {
            let mut args = spec;
            if args.env.is_none() {
                args.env = Some("walker".into());
            }
            let spec = args.resolve()?;
            let outcome = runner::rq3_sweep(&spec, &out, workers, force)?;
            println!("sweep artifacts: {}", outcome.dir.display());
            Ok(())
        }
        Command::TrainPolicy { spec, out } => {
            let env_name = spec.env.clone().unwrap_or_else(|| "taxi".into());
            match EnvId::parse(&env_name) {
                Some(EnvId::Taxi) => {}
                Some(_) => {
                    println!("{env_name}: heuristic policy built-in, nothing to train");
                    return Ok(());
                }
                None => {
                    return Err(HarnessError::Config(format!(
                        "unknown environment '{env_name}'"
                    )))
                }
            }
            let spec = spec.resolve()?;
            let world = TaxiWorld::builtin();
            let params = spec.train_params();
            let table = train_q_learning_gated(world.map(), &params, 1)
                .map_err(|e| HarnessError::Campaign(e.to_string()))?;
            let rate = solve_rate(world.map(), &table, 1000, params.seed ^ 0x5eed);
            let file = std::fs::File::create(&out).map_err(|e| {
                HarnessError::Campaign(format!("cannot write {}: {e}", out.display()))
            })?;
            save_qtable(&table, std::io::BufWriter::new(file))
                .map_err(|e| HarnessError::Campaign(e.to_string()))?;
            println!("q-table written to {} (solve rate {rate:.3})", out.display());
            Ok(())
        }
        Command::Report { spec, logs, out } => {
            let logs_dir = if logs.join("logs").is_dir() { logs.join("logs") } else { logs };
            let (env, parsed) = report::read_logs_dir(&logs_dir)?;
            let mut args = spec;
            args.env = Some(env.name().to_string());
            let spec = args.resolve()?;
            std::fs::create_dir_all(&out)
                .map_err(|e| HarnessError::Config(format!("cannot create out dir: {e}")))?;
            let files = report::write_reports(&out, &spec, &parsed)?;
            println!("wrote {} metric files to {}", files.len(), out.display());
            Ok(())
        }
        Command::ValidateConfig { spec } => {
            let spec = spec.resolve()?;
            let text = toml::to_string(&spec)
                .map_err(|e| HarnessError::Config(format!("cannot render spec: {e}")))?;
            println!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
