//! Metric CSV reports: per-metric files with cross-seed aggregates, the
//! plot-data manifest, and the combined behaviour-space comparison table.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use qdtest_core::envs::behavior_space;
use qdtest_core::mdp::{fmt_f64, EnvId};
use qdtest_core::metrics::{
    aggregate_across_seeds, aggregate_optional, coverage_series, default_checkpoints,
    fault_count_series, sparseness_series,
};
use qdtest_core::qd::{CampaignLog, GridGeom, Method};
use serde::Serialize;

use crate::config::ExperimentSpec;
use crate::HarnessError;

pub const SERIES_METRICS: [&str; 3] = ["faults", "coverage", "faulty_coverage"];
pub const SPARSENESS_METRICS: [&str; 2] =
    ["final_state_sparseness_rel", "failure_state_sparseness_rel"];

#[derive(Debug, Serialize)]
struct PlotEntry {
    path: String,
    environment: String,
    behavior_space: String,
    metric: String,
}

#[derive(Debug, Serialize)]
struct PlotManifest {
    files: Vec<PlotEntry>,
}

fn io_err(e: std::io::Error) -> HarnessError {
    HarnessError::Campaign(format!("report i/o: {e}"))
}

fn opt_cell(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

type LogsBySpace<'a> = BTreeMap<&'a str, BTreeMap<Method, Vec<&'a CampaignLog>>>;

fn group<'a>(logs: &'a [(String, Method, u64, CampaignLog)]) -> LogsBySpace<'a> {
    let mut grouped: LogsBySpace<'a> = BTreeMap::new();
    for (bspace, method, _, log) in logs {
        grouped
            .entry(bspace.as_str())
            .or_default()
            .entry(*method)
            .or_default()
            .push(log);
    }
    for methods in grouped.values_mut() {
        for logs in methods.values_mut() {
            logs.sort_by_key(|l| l.seed);
        }
    }
    grouped
}

/// Writes every metric CSV and the plot manifest for a finished run.
pub fn write_reports(
    run_dir: &Path,
    spec: &ExperimentSpec,
    logs: &[(String, Method, u64, CampaignLog)],
) -> Result<Vec<PathBuf>, HarnessError> {
    let metrics_dir = run_dir.join("metrics");
    fs::create_dir_all(&metrics_dir).map_err(io_err)?;
    let env = spec.env();
    let mut plot_entries = Vec::new();
    let mut written = Vec::new();

    for (bspace_name, by_method) in group(logs) {
        let space = behavior_space(env, bspace_name)
            .map_err(|e| HarnessError::Config(e.to_string()))?;
        let geom = GridGeom::from_space(&space, spec.grid_resolution);

        // cumulative series: distinct faults, behaviour coverage, faulty coverage
        for metric in SERIES_METRICS {
            let path = metrics_dir.join(format!("{}__{}__{}.csv", env.name(), bspace_name, metric));
            let mut w = std::io::BufWriter::new(fs::File::create(&path).map_err(io_err)?);
            writeln!(w, "index,method,median,q1,q3").map_err(io_err)?;
            for (method, method_logs) in &by_method {
                let series: Vec<Vec<f64>> = method_logs
                    .iter()
                    .map(|log| match metric {
                        "faults" => fault_count_series(log).values,
                        "coverage" => coverage_series(log, &geom).0.values,
                        _ => coverage_series(log, &geom).1.values,
                    })
                    .collect();
                let views: Vec<&[f64]> = series.iter().map(|s| s.as_slice()).collect();
                let agg = aggregate_across_seeds(&views)
                    .map_err(|e| HarnessError::Campaign(e.to_string()))?;
                for i in 0..agg.median.len() {
                    writeln!(
                        w,
                        "{},{},{},{},{}",
                        i + 1,
                        method.name(),
                        fmt_f64(agg.median[i]),
                        fmt_f64(agg.q1[i]),
                        fmt_f64(agg.q3[i])
                    )
                    .map_err(io_err)?;
                }
            }
            plot_entries.push(PlotEntry {
                path: format!("metrics/{}", path.file_name().unwrap().to_string_lossy()),
                environment: env.name().into(),
                behavior_space: bspace_name.into(),
                metric: metric.into(),
            });
            written.push(path);
        }

        // final/failure-state sparseness relative to random testing,
        // evaluated at checkpoints and paired by seed
        let max_len = by_method
            .values()
            .flatten()
            .map(|log| log.len())
            .max()
            .unwrap_or(0);
        let checkpoints = default_checkpoints(max_len, spec.sparseness_checkpoints);
        let random_logs = by_method.get(&Method::Random);
        for (metric, fault_only) in SPARSENESS_METRICS.into_iter().zip([false, true]) {
            let Some(random_logs) = random_logs else {
                continue; // relative reporting needs the random baseline
            };
            let path = metrics_dir.join(format!("{}__{}__{}.csv", env.name(), bspace_name, metric));
            let mut w = std::io::BufWriter::new(fs::File::create(&path).map_err(io_err)?);
            writeln!(w, "index,method,median,q1,q3").map_err(io_err)?;
            let baseline: BTreeMap<u64, Vec<Option<f64>>> = random_logs
                .iter()
                .map(|log| {
                    (log.seed, sparseness_series(log, 3, &checkpoints, fault_only))
                })
                .collect();
            for (method, method_logs) in &by_method {
                let ratios: Vec<Vec<Option<f64>>> = method_logs
                    .iter()
                    .filter_map(|log| {
                        let own = sparseness_series(log, 3, &checkpoints, fault_only);
                        let base = baseline.get(&log.seed)?;
                        Some(
                            own.iter()
                                .zip(base)
                                .map(|(x, b)| match (x, b) {
                                    (Some(x), Some(b)) if *b != 0.0 => Some(x / b),
                                    (Some(x), Some(_)) if *x == 0.0 => Some(1.0),
                                    _ => None,
                                })
                                .collect(),
                        )
                    })
                    .collect();
                if ratios.is_empty() {
                    continue;
                }
                let agg = aggregate_optional(&ratios)
                    .map_err(|e| HarnessError::Campaign(e.to_string()))?;
                for (i, (median, q1, q3)) in agg.iter().enumerate() {
                    writeln!(
                        w,
                        "{},{},{},{},{}",
                        checkpoints[i],
                        method.name(),
                        opt_cell(*median),
                        opt_cell(*q1),
                        opt_cell(*q3)
                    )
                    .map_err(io_err)?;
                }
            }
            plot_entries.push(PlotEntry {
                path: format!("metrics/{}", path.file_name().unwrap().to_string_lossy()),
                environment: env.name().into(),
                behavior_space: bspace_name.into(),
                metric: metric.into(),
            });
            written.push(path);
        }
    }

    let manifest = PlotManifest { files: plot_entries };
    let text = toml::to_string(&manifest)
        .map_err(|e| HarnessError::Campaign(format!("plot manifest: {e}")))?;
    let path = run_dir.join("plot_manifest.toml");
    fs::write(&path, text).map_err(io_err)?;
    written.push(path);
    Ok(written)
}

/// Final-value comparison across behaviour spaces, keyed by
/// (behaviour space, method, metric).
pub fn write_rq3_combined(
    run_dir: &Path,
    spec: &ExperimentSpec,
    logs: &[(String, Method, u64, CampaignLog)],
) -> Result<PathBuf, HarnessError> {
    let env = spec.env();
    let path = run_dir.join("rq3_combined.csv");
    let mut w = std::io::BufWriter::new(fs::File::create(&path).map_err(io_err)?);
    writeln!(w, "behavior_space,method,metric,median,q1,q3").map_err(io_err)?;
    for (bspace_name, by_method) in group(logs) {
        let space = behavior_space(env, bspace_name)
            .map_err(|e| HarnessError::Config(e.to_string()))?;
        let geom = GridGeom::from_space(&space, spec.grid_resolution);
        for (method, method_logs) in &by_method {
            for metric in SERIES_METRICS {
                let finals: Vec<f64> = method_logs
                    .iter()
                    .map(|log| match metric {
                        "faults" => *fault_count_series(log).values.last().unwrap_or(&0.0),
                        "coverage" => {
                            *coverage_series(log, &geom).0.values.last().unwrap_or(&0.0)
                        }
                        _ => *coverage_series(log, &geom).1.values.last().unwrap_or(&0.0),
                    })
                    .collect();
                let mut sorted = finals;
                sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite metric"));
                writeln!(
                    w,
                    "{},{},{},{},{},{}",
                    bspace_name,
                    method.name(),
                    metric,
                    fmt_f64(qdtest_core::metrics::quantile_linear(&sorted, 0.5)),
                    fmt_f64(qdtest_core::metrics::quantile_linear(&sorted, 0.25)),
                    fmt_f64(qdtest_core::metrics::quantile_linear(&sorted, 0.75)),
                )
                .map_err(io_err)?;
            }
        }
    }
    Ok(path)
}

/// Rebuilds campaign logs from a run's `logs/` directory (file names encode
/// environment, behaviour space, method and seed).
pub fn read_logs_dir(
    logs_dir: &Path,
) -> Result<(EnvId, Vec<(String, Method, u64, CampaignLog)>), HarnessError> {
    let mut out = Vec::new();
    let mut env_seen: Option<EnvId> = None;
    let mut entries: Vec<PathBuf> = fs::read_dir(logs_dir)
        .map_err(|e| HarnessError::Config(format!("cannot list {}: {e}", logs_dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    entries.sort();
    for path in entries {
        let stem = path.file_stem().unwrap_or_default().to_string_lossy().into_owned();
        let parts: Vec<&str> = stem.split("__").collect();
        if parts.len() != 4 {
            return Err(HarnessError::Config(format!(
                "log file name '{stem}.csv' is not <env>__<space>__<method>__seed<k>.csv"
            )));
        }
        let env = EnvId::parse(parts[0]).ok_or_else(|| {
            HarnessError::Config(format!("unknown environment in log name '{stem}'"))
        })?;
        if *env_seen.get_or_insert(env) != env {
            return Err(HarnessError::Config("mixed environments in one logs directory".into()));
        }
        let method = Method::parse(parts[2]).ok_or_else(|| {
            HarnessError::Config(format!("unknown method in log name '{stem}'"))
        })?;
        let seed: u64 = parts[3]
            .strip_prefix("seed")
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| HarnessError::Config(format!("bad seed in log name '{stem}'")))?;
        let file = fs::File::open(&path)
            .map_err(|e| HarnessError::Config(format!("cannot open {}: {e}", path.display())))?;
        let log = CampaignLog::read_csv(env, std::io::BufReader::new(file))
            .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        out.push((parts[1].to_string(), method, seed, log));
    }
    let env = env_seen
        .ok_or_else(|| HarnessError::Config(format!("no log CSVs in {}", logs_dir.display())))?;
    Ok((env, out))
}
