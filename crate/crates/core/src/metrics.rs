//! Measurements over campaign logs: distinct faults over time, behaviour and
//! faulty-behaviour coverage on a result grid, k-nearest-neighbour
//! sparseness of final/failure states, ratios against a baseline and
//! cross-seed aggregation.

use std::collections::HashSet;

use thiserror::Error;

use crate::qd::{CampaignLog, GridGeom, Method};

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("need at least 2 points for k-NN sparseness, got {0}")]
    InsufficientData(usize),
    #[error("series lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("aggregation needs at least one series")]
    NoSeries,
}

/// A per-evaluation-index metric series for one campaign.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricSeries {
    pub method: Method,
    pub seed: u64,
    pub values: Vec<f64>,
}

/// Occupancy view of the behaviour grid: which bins were visited at all and
/// which were visited by a fault-triggering solution.
#[derive(Debug, Clone)]
pub struct ResultGrid {
    geom: GridGeom,
    occupied: Vec<bool>,
    fault_occupied: Vec<bool>,
    occupied_count: usize,
    fault_count: usize,
}

impl ResultGrid {
    pub fn new(geom: GridGeom) -> ResultGrid {
        let cells = geom.cells();
        ResultGrid {
            geom,
            occupied: vec![false; cells],
            fault_occupied: vec![false; cells],
            occupied_count: 0,
            fault_count: 0,
        }
    }

    pub fn record(&mut self, behavior: [f64; 2], oracle: bool) {
        let cell = self.geom.flat_index(behavior);
        if !self.occupied[cell] {
            self.occupied[cell] = true;
            self.occupied_count += 1;
        }
        if oracle && !self.fault_occupied[cell] {
            self.fault_occupied[cell] = true;
            self.fault_count += 1;
        }
    }

    pub fn occupied_bins(&self) -> usize {
        self.occupied_count
    }

    pub fn fault_bins(&self) -> usize {
        self.fault_count
    }
}

/// Number of distinct fault-triggering inputs among the first `i` records,
/// for every prefix length `i`.
pub fn fault_count_series(log: &CampaignLog) -> MetricSeries {
    let mut seen = HashSet::new();
    let mut count = 0usize;
    let values = log
        .records
        .iter()
        .map(|r| {
            if r.oracle && seen.insert(r.input.dedup_key()) {
                count += 1;
            }
            count as f64
        })
        .collect();
    MetricSeries {
        method: log.method,
        seed: log.seed,
        values,
    }
}

/// Occupied-bin counts (all solutions; fault-triggering solutions) among the
/// first `i` records, for every prefix length `i`.
pub fn coverage_series(log: &CampaignLog, geom: &GridGeom) -> (MetricSeries, MetricSeries) {
    let mut grid = ResultGrid::new(geom.clone());
    let mut behavior = Vec::with_capacity(log.len());
    let mut faulty = Vec::with_capacity(log.len());
    for r in &log.records {
        grid.record(r.behavior, r.oracle);
        behavior.push(grid.occupied_bins() as f64);
        faulty.push(grid.fault_bins() as f64);
    }
    (
        MetricSeries { method: log.method, seed: log.seed, values: behavior },
        MetricSeries { method: log.method, seed: log.seed, values: faulty },
    )
}

/// Mean over points of the average Euclidean distance to each point's
/// `min(k, n-1)` nearest other points. Requires at least two points.
pub fn knn_sparseness(points: &[Vec<f64>], k: usize) -> Result<f64, MetricsError> {
    let n = points.len();
    if n < 2 {
        return Err(MetricsError::InsufficientData(n));
    }
    let k = k.min(n - 1);
    let mut total = 0.0;
    let mut distances = Vec::with_capacity(n - 1);
    for (i, p) in points.iter().enumerate() {
        distances.clear();
        for (j, q) in points.iter().enumerate() {
            if i == j {
                continue;
            }
            let d2: f64 = p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum();
            distances.push(d2.sqrt());
        }
        distances.sort_by(|a, b| a.partial_cmp(b).expect("finite distances"));
        total += distances[..k].iter().sum::<f64>() / k as f64;
    }
    Ok(total / n as f64)
}

/// Pointwise ratio against a baseline: `0/0` is 1.0, `x/0` with `x > 0` is a
/// missing value (never infinity).
pub fn relative_to_baseline(
    series: &[f64],
    baseline: &[f64],
) -> Result<Vec<Option<f64>>, MetricsError> {
    if series.len() != baseline.len() {
        return Err(MetricsError::LengthMismatch(series.len(), baseline.len()));
    }
    Ok(series
        .iter()
        .zip(baseline)
        .map(|(x, b)| {
            if *b == 0.0 {
                if *x == 0.0 {
                    Some(1.0)
                } else {
                    None
                }
            } else {
                Some(x / b)
            }
        })
        .collect())
}

/// Lower `q`-quantile of a sorted slice, linearly interpolated between order
/// statistics.
pub fn quantile_linear(sorted: &[f64], q: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * q.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let frac = h - lo as f64;
    if lo + 1 < n {
        sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
    } else {
        sorted[n - 1]
    }
}

/// Pointwise median and quartiles across seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesAggregate {
    pub median: Vec<f64>,
    pub q1: Vec<f64>,
    pub q3: Vec<f64>,
}

pub fn aggregate_across_seeds(series: &[&[f64]]) -> Result<SeriesAggregate, MetricsError> {
    if series.is_empty() {
        return Err(MetricsError::NoSeries);
    }
    let len = series[0].len();
    for s in series {
        if s.len() != len {
            return Err(MetricsError::LengthMismatch(len, s.len()));
        }
    }
    let mut median = Vec::with_capacity(len);
    let mut q1 = Vec::with_capacity(len);
    let mut q3 = Vec::with_capacity(len);
    let mut column = Vec::with_capacity(series.len());
    for i in 0..len {
        column.clear();
        column.extend(series.iter().map(|s| s[i]));
        column.sort_by(|a, b| a.partial_cmp(b).expect("finite metric values"));
        q1.push(quantile_linear(&column, 0.25));
        median.push(quantile_linear(&column, 0.5));
        q3.push(quantile_linear(&column, 0.75));
    }
    Ok(SeriesAggregate { median, q1, q3 })
}

/// Aggregation over series with missing values: a point aggregates over the
/// seeds where it is present and is missing when absent everywhere.
pub fn aggregate_optional(
    series: &[Vec<Option<f64>>],
) -> Result<Vec<(Option<f64>, Option<f64>, Option<f64>)>, MetricsError> {
    if series.is_empty() {
        return Err(MetricsError::NoSeries);
    }
    let len = series[0].len();
    for s in series {
        if s.len() != len {
            return Err(MetricsError::LengthMismatch(len, s.len()));
        }
    }
    let mut out = Vec::with_capacity(len);
    let mut column = Vec::new();
    for i in 0..len {
        column.clear();
        column.extend(series.iter().filter_map(|s| s[i]));
        if column.is_empty() {
            out.push((None, None, None));
        } else {
            column.sort_by(|a, b| a.partial_cmp(b).expect("finite metric values"));
            out.push((
                Some(quantile_linear(&column, 0.5)),
                Some(quantile_linear(&column, 0.25)),
                Some(quantile_linear(&column, 0.75)),
            ));
        }
    }
    Ok(out)
}

/// Evenly spaced prefix lengths at which expensive metrics are evaluated;
/// always ends at `n`.
pub fn default_checkpoints(n: usize, count: usize) -> Vec<usize> {
    if n == 0 || count == 0 {
        return Vec::new();
    }
    let count = count.min(n);
    let mut points: Vec<usize> = (1..=count).map(|i| i * n / count).collect();
    points.dedup();
    points
}

/// k-NN sparseness of final states over log prefixes, evaluated at the given
/// checkpoint prefix lengths. With `fault_only`, the points are the final
/// states of distinct faults. Missing values mark checkpoints with fewer
/// than two points.
pub fn sparseness_series(
    log: &CampaignLog,
    k: usize,
    checkpoints: &[usize],
    fault_only: bool,
) -> Vec<Option<f64>> {
    let mut seen = HashSet::new();
    let mut points: Vec<Vec<f64>> = Vec::new();
    let mut out = Vec::with_capacity(checkpoints.len());
    let mut at = 0usize;
    for &checkpoint in checkpoints {
        while at < log.records.len() && at < checkpoint {
            let r = &log.records[at];
            let include = if fault_only {
                r.oracle && seen.insert(r.input.dedup_key())
            } else {
                true
            };
            if include {
                points.push(r.final_state.clone());
            }
            at += 1;
        }
        out.push(knn_sparseness(&points, k).ok());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::{EnvId, SolutionInput};
    use crate::qd::EvalRecord;

    fn log_of(records: Vec<(Vec<f64>, [f64; 2], bool)>) -> CampaignLog {
        let mut log = CampaignLog::new(EnvId::Lander, Method::Random, 0, 2, 2);
        for (i, (values, behavior, oracle)) in records.into_iter().enumerate() {
            log.records.push(EvalRecord {
                index: i + 1,
                input: SolutionInput::new(EnvId::Lander, values.clone()),
                behavior,
                fitness: 0.0,
                oracle,
                final_state: values,
            });
        }
        log
    }

    fn unit_geom() -> GridGeom {
        GridGeom::new([(0.0, 1.0), (0.0, 1.0)], 50)
    }

    #[test]
    fn fault_series_counts_distinct_inputs() {
        let log = log_of(vec![
            (vec![0.0, 0.0], [0.1, 0.1], false),
            (vec![1.0, 0.0], [0.1, 0.1], true),
            (vec![2.0, 0.0], [0.1, 0.1], true),
        ]);
        assert_eq!(fault_count_series(&log).values, vec![0.0, 1.0, 2.0]);

        let repeated = log_of(vec![
            (vec![1.0, 0.0], [0.1, 0.1], true),
            (vec![1.0, 0.0], [0.1, 0.1], true),
        ]);
        assert_eq!(fault_count_series(&repeated).values, vec![1.0, 1.0]);
    }

    #[test]
    fn coverage_counts_bins_not_records() {
        let log = log_of(vec![
            (vec![0.0, 0.0], [0.101, 0.101], false),
            (vec![1.0, 0.0], [0.103, 0.103], false), // same 50x50 bin
            (vec![2.0, 0.0], [0.9, 0.9], true),
        ]);
        let (behavior, faulty) = coverage_series(&log, &unit_geom());
        assert_eq!(behavior.values, vec![1.0, 1.0, 2.0]);
        assert_eq!(faulty.values, vec![0.0, 0.0, 1.0]);
        for (f, b) in faulty.values.iter().zip(&behavior.values) {
            assert!(f <= b);
        }
    }

    #[test]
    fn knn_sparseness_on_unit_square_corners() {
        let corners = vec![
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![0.0, 1.0],
            vec![1.0, 1.0],
        ];
        let expected = (2.0 + 2.0f64.sqrt()) / 3.0;
        assert!((knn_sparseness(&corners, 3).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn knn_sparseness_of_identical_points_is_zero() {
        let points = vec![vec![3.0, 4.0], vec![3.0, 4.0]];
        assert_eq!(knn_sparseness(&points, 3).unwrap(), 0.0);
    }

    #[test]
    fn knn_sparseness_needs_two_points() {
        assert!(matches!(
            knn_sparseness(&[vec![1.0]], 3),
            Err(MetricsError::InsufficientData(1))
        ));
    }

    #[test]
    fn relative_series_conventions() {
        let same = relative_to_baseline(&[1.0, 2.0], &[1.0, 2.0]).unwrap();
        assert_eq!(same, vec![Some(1.0), Some(1.0)]);
        let double = relative_to_baseline(&[2.0, 4.0], &[1.0, 2.0]).unwrap();
        assert_eq!(double, vec![Some(2.0), Some(2.0)]);
        let zeros = relative_to_baseline(&[0.0, 3.0, 1.0], &[0.0, 0.0, 2.0]).unwrap();
        assert_eq!(zeros, vec![Some(1.0), None, Some(0.5)]);
    }

    #[test]
    fn aggregate_order_statistics() {
        let s1 = [1.0];
        let s2 = [2.0];
        let s3 = [3.0];
        let s4 = [4.0];
        let s5 = [5.0];
        let agg = aggregate_across_seeds(&[&s1, &s2, &s3, &s4, &s5]).unwrap();
        assert_eq!(agg.median, vec![3.0]);
        assert_eq!(agg.q1, vec![2.0]);
        assert_eq!(agg.q3, vec![4.0]);
    }

    #[test]
    fn aggregate_single_series_is_itself() {
        let s = [1.5, 2.5, 3.5];
        let agg = aggregate_across_seeds(&[&s]).unwrap();
        assert_eq!(agg.median, s.to_vec());
        assert_eq!(agg.q1, s.to_vec());
        assert_eq!(agg.q3, s.to_vec());
    }

    #[test]
    fn aggregate_is_permutation_invariant() {
        let a = [1.0, 5.0];
        let b = [2.0, 6.0];
        let c = [0.5, 4.0];
        let x = aggregate_across_seeds(&[&a, &b, &c]).unwrap();
        let y = aggregate_across_seeds(&[&c, &a, &b]).unwrap();
        assert_eq!(x, y);
    }

    #[test]
    fn checkpoints_cover_the_budget() {
        let cp = default_checkpoints(500, 100);
        assert_eq!(*cp.last().unwrap(), 500);
        assert_eq!(cp.len(), 100);
        let tiny = default_checkpoints(3, 100);
        assert_eq!(tiny, vec![1, 2, 3]);
        assert!(default_checkpoints(0, 100).is_empty());
    }
}
