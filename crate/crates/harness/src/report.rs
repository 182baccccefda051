//! Report records and their CSV/JSON readers and writers.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::path::Path;

use anyhow::{Context, Result};
use kaczmarz_core::{Method, SolveReport};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

/// Points kept per run in `history_<method>.csv`.
pub const MAX_HISTORY_POINTS: usize = 4096;

/// Baseline and two-row methods compared in the speed-up table.
pub const SPEEDUP_PAIRS: [(Method, Method); 4] = [
    (Method::Grk, Method::Tgrk),
    (Method::Srk, Method::Tsrk),
    (Method::Srks, Method::Tsrks),
    (Method::Gtrk, Method::Trks),
];

/// One row of `runs.csv`. Timings live in `timings.csv` so this file is reproducible byte for byte.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub method: String,
    pub trial: usize,
    pub seed: u64,
    pub iterations: usize,
    pub converged: bool,
    pub budget_exhausted: bool,
    pub fallbacks: usize,
    pub final_res: f64,
    pub final_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingRecord {
    pub method: String,
    pub trial: usize,
    pub elapsed_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryPoint {
    pub trial: usize,
    pub iteration: usize,
    pub res: Option<f64>,
    pub rel_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: String,
    pub mean_iterations: f64,
    pub mean_seconds: f64,
    pub mean_final_res: f64,
    pub mean_final_error: Option<f64>,
    pub converged_trials: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Speedup {
    pub baseline: String,
    pub two_row: String,
    /// Mean baseline time over mean two-row time; absent when the latter is zero.
    pub speedup: Option<f64>,
    /// Mean two-row iterations over mean baseline iterations.
    pub iteration_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub problem: String,
    /// Whether generated problems were redrawn for every trial.
    pub problem_redrawn: bool,
    pub trials: usize,
    pub stop_rule: String,
    pub tol: f64,
    pub seed: u64,
    pub methods: Vec<MethodSummary>,
    pub speedups: Vec<Speedup>,
}

impl Summary {
    pub fn method(&self, method: Method) -> Option<&MethodSummary> {
        self.methods.iter().find(|m| m.method == method.name())
    }
}

impl RunRecord {
    pub fn from_report(method: Method, trial: usize, seed: u64, report: &SolveReport) -> Self {
        Self {
            method: method.name().to_string(),
            trial,
            seed,
            iterations: report.iterations,
            converged: report.converged,
            budget_exhausted: report.budget_exhausted,
            fallbacks: report.fallbacks,
            final_res: report.final_residual,
            final_error: report.final_error,
        }
    }
}

fn mean(values: impl Iterator<Item = f64>, count: usize) -> f64 {
    values.sum::<f64>() / count as f64
}

/// Per-method means over trials and the speed-up table, for the methods in `order`.
pub fn summarize(order: &[Method], runs: &[RunRecord], timings: &[TimingRecord], header: Summary) -> Summary {
    let methods: Vec<MethodSummary> = order
        .iter()
        .map(|m| {
            let name = m.name();
            let mine: Vec<&RunRecord> = runs.iter().filter(|r| r.method == name).collect();
            let secs: Vec<f64> = timings.iter().filter(|t| t.method == name).map(|t| t.elapsed_seconds).collect();
            let n = mine.len();
            let errors: Option<Vec<f64>> = mine.iter().map(|r| r.final_error).collect();
            MethodSummary {
                method: name.to_string(),
                mean_iterations: mean(mine.iter().map(|r| r.iterations as f64), n),
                mean_seconds: mean(secs.iter().copied(), secs.len()),
                mean_final_res: mean(mine.iter().map(|r| r.final_res), n),
                mean_final_error: errors.map(|e| mean(e.into_iter(), n)),
                converged_trials: mine.iter().filter(|r| r.converged).count(),
            }
        })
        .collect();
    let find = |m: Method| methods.iter().find(|s| s.method == m.name());
    let ratio = |a: f64, b: f64| (b != 0.0).then(|| a / b);
    let speedups = SPEEDUP_PAIRS
        .iter()
        .filter_map(|&(base, two)| {
            let (b, t) = (find(base)?, find(two)?);
            Some(Speedup {
                baseline: b.method.clone(),
                two_row: t.method.clone(),
                speedup: ratio(b.mean_seconds, t.mean_seconds),
                iteration_ratio: ratio(t.mean_iterations, b.mean_iterations),
            })
        })
        .collect();
    Summary { methods, speedups, ..header }
}

/// Evenly spaced subsample keeping the first and last entries.
pub fn downsample<T: Clone>(points: &[T], max: usize) -> Vec<T> {
    if points.len() <= max {
        return points.to_vec();
    }
    if max < 2 {
        return points[..max].to_vec();
    }
    let last = points.len() - 1;
    (0..max).map(|k| points[k * last / (max - 1)].clone()).collect()
}

/// Merges the residual and error histories of one run and downsamples them.
pub fn history_points(trial: usize, report: &SolveReport) -> Vec<HistoryPoint> {
    let mut merged: BTreeMap<usize, (Option<f64>, Option<f64>)> = BTreeMap::new();
    for &(k, res) in &report.residual_history {
        merged.entry(k).or_default().0 = Some(res);
    }
    for &(k, err) in report.error_history.iter().flatten() {
        merged.entry(k).or_default().1 = Some(err);
    }
    let all: Vec<HistoryPoint> = merged
        .into_iter()
        .map(|(iteration, (res, rel_error))| HistoryPoint { trial, iteration, res, rel_error })
        .collect();
    downsample(&all, MAX_HISTORY_POINTS)
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = csv::Writer::from_writer(file);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    r.deserialize().collect::<Result<Vec<T>, _>>().with_context(|| format!("parsing {}", path.display()))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn header() -> Summary {
        Summary {
            problem: "p".into(),
            problem_redrawn: true,
            trials: 2,
            stop_rule: "residual".into(),
            tol: 1e-6,
            seed: 0,
            methods: vec![],
            speedups: vec![],
        }
    }

    fn run(method: &str, trial: usize, iterations: usize) -> RunRecord {
        RunRecord {
            method: method.into(),
            trial,
            seed: trial as u64,
            iterations,
            converged: true,
            budget_exhausted: false,
            fallbacks: 0,
            final_res: 0.1 * (trial + 1) as f64,
            final_error: None,
        }
    }

    fn time(method: &str, trial: usize, s: f64) -> TimingRecord {
        TimingRecord { method: method.into(), trial, elapsed_seconds: s }
    }

    #[test]
    fn means_and_speedups() {
        let runs = vec![run("SRK", 0, 10), run("SRK", 1, 13), run("TSRK", 0, 5), run("TSRK", 1, 6)];
        let times = vec![time("SRK", 0, 0.3), time("SRK", 1, 0.5), time("TSRK", 0, 0.1), time("TSRK", 1, 0.2)];
        let s = summarize(&[Method::Srk, Method::Tsrk], &runs, &times, header());
        let srk = s.method(Method::Srk).unwrap();
        assert_eq!(srk.mean_iterations, 11.5);
        assert_eq!(srk.mean_seconds, (0.3 + 0.5) / 2.0);
        assert_eq!(s.speedups.len(), 1);
        let tsrk = s.method(Method::Tsrk).unwrap();
        assert_eq!(s.speedups[0].speedup, Some(srk.mean_seconds / tsrk.mean_seconds));
        assert_eq!(s.speedups[0].iteration_ratio, Some(5.5 / 11.5));
    }

    #[test]
    fn zero_time_gives_no_speedup() {
        let runs = vec![run("GRK", 0, 1), run("TGRK", 0, 1)];
        let times = vec![time("GRK", 0, 0.0), time("TGRK", 0, 0.0)];
        let s = summarize(&[Method::Grk, Method::Tgrk], &runs, &times, header());
        assert_eq!(s.speedups[0].speedup, None);
    }

    #[test]
    fn downsample_bounds() {
        let v: Vec<usize> = (0..10_000).collect();
        let d = downsample(&v, MAX_HISTORY_POINTS);
        assert_eq!(d.len(), MAX_HISTORY_POINTS);
        assert_eq!((d[0], *d.last().unwrap()), (0, 9_999));
        assert!(d.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(downsample(&v[..5], 4096), vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn csv_and_json_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let mut runs = vec![run("RK", 0, 7), run("TRK", 1, 3)];
        runs[1].final_error = Some(1.0 / 3.0);
        let path = dir.path().join("runs.csv");
        write_csv(&path, &runs).unwrap();
        assert_eq!(read_csv::<RunRecord>(&path).unwrap(), runs);

        let hist = vec![
            HistoryPoint { trial: 0, iteration: 0, res: Some(2.5), rel_error: None },
            HistoryPoint { trial: 0, iteration: 4, res: None, rel_error: Some(1e-300) },
        ];
        let path = dir.path().join("h.csv");
        write_csv(&path, &hist).unwrap();
        assert_eq!(read_csv::<HistoryPoint>(&path).unwrap(), hist);

        let s = summarize(&[Method::Rk], &runs, &[time("RK", 0, 0.123456789)], header());
        let path = dir.path().join("summary.json");
        write_json(&path, &s).unwrap();
        assert_eq!(read_json::<Summary>(&path).unwrap(), s);
    }
}
