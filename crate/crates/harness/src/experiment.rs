//! Method-by-trial sweeps and their report files.

use std::fs;
use std::path::Path;
use std::time::Duration;

use anyhow::{Context, Result};
use kaczmarz_core::{solve, LinearSystem, Method, SolverConfig};

use crate::problem::build_system;
use crate::report::{history_points, summarize, write_csv, write_json, HistoryPoint, RunRecord, Summary, TimingRecord};
use crate::spec::{stop_rule_label, ExperimentSpec};

/// Offset separating the solver's random stream from the problem generator's.
const SOLVER_STREAM: u64 = 0x9E37_79B9_7F4A_7C15;

#[derive(Debug)]
pub struct Experiment {
    pub runs: Vec<RunRecord>,
    pub timings: Vec<TimingRecord>,
    pub histories: Vec<(Method, Vec<HistoryPoint>)>,
    pub summary: Summary,
}

pub fn trial_seed(spec: &ExperimentSpec, trial: usize) -> u64 {
    spec.seed.wrapping_add(trial as u64)
}

pub fn solver_config(spec: &ExperimentSpec, method: Method, seed: u64) -> SolverConfig {
    let mut cfg = SolverConfig::new(method);
    cfg.tol = spec.tol;
    cfg.stop_rule = spec.stop_rule;
    cfg.max_iter = spec.max_iter;
    cfg.seed = seed.wrapping_add(SOLVER_STREAM);
    cfg.l = spec.l;
    cfg.eta = spec.eta;
    cfg.check_every = spec.check_every;
    cfg.time_budget = spec.budget_seconds.map(Duration::from_secs_f64);
    cfg
}

/// Validates the spec, loads the first problem instance and checks every method against it.
pub fn preflight(spec: &ExperimentSpec) -> Result<LinearSystem> {
    spec.validate()?;
    let system = build_system(&spec.problem, trial_seed(spec, 0))?;
    for &m in &spec.methods {
        solver_config(spec, m, 0).validate(&system).with_context(|| format!("method {m}"))?;
    }
    Ok(system)
}

pub fn run_experiment(spec: &ExperimentSpec) -> Result<Experiment> {
    let first = preflight(spec)?;
    let redraw = spec.redraw && spec.problem.is_generated();
    let mut runs = Vec::new();
    let mut timings = Vec::new();
    let mut histories: Vec<(Method, Vec<HistoryPoint>)> = spec.methods.iter().map(|&m| (m, Vec::new())).collect();
    let mut system = first;
    for trial in 0..spec.trials {
        let seed = trial_seed(spec, trial);
        if redraw && trial > 0 {
            system = build_system(&spec.problem, seed)?;
        }
        for (k, &method) in spec.methods.iter().enumerate() {
            let report = solve(&system, &solver_config(spec, method, seed))
                .with_context(|| format!("method {method}, trial {trial}"))?;
            runs.push(RunRecord::from_report(method, trial, seed, &report));
            timings.push(TimingRecord {
                method: method.name().to_string(),
                trial,
                elapsed_seconds: report.elapsed_seconds,
            });
            histories[k].1.extend(history_points(trial, &report));
        }
    }
    let header = Summary {
        problem: spec.problem.describe(),
        problem_redrawn: redraw,
        trials: spec.trials,
        stop_rule: stop_rule_label(spec.stop_rule).to_string(),
        tol: spec.tol,
        seed: spec.seed,
        methods: Vec::new(),
        speedups: Vec::new(),
    };
    let summary = summarize(&spec.methods, &runs, &timings, header);
    Ok(Experiment { runs, timings, histories, summary })
}

impl Experiment {
    /// Writes `runs.csv`, `timings.csv`, `summary.json` and one `history_<method>.csv` per method.
    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        write_csv(&dir.join("runs.csv"), &self.runs)?;
        write_csv(&dir.join("timings.csv"), &self.timings)?;
        write_json(&dir.join("summary.json"), &self.summary)?;
        for (method, points) in &self.histories {
            write_csv(&dir.join(format!("history_{}.csv", method.name())), points)?;
        }
        Ok(())
    }
}

/// Runs the sweep and writes its reports to `spec.out`.
pub fn run(spec: &ExperimentSpec) -> Result<Experiment> {
    let exp = run_experiment(spec)?;
    exp.write(&spec.out)?;
    Ok(exp)
}
