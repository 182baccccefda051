//! Budgeted image restoration with PSNR, SSIM and EN scores.

use std::fs;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use kaczmarz_core::problems::{error_norm, psnr, ssim, GrayImage};
use kaczmarz_core::{solve, Method};
use serde::{Deserialize, Serialize};

use crate::experiment::solver_config;
use crate::problem::build_deblur;
use crate::report::{write_csv, write_json};
use crate::spec::{ExperimentSpec, ProblemSpec};

pub const DEFAULT_BUDGET_SECONDS: f64 = 60.0;

/// One-row method and its two-row counterpart, compared by PSNR on the phantom.
pub const ORDERING_PAIRS: [(Method, Method); 5] = [
    (Method::Kaczmarz, Method::TwoDk),
    (Method::Rk, Method::Trk),
    (Method::Grk, Method::Tgrk),
    (Method::Srk, Method::Tsrk),
    (Method::Srks, Method::Tsrks),
];

/// How far (dB) a two-row method may trail its counterpart.
pub const ORDERING_SLACK_DB: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeblurRow {
    pub method: String,
    pub iterations: usize,
    pub psnr: f64,
    pub ssim: f64,
    pub en: f64,
    pub seconds: f64,
    pub budget_exhausted: bool,
    /// Set when the budget ran out before the first iteration.
    pub zero_iterations: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderingCheck {
    pub baseline: String,
    pub two_row: String,
    pub baseline_psnr: f64,
    pub two_row_psnr: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeblurReport {
    pub problem: String,
    pub budget_seconds: Option<f64>,
    pub observed_psnr: f64,
    pub rows: Vec<DeblurRow>,
    /// Filled for the phantom only.
    pub ordering: Vec<OrderingCheck>,
}

impl DeblurReport {
    pub fn row(&self, method: Method) -> Option<&DeblurRow> {
        self.rows.iter().find(|r| r.method == method.name())
    }

    pub fn ordering_holds(&self) -> bool {
        self.ordering.iter().all(|c| c.holds)
    }
}

pub struct DeblurOutcome {
    pub report: DeblurReport,
    pub reference: GrayImage,
    pub observed: GrayImage,
    pub restored: Vec<(Method, GrayImage)>,
}

/// Restores the blurred image with every method under the same budget.
///
/// Without an explicit budget each method gets [`DEFAULT_BUDGET_SECONDS`]; `max_iter` also applies.
pub fn deblur_experiment(spec: &ExperimentSpec) -> Result<DeblurOutcome> {
    spec.validate()?;
    let ProblemSpec::Deblur { image, size, r, s, sigma } = &spec.problem else {
        bail!("deblur needs a `deblur` problem, got {}", spec.problem.describe());
    };
    let problem = build_deblur(image.as_deref(), *size, *r, *s, *sigma)?;
    let (w, h) = (problem.reference.width(), problem.reference.height());
    let truth = problem.reference.to_column_stacked();
    let observed_v: Vec<f64> = problem.system.b.iter().map(|v| v.re).collect();
    let observed = GrayImage::from_column_stacked(w, h, &observed_v)?;

    let budget = spec.budget_seconds.unwrap_or(DEFAULT_BUDGET_SECONDS);
    let mut rows = Vec::new();
    let mut restored = Vec::new();
    for &method in &spec.methods {
        let mut cfg = solver_config(spec, method, spec.seed);
        cfg.time_budget = Some(Duration::from_secs_f64(budget));
        let report = solve(&problem.system, &cfg).with_context(|| format!("method {method}"))?;
        let x: Vec<f64> = report.x.iter().map(|v| v.re).collect();
        rows.push(DeblurRow {
            method: method.name().to_string(),
            iterations: report.iterations,
            psnr: psnr(&truth, &x)?,
            ssim: ssim(&truth, &x)?,
            en: error_norm(&truth, &x)?,
            seconds: report.elapsed_seconds,
            budget_exhausted: report.budget_exhausted,
            zero_iterations: report.iterations == 0,
        });
        restored.push((method, GrayImage::from_column_stacked(w, h, &x)?));
    }

    let mut report = DeblurReport {
        problem: spec.problem.describe(),
        budget_seconds: Some(budget),
        observed_psnr: psnr(&truth, &observed_v)?,
        rows,
        ordering: Vec::new(),
    };
    if image.is_none() {
        report.ordering = ORDERING_PAIRS
            .iter()
            .filter_map(|&(base, two)| {
                let (b, t) = (report.row(base)?, report.row(two)?);
                Some(OrderingCheck {
                    baseline: b.method.clone(),
                    two_row: t.method.clone(),
                    baseline_psnr: b.psnr,
                    two_row_psnr: t.psnr,
                    holds: t.psnr >= b.psnr - ORDERING_SLACK_DB,
                })
            })
            .collect();
    }
    Ok(DeblurOutcome { report, reference: problem.reference, observed, restored })
}

/// Runs [`deblur_experiment`] and writes `deblur.csv`, `deblur.json` and the images to `spec.out`.
pub fn deblur_run(spec: &ExperimentSpec) -> Result<DeblurOutcome> {
    let outcome = deblur_experiment(spec)?;
    let dir = &spec.out;
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    write_csv(&dir.join("deblur.csv"), &outcome.report.rows)?;
    write_json(&dir.join("deblur.json"), &outcome.report)?;
    outcome.reference.write_pgm(dir.join("reference.pgm"))?;
    outcome.observed.write_pgm(dir.join("observed.pgm"))?;
    for (method, img) in &outcome.restored {
        img.write_pgm(dir.join(format!("restored_{}.pgm", method.name())))?;
    }
    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn phantom_spec(size: usize, methods: Vec<Method>) -> ExperimentSpec {
        let mut spec = ExperimentSpec::new(ProblemSpec::Deblur { image: None, size, r: 2, s: 2, sigma: 1.0 }, methods);
        spec.budget_seconds = Some(30.0);
        spec
    }

    #[test]
    fn converged_restoration_matches_reference() {
        // 7x7 with unit bands is nonsingular, so the limit is the phantom itself.
        let mut spec = phantom_spec(7, vec![Method::Srk, Method::Tsrk]);
        spec.problem = ProblemSpec::Deblur { image: None, size: 7, r: 1, s: 1, sigma: 1.0 };
        spec.tol = 1e-9;
        let out = deblur_experiment(&spec).unwrap();
        assert_eq!(ssim(out.reference.pixels(), out.reference.pixels()).unwrap(), 1.0);
        for row in &out.report.rows {
            assert!(!row.budget_exhausted);
            assert!(row.ssim > 1.0 - 1e-9 && row.en < 1e-6, "{row:?}");
        }
        assert!(out.report.observed_psnr < out.report.rows[0].psnr);
    }

    #[test]
    fn iteration_budget_is_deterministic() {
        let mut spec = phantom_spec(16, vec![Method::Srks, Method::Tsrks]);
        spec.max_iter = 300;
        spec.budget_seconds = Some(60.0);
        let a = deblur_experiment(&spec).unwrap();
        let b = deblur_experiment(&spec).unwrap();
        for ((_, x), (_, y)) in a.restored.iter().zip(&b.restored) {
            assert_eq!(x, y);
        }
        assert_eq!(a.report.ordering.len(), 1);
    }

    #[test]
    fn zero_budget_is_flagged() {
        let dir = tempfile::tempdir().unwrap();
        let mut spec = phantom_spec(8, vec![Method::Rk]);
        spec.budget_seconds = Some(0.0);
        spec.out = dir.path().to_path_buf();
        let out = deblur_run(&spec).unwrap();
        assert!(out.report.rows[0].zero_iterations);
        assert!(dir.path().join("restored_RK.pgm").is_file());
        assert!(dir.path().join("deblur.json").is_file());
    }

    #[test]
    fn rejects_other_problems() {
        let spec = ExperimentSpec::new(ProblemSpec::Identity { n: 3 }, vec![Method::Rk]);
        assert!(deblur_experiment(&spec).is_err());
    }
}
