//! Convergence-factor bounds next to the decay actually observed.

use std::fs;

use anyhow::{Context, Result};
use kaczmarz_core::solvers::{least_norm_oracle, theory_factors, Factor, Solver, Step, TheoryFactors};
use kaczmarz_core::{LinearSystem, Method, Scalar};
use serde::{Deserialize, Serialize};

use crate::experiment::solver_config;
use crate::problem::build_system;
use crate::report::write_json;
use crate::spec::ExperimentSpec;

/// Allowed excess of the observed decay over a bound.
pub const DECAY_SLACK: f64 = 0.05;

/// The fit stops once the mean error drops below this fraction of its start,
/// where too few trajectories are still nonzero to average.
const FIT_FLOOR: f64 = 1e-3;

/// Methods whose observed decay is checked against their bound.
pub const CHECKED_METHODS: [Method; 2] = [Method::Trk, Method::Tsrk];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FactorReport {
    pub value: f64,
    pub vacuous: bool,
}

impl From<Factor> for FactorReport {
    fn from(f: Factor) -> Self {
        Self { value: f.value, vacuous: f.vacuous }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorsReport {
    pub frobenius: f64,
    pub spectral_norm: f64,
    pub gram_frobenius: f64,
    pub l21: f64,
    pub lambda_min: f64,
    pub omega: f64,
    pub rho_max: f64,
    pub rk: FactorReport,
    pub trk: FactorReport,
    pub tgrk_first: FactorReport,
    pub tgrk: FactorReport,
    pub tsrk: FactorReport,
    pub trk_inequality_holds: bool,
}

impl From<&TheoryFactors> for FactorsReport {
    fn from(t: &TheoryFactors) -> Self {
        Self {
            frobenius: t.frobenius,
            spectral_norm: t.spectral_norm,
            gram_frobenius: t.gram_frobenius,
            l21: t.l21,
            lambda_min: t.lambda_min,
            omega: t.omega,
            rho_max: t.rho_max,
            rk: t.rk.into(),
            trk: t.trk.into(),
            tgrk_first: t.tgrk_first.into(),
            tgrk: t.tgrk.into(),
            tsrk: t.tsrk.into(),
            trk_inequality_holds: t.trk_inequality_holds,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub method: String,
    /// Per-iteration factor of a geometric fit to the mean squared error.
    pub observed: f64,
    pub fit_points: usize,
    pub bound: Option<FactorReport>,
    /// Whether the observed decay was compared with a non-vacuous bound.
    pub checked: bool,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnoseReport {
    pub problem: String,
    pub trajectories: usize,
    pub window: usize,
    pub factors: FactorsReport,
    pub decays: Vec<DecayReport>,
}

impl DiagnoseReport {
    pub fn decay(&self, method: Method) -> Option<&DecayReport> {
        self.decays.iter().find(|d| d.method == method.name())
    }

    pub fn checks_hold(&self) -> bool {
        self.decays.iter().all(|d| d.holds)
    }
}

fn bound_for(method: Method, t: &TheoryFactors) -> Option<Factor> {
    match method {
        Method::Rk => Some(t.rk),
        Method::Trk => Some(t.trk),
        Method::Tgrk => Some(t.tgrk),
        Method::Tsrk => Some(t.tsrk),
        _ => None,
    }
}

/// Mean of `||x_k - x_lim||^2` over seeded trajectories from `x0 = 0`, for `k = 0..=window`.
pub fn mean_error_curve(
    system: &LinearSystem,
    limit: &[Scalar],
    spec: &ExperimentSpec,
    method: Method,
) -> Result<Vec<f64>> {
    let mut sums = vec![0.0; spec.decay_window + 1];
    let err = |x: &[Scalar]| x.iter().zip(limit).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>();
    for t in 0..spec.trajectories {
        let cfg = solver_config(spec, method, spec.seed.wrapping_add(t as u64));
        let mut solver = Solver::new(system, cfg)?;
        sums[0] += err(solver.x());
        for s in sums.iter_mut().skip(1) {
            if solver.step()? != Step::Solved {
                *s += err(solver.x());
            }
        }
    }
    Ok(sums.into_iter().map(|s| s / spec.trajectories as f64).collect())
}

/// `exp` of the least-squares slope of `ln(curve)` over its leading points above [`FIT_FLOOR`].
pub fn geometric_rate(curve: &[f64]) -> (f64, usize) {
    let start = curve[0];
    let pts: Vec<(f64, f64)> = curve
        .iter()
        .enumerate()
        .take_while(|&(_, &v)| v > FIT_FLOOR * start && v > 0.0)
        .map(|(k, &v)| (k as f64, v.ln()))
        .collect();
    if pts.len() < 2 {
        return (0.0, pts.len());
    }
    let n = pts.len() as f64;
    let mk = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let mv = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let cov: f64 = pts.iter().map(|p| (p.0 - mk) * (p.1 - mv)).sum();
    let var: f64 = pts.iter().map(|p| (p.0 - mk).powi(2)).sum();
    ((cov / var).exp(), pts.len())
}

pub fn diagnose_system(system: &LinearSystem, spec: &ExperimentSpec) -> Result<DiagnoseReport> {
    let factors = theory_factors(&system.op).context("theory factors")?;
    let limit = least_norm_oracle(system).context("least-norm limit")?;
    let mut decays = Vec::new();
    for &method in &spec.methods {
        let curve = mean_error_curve(system, &limit, spec, method).with_context(|| format!("method {method}"))?;
        let (observed, fit_points) = geometric_rate(&curve);
        let bound = bound_for(method, &factors);
        let checked = CHECKED_METHODS.contains(&method) && bound.is_some_and(|b| !b.vacuous);
        let holds = !checked || bound.is_some_and(|b| observed <= b.value + DECAY_SLACK);
        decays.push(DecayReport {
            method: method.name().to_string(),
            observed,
            fit_points,
            bound: bound.map(Into::into),
            checked,
            holds,
        });
    }
    Ok(DiagnoseReport {
        problem: spec.problem.describe(),
        trajectories: spec.trajectories,
        window: spec.decay_window,
        factors: (&factors).into(),
        decays,
    })
}

pub fn diagnose(spec: &ExperimentSpec) -> Result<DiagnoseReport> {
    spec.validate()?;
    let system = build_system(&spec.problem, spec.seed)?;
    let report = diagnose_system(&system, spec)?;
    fs::create_dir_all(&spec.out).with_context(|| format!("creating {}", spec.out.display()))?;
    write_json(&spec.out.join("diagnose.json"), &report)?;
    Ok(report)
}
