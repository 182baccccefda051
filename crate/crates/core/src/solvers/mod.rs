//! Kaczmarz-type iterations for consistent systems `A x = b`.
//!
//! One-row methods project onto a single hyperplane per step; two-row
//! methods project onto the intersection of two, falling back to a one-row
//! step when the selected rows are parallel. All methods share
//! [`solve`] and its stopping logic; [`Solver`] exposes single steps.

mod engine;
mod kernels;
mod oracle;
mod select;
mod theory;

pub use engine::{Solver, Step};
pub use kernels::{gtrk_update, project_two_rows, single_row_update};
pub use oracle::least_norm_oracle;
pub use select::{
    cyclic_pair, grk_index_set, grk_select, srk_select, srks_select, tgrk_index_set, tgrk_select, tsrk_select,
    tsrks_select, GreedySet, Selection, TwoRowGreedySet, COLLISION_RETRIES,
};
pub use theory::{theory_factors, theory_factors_capped, Factor, TheoryFactors};

use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use crate::operators::{norm2, RowOperator};
use crate::sampling::DEFAULT_PAIR_CAP;
use crate::{Error, Result, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    /// Cyclic single-row sweeps.
    Kaczmarz,
    Rk,
    Grk,
    Gtrk,
    Srk,
    Srks,
    /// Cyclic sweeps over consecutive row pairs.
    TwoDk,
    Trk,
    Trks,
    Tgrk,
    Tsrk,
    Tsrks,
}

impl Method {
    pub const ALL: [Method; 12] = [
        Method::Kaczmarz,
        Method::Rk,
        Method::Grk,
        Method::Gtrk,
        Method::Srk,
        Method::Srks,
        Method::TwoDk,
        Method::Trk,
        Method::Trks,
        Method::Tgrk,
        Method::Tsrk,
        Method::Tsrks,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Kaczmarz => "K",
            Method::Rk => "RK",
            Method::Grk => "GRK",
            Method::Gtrk => "GTRK",
            Method::Srk => "SRK",
            Method::Srks => "SRKS",
            Method::TwoDk => "2DK",
            Method::Trk => "TRK",
            Method::Trks => "TRKS",
            Method::Tgrk => "TGRK",
            Method::Tsrk => "TSRK",
            Method::Tsrks => "TSRKS",
        }
    }

    pub fn is_two_row(self) -> bool {
        matches!(
            self,
            Method::Gtrk | Method::TwoDk | Method::Trk | Method::Trks | Method::Tgrk | Method::Tsrk | Method::Tsrks
        )
    }

    /// Methods that keep `b - A x` up to date between steps.
    pub fn maintains_residual(self) -> bool {
        matches!(self, Method::Grk | Method::Tgrk | Method::Srk | Method::Tsrk)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let upper = s.trim().to_ascii_uppercase();
        Method::ALL
            .into_iter()
            .find(|m| m.name() == upper)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown method `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StopRule {
    /// `||b - A x||_2 < tol`.
    #[default]
    Residual,
    /// `||x - x_star||^2 / ||x||^2 < tol`.
    RelativeError,
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub method: Method,
    pub tol: f64,
    pub stop_rule: StopRule,
    pub max_iter: usize,
    pub seed: u64,
    /// Subset fraction for TRKS.
    pub l: f64,
    /// Subset fraction for SRKS and TSRKS.
    pub eta: f64,
    pub parallel_tol: f64,
    pub check_every: usize,
    pub residual_refresh_every: usize,
    pub pair_cap: usize,
    pub x0: Option<Vec<Scalar>>,
    /// Wall-clock limit; the run stops (unconverged) once exceeded.
    pub time_budget: Option<Duration>,
    /// Abort when the monitored quantity exceeds its running minimum by this factor.
    pub divergence_factor: f64,
}

impl SolverConfig {
    pub fn new(method: Method) -> Self {
        Self {
            method,
            tol: 1e-6,
            stop_rule: StopRule::Residual,
            max_iter: 800_000,
            seed: 0,
            l: 0.01,
            eta: 0.1,
            parallel_tol: 1e-12,
            check_every: 1,
            residual_refresh_every: 1000,
            pair_cap: DEFAULT_PAIR_CAP,
            x0: None,
            time_budget: None,
            divergence_factor: 1e6,
        }
    }

    pub fn validate(&self, system: &LinearSystem) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.tol > 0.0) {
            return bad(format!("tol must be positive, got {}", self.tol));
        }
        if !(self.l > 0.0 && self.l < 1.0) {
            return bad(format!("l must lie in (0, 1), got {}", self.l));
        }
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return bad(format!("eta must lie in (0, 1), got {}", self.eta));
        }
        if !(self.parallel_tol >= 0.0 && self.parallel_tol < 1.0) {
            return bad(format!("parallel_tol must lie in [0, 1), got {}", self.parallel_tol));
        }
        if self.check_every == 0 || self.residual_refresh_every == 0 {
            return bad("check_every and residual_refresh_every must be at least 1".into());
        }
        if !(self.divergence_factor > 1.0) {
            return bad(format!("divergence_factor must exceed 1, got {}", self.divergence_factor));
        }
        if self.stop_rule == StopRule::RelativeError && system.x_star.is_none() {
            return bad("the relative-error stopping rule needs a known solution".into());
        }
        if let Some(x0) = &self.x0 {
            if x0.len() != system.op.cols() {
                return Err(Error::DimensionMismatch { expected: system.op.cols(), got: x0.len() });
            }
            if x0.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("x0"));
            }
        }
        if self.method.is_two_row() && system.op.rows() < 2 {
            return bad(format!("{} needs at least two rows", self.method));
        }
        if self.method == Method::Trk && system.op.rows() > self.pair_cap {
            return Err(Error::PairCap { rows: system.op.rows(), cap: self.pair_cap });
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct LinearSystem {
    pub op: RowOperator,
    pub b: Vec<Scalar>,
    pub x_star: Option<Vec<Scalar>>,
}

impl LinearSystem {
    pub fn new(op: impl Into<RowOperator>, b: Vec<Scalar>, x_star: Option<Vec<Scalar>>) -> Result<Self> {
        let system = Self { op: op.into(), b, x_star };
        system.validate()?;
        Ok(system)
    }

    /// Rejects zero rows, non-finite data and mismatched lengths.
    pub fn validate(&self) -> Result<()> {
        if self.b.len() != self.op.rows() {
            return Err(Error::DimensionMismatch { expected: self.op.rows(), got: self.b.len() });
        }
        if self.b.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("right-hand side"));
        }
        if let Some(i) = self.op.row_norms_sq().iter().position(|&n| n == 0.0) {
            return Err(Error::ZeroRow(i));
        }
        if !self.op.frobenius_sq().is_finite() {
            return Err(Error::NonFinite("matrix row norms"));
        }
        if let Some(xs) = &self.x_star {
            if xs.len() != self.op.cols() {
                return Err(Error::DimensionMismatch { expected: self.op.cols(), got: xs.len() });
            }
            if xs.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("known solution"));
            }
        }
        Ok(())
    }

    pub fn residual_norm(&self, x: &[Scalar]) -> Result<f64> {
        Ok(norm2(&self.op.residual(&self.b, x)?))
    }

    /// `||x - x_star||^2 / ||x||^2`; infinite at `x = 0 != x_star`.
    pub fn relative_error(&self, x: &[Scalar]) -> Option<f64> {
        let xs = self.x_star.as_ref()?;
        Some(relative_error(x, xs))
    }
}

pub(crate) fn relative_error(x: &[Scalar], x_star: &[Scalar]) -> f64 {
    let diff: f64 = x.iter().zip(x_star).map(|(a, b)| (a - b).norm_sqr()).sum();
    let norm: f64 = x.iter().map(|v| v.norm_sqr()).sum();
    if diff == 0.0 {
        0.0
    } else if norm == 0.0 {
        f64::INFINITY
    } else {
        diff / norm
    }
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub x: Vec<Scalar>,
    pub converged: bool,
    pub iterations: usize,
    /// `(iteration, ||b - A x||_2)` at each check where it was evaluated.
    pub residual_history: Vec<(usize, f64)>,
    /// `(iteration, ||x - x_star||^2 / ||x||^2)` when the solution is known.
    pub error_history: Option<Vec<(usize, f64)>>,
    pub final_residual: f64,
    pub final_error: Option<f64>,
    pub elapsed_seconds: f64,
    /// Stopped by the wall-clock budget.
    pub budget_exhausted: bool,
    /// Two-row steps that degraded to one row.
    pub fallbacks: usize,
}

pub fn solve(system: &LinearSystem, config: &SolverConfig) -> Result<SolveReport> {
    Solver::new(system, config.clone())?.run()
}
