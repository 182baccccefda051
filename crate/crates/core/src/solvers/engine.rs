//! Iteration driver: row selection, update, residual upkeep and stopping.

use std::time::Instant;

use super::kernels::{gtrk_coeffs, single_coeffs, two_row_coeffs, Update};
use super::select::{self, Selection};
use super::{relative_error, LinearSystem, Method, SolveReport, SolverConfig, StopRule};
use crate::operators::norm2;
use crate::sampling::{
    build_pair_distribution, locate, sample_pair, sample_pair_within, PairDistribution, Rng, SubsetSampler,
};
use crate::{Error, Result, Scalar};

/// Fresh subsets tried by TRKS before giving up on all-parallel draws.
const SUBSET_RETRIES: usize = 16;

/// What one iteration did.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Step {
    Single(usize),
    Pair(usize, usize),
    /// Two rows were selected but found parallel; row `.0` was used alone.
    Fallback(usize, usize),
    /// The residual seen by the selector was exactly zero; nothing changed.
    Solved,
}

pub struct Solver<'a> {
    system: &'a LinearSystem,
    config: SolverConfig,
    x: Vec<Scalar>,
    /// `b - A x`, kept only by residual-maintaining methods.
    residual: Option<Vec<Scalar>>,
    since_refresh: usize,
    rng: Rng,
    k: usize,
    l21: f64,
    norm_cumulative: Vec<f64>,
    pairs: Option<PairDistribution>,
    subset: Option<SubsetSampler>,
    rows_buf: Vec<usize>,
    sampled_r: Vec<Scalar>,
    scratch: Vec<f64>,
    fallbacks: usize,
}

impl<'a> Solver<'a> {
    pub fn new(system: &'a LinearSystem, config: SolverConfig) -> Result<Self> {
        system.validate()?;
        config.validate(system)?;
        let op = &system.op;
        let m = op.rows();
        let x = config.x0.clone().unwrap_or_else(|| vec![Scalar::new(0.0, 0.0); op.cols()]);
        let method = config.method;
        let residual = if method.maintains_residual() { Some(op.residual(&system.b, &x)?) } else { None };
        let norm_cumulative = if matches!(method, Method::Rk | Method::Gtrk) {
            op.row_norms_sq()
                .iter()
                .scan(0.0, |acc, &n| {
                    *acc += n;
                    Some(*acc)
                })
                .collect()
        } else {
            Vec::new()
        };
        let pairs = match method {
            Method::Trk => Some(build_pair_distribution(op, config.pair_cap)?),
            _ => None,
        };
        let subset = match method {
            Method::Trks => Some(SubsetSampler::new(m, config.l)?),
            Method::Srks | Method::Tsrks => Some(SubsetSampler::new(m, config.eta)?),
            _ => None,
        };
        Ok(Self {
            system,
            rng: Rng::new(config.seed),
            config,
            x,
            residual,
            since_refresh: 0,
            k: 0,
            l21: op.norms().l21,
            norm_cumulative,
            pairs,
            subset,
            rows_buf: Vec::new(),
            sampled_r: Vec::new(),
            scratch: Vec::new(),
            fallbacks: 0,
        })
    }

    pub fn x(&self) -> &[Scalar] {
        &self.x
    }

    pub fn iteration(&self) -> usize {
        self.k
    }

    pub fn fallbacks(&self) -> usize {
        self.fallbacks
    }

    /// The maintained residual, if the method keeps one.
    pub fn maintained_residual(&self) -> Option<&[Scalar]> {
        self.residual.as_deref()
    }

    /// Performs one iteration.
    pub fn step(&mut self) -> Result<Step> {
        let selection = match self.select()? {
            Some(s) => s,
            None => return Ok(Step::Solved),
        };
        let op = &self.system.op;
        let (b, ptol) = (&self.system.b[..], self.config.parallel_tol);
        let (update, step) = match selection {
            Selection::Single(i) => (single_coeffs(op, b, &self.x, i), Step::Single(i)),
            Selection::Pair(i, j) => {
                let update = if self.config.method == Method::Gtrk {
                    gtrk_coeffs(op, b, &self.x, i, j, ptol)?
                } else {
                    two_row_coeffs(op, b, &self.x, i, j, ptol)?
                };
                match update {
                    Update::Single { .. } => {
                        self.fallbacks += 1;
                        (update, Step::Fallback(i, j))
                    }
                    Update::Pair { .. } => (update, Step::Pair(i, j)),
                }
            }
        };
        update.apply(op, &mut self.x);
        if let Some(r) = self.residual.as_mut() {
            update.update_residual(op, r);
            self.since_refresh += 1;
            if self.since_refresh >= self.config.residual_refresh_every {
                self.refresh_residual()?;
            }
        }
        self.k += 1;
        Ok(step)
    }

    fn refresh_residual(&mut self) -> Result<()> {
        if self.residual.is_some() {
            self.residual = Some(self.system.op.residual(&self.system.b, &self.x)?);
            self.since_refresh = 0;
        }
        Ok(())
    }

    fn select(&mut self) -> Result<Option<Selection>> {
        let op = &self.system.op;
        let m = op.rows();
        Ok(match self.config.method {
            Method::Kaczmarz => Some(Selection::Single(self.k % m)),
            Method::Rk => {
                let total = self.norm_cumulative[m - 1];
                Some(Selection::Single(locate(&self.norm_cumulative, self.rng.next_f64() * total)))
            }
            Method::Gtrk => {
                let (i, j) = select::norm_weighted_pair(&self.norm_cumulative, &mut self.rng)?;
                Some(Selection::Pair(i, j))
            }
            Method::TwoDk => {
                let (i, j) = select::cyclic_pair(self.k, m);
                Some(Selection::Pair(i, j))
            }
            Method::Trk => {
                let dist = self.pairs.as_ref().expect("pair table built for TRK");
                let (i, j) = sample_pair(dist, &mut self.rng)?;
                Some(Selection::Pair(i, j))
            }
            Method::Trks => {
                let sampler = self.subset.as_mut().expect("subset sampler built for TRKS");
                let mut found = None;
                for _ in 0..SUBSET_RETRIES {
                    let subset = sampler.draw(&mut self.rng);
                    match sample_pair_within(op, &subset, &mut self.rng) {
                        Ok(pair) => {
                            found = Some(pair);
                            break;
                        }
                        Err(Error::ParallelRows) => continue,
                        Err(e) => return Err(e),
                    }
                }
                let (i, j) = found.ok_or(Error::ParallelRows)?;
                Some(Selection::Pair(i, j))
            }
            Method::Grk => {
                let r = self.residual.as_deref().expect("maintained residual");
                select::grk_select(op, r, &mut self.rng, &mut self.scratch)?.map(Selection::Single)
            }
            Method::Tgrk => {
                let r = self.residual.as_deref().expect("maintained residual");
                select::tgrk_select(op, r, self.l21, &mut self.rng, &mut self.scratch)?
            }
            Method::Srk => {
                let r = self.residual.as_deref().expect("maintained residual");
                select::srk_select(op, r).map(Selection::Single)
            }
            Method::Tsrk => {
                let r = self.residual.as_deref().expect("maintained residual");
                select::tsrk_select(op, r).map(|(i, j)| Selection::Pair(i, j))
            }
            Method::Srks => self.sampled_selection(false)?,
            Method::Tsrks => self.sampled_selection(true)?,
        })
    }

    /// Argmax over a fresh uniform subset. An all-zero sample is redrawn
    /// once, then the full residual decides.
    fn sampled_selection(&mut self, pair: bool) -> Result<Option<Selection>> {
        let op = &self.system.op;
        let b = &self.system.b;
        let sampler = self.subset.as_mut().expect("subset sampler built for sampled methods");
        for _ in 0..2 {
            sampler.draw_into(&mut self.rng, &mut self.rows_buf);
            self.rows_buf.sort_unstable();
            self.sampled_r.clear();
            self.sampled_r.extend(self.rows_buf.iter().map(|&i| b[i] - op.dot_row(i, &self.x)));
            let found = if pair {
                select::tsrks_select(op, &self.rows_buf, &self.sampled_r).map(|(i, j)| Selection::Pair(i, j))
            } else {
                select::srks_select(op, &self.rows_buf, &self.sampled_r).map(Selection::Single)
            };
            if found.is_some() {
                return Ok(found);
            }
        }
        let r = op.residual(b, &self.x)?;
        Ok(if pair {
            select::tsrk_select(op, &r).map(|(i, j)| Selection::Pair(i, j))
        } else {
            select::srk_select(op, &r).map(Selection::Single)
        })
    }

    /// `||b - A x||_2`, from the maintained residual when one exists.
    fn monitored_residual(&mut self, exact: bool) -> Result<f64> {
        match &self.residual {
            Some(r) if !exact => Ok(norm2(r)),
            Some(_) => {
                self.refresh_residual()?;
                Ok(norm2(self.residual.as_ref().expect("maintained residual")))
            }
            None => self.system.residual_norm(&self.x),
        }
    }

    /// Runs until the stopping rule, `max_iter` or the time budget.
    pub fn run(mut self) -> Result<SolveReport> {
        let start = Instant::now();
        let mut monitor = Monitor {
            residual_history: Vec::new(),
            error_history: self.system.x_star.as_ref().map(|_| Vec::new()),
            minimum: f64::INFINITY,
        };
        let mut converged = self.check(&mut monitor)?;
        let mut budget_exhausted = false;
        while !converged && self.k < self.config.max_iter {
            if let Some(budget) = self.config.time_budget {
                if start.elapsed() >= budget {
                    budget_exhausted = true;
                    break;
                }
            }
            let step = self.step()?;
            if step == Step::Solved {
                converged = self.check(&mut monitor)?;
                break;
            }
            if self.k.is_multiple_of(self.config.check_every) {
                converged = self.check(&mut monitor)?;
            }
        }
        let final_residual = self.system.residual_norm(&self.x)?;
        let final_error = self.system.relative_error(&self.x);
        if converged && self.config.stop_rule == StopRule::Residual && final_residual >= self.config.tol {
            return Err(Error::Internal(format!(
                "reported convergence with residual {final_residual:e} above tolerance"
            )));
        }
        Ok(SolveReport {
            x: self.x,
            converged,
            iterations: self.k,
            residual_history: monitor.residual_history,
            error_history: monitor.error_history,
            final_residual,
            final_error,
            elapsed_seconds: start.elapsed().as_secs_f64(),
            budget_exhausted,
            fallbacks: self.fallbacks,
        })
    }

    /// Records the monitored quantities; `true` once the stopping rule holds.
    fn check(&mut self, monitor: &mut Monitor) -> Result<bool> {
        let tol = self.config.tol;
        let error = self.system.x_star.as_ref().map(|xs| relative_error(&self.x, xs));
        if let (Some(h), Some(e)) = (monitor.error_history.as_mut(), error) {
            h.push((self.k, e));
        }
        let watched = match self.config.stop_rule {
            StopRule::Residual => {
                let mut res = self.monitored_residual(false)?;
                if res < tol && self.residual.is_some() {
                    res = self.monitored_residual(true)?;
                }
                monitor.residual_history.push((self.k, res));
                res
            }
            StopRule::RelativeError => {
                if self.residual.is_some() {
                    let res = self.monitored_residual(false)?;
                    monitor.residual_history.push((self.k, res));
                }
                error.expect("validated: relative-error rule has a known solution")
            }
        };
        if watched.is_nan() {
            return Err(Error::NonFinite("iterate"));
        }
        if watched > self.config.divergence_factor * monitor.minimum {
            return Err(Error::Diverged { min: monitor.minimum, current: watched });
        }
        monitor.minimum = monitor.minimum.min(watched);
        Ok(watched < tol)
    }
}

struct Monitor {
    residual_history: Vec<(usize, f64)>,
    error_history: Option<Vec<(usize, f64)>>,
    minimum: f64,
}
