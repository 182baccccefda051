//! Seeded randomness: weighted indices, row-pair laws and index subsets.
//!
//! All draws go through [`Rng`], so a seed fixes every selection a solver
//! makes. Doubles are derived from the top 53 bits of a 64-bit output, which
//! keeps sequences identical across platforms.

mod pairs;
mod subset;

pub use pairs::{
    build_pair_distribution, cross_product_sq, sample_pair, sample_pair_within, PairDistribution, DEFAULT_PAIR_CAP,
};
pub use subset::{sample_size, simple_random_sample, IndexSample, SubsetSampler};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct Rng {
    inner: ChaCha8Rng,
    spare_normal: Option<f64>,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Self { inner: ChaCha8Rng::seed_from_u64(seed), spare_normal: None }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform in `[0, 1)`.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[0, n)`, unbiased.
    pub fn below(&mut self, n: usize) -> usize {
        assert!(n > 0, "empty range");
        let n = n as u64;
        let zone = u64::MAX - (u64::MAX - n + 1) % n;
        loop {
            let v = self.next_u64();
            if v <= zone {
                return (v % n) as usize;
            }
        }
    }

    /// Standard normal via Box-Muller; the second variate is cached.
    pub fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        let u1 = loop {
            let u = self.next_f64();
            if u > 0.0 {
                break u;
            }
        };
        let u2 = self.next_f64();
        let radius = (-2.0 * u1.ln()).sqrt();
        let angle = std::f64::consts::TAU * u2;
        self.spare_normal = Some(radius * angle.sin());
        radius * angle.cos()
    }
}

/// Running sums of nonnegative weights, sampled by inverse CDF.
#[derive(Debug, Clone)]
pub struct CumulativeTable {
    cumulative: Vec<f64>,
}

impl CumulativeTable {
    pub fn new(weights: impl IntoIterator<Item = f64>) -> Result<Self> {
        let mut acc = 0.0;
        let mut cumulative = Vec::new();
        for w in weights {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::InvalidConfig(format!("sampling weight {w} is not a nonnegative finite number")));
            }
            acc += w;
            cumulative.push(acc);
        }
        Ok(Self { cumulative })
    }

    pub fn len(&self) -> usize {
        self.cumulative.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cumulative.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.cumulative.last().copied().unwrap_or(0.0)
    }

    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }

    pub fn weight(&self, k: usize) -> f64 {
        self.cumulative[k] - if k == 0 { 0.0 } else { self.cumulative[k - 1] }
    }

    pub fn sample(&self, rng: &mut Rng) -> Result<usize> {
        let total = self.total();
        if total <= 0.0 {
            return Err(Error::ZeroWeights);
        }
        Ok(self.locate(rng.next_f64() * total))
    }

    fn locate(&self, u: f64) -> usize {
        locate(&self.cumulative, u)
    }
}

/// First slot of a running-sum array whose value exceeds `u`.
pub(crate) fn locate(cumulative: &[f64], u: f64) -> usize {
    let k = cumulative.partition_point(|&c| c <= u);
    if k < cumulative.len() {
        return k;
    }
    // `u` rounded up to the total: take the last slot with positive mass.
    let total = cumulative.last().copied().unwrap_or(0.0);
    cumulative.partition_point(|&c| c < total)
}

/// Index `i` with probability `weights[i] / sum(weights)`.
pub fn weighted_index(weights: &[f64], rng: &mut Rng) -> Result<usize> {
    CumulativeTable::new(weights.iter().copied())?.sample(rng)
}

/// Chi-square statistic of observed counts against expected probabilities.
#[cfg(test)]
pub(crate) fn chi_square(counts: &[u64], probs: &[f64]) -> (f64, usize) {
    let n: u64 = counts.iter().sum();
    let mut stat = 0.0;
    let mut cells = 0usize;
    for (&c, &p) in counts.iter().zip(probs) {
        if p > 0.0 {
            let e = p * n as f64;
            stat += (c as f64 - e).powi(2) / e;
            cells += 1;
        } else {
            assert_eq!(c, 0, "zero-probability cell was drawn");
        }
    }
    (stat, cells.saturating_sub(1))
}

#[cfg(test)]
pub(crate) fn chi_square_critical(df: usize, alpha: f64) -> f64 {
    use statrs::distribution::{ChiSquared, ContinuousCDF};
    ChiSquared::new(df as f64).unwrap().inverse_cdf(1.0 - alpha)
}
