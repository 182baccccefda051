//! Uniform row subsets drawn without replacement.

use super::Rng;
use crate::{Error, Result};

/// Strictly increasing row indices, at least two of them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexSample {
    indices: Vec<usize>,
}

impl IndexSample {
    pub fn new(mut indices: Vec<usize>, m: usize) -> Result<Self> {
        indices.sort_unstable();
        if indices.len() < 2 {
            return Err(Error::InvalidStructure("an index sample needs at least two rows".into()));
        }
        if indices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidStructure("duplicate index in sample".into()));
        }
        if let Some(&last) = indices.last().filter(|&&i| i >= m) {
            return Err(Error::IndexOutOfRange { index: last, rows: m });
        }
        Ok(Self { indices })
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// `max(ceil(fraction * m), 2)`, capped at `m`.
pub fn sample_size(m: usize, fraction: f64) -> usize {
    // Shave a few ulps so products like 0.1 * 30 do not round up past 3.
    let raw = (fraction * m as f64 * (1.0 - 4.0 * f64::EPSILON)).ceil() as usize;
    raw.max(2).min(m)
}

fn check(m: usize, fraction: f64) -> Result<()> {
    if m < 2 {
        return Err(Error::InvalidConfig(format!("simple random sampling needs m >= 2, got {m}")));
    }
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::InvalidConfig(format!("sampling fraction must lie in (0, 1), got {fraction}")));
    }
    Ok(())
}

/// Partial Fisher-Yates over a persistent permutation.
///
/// Any starting permutation gives a uniform subset, so the buffer is never
/// reset and each draw costs `O(size)` rather than `O(m)`.
#[derive(Debug, Clone)]
pub struct SubsetSampler {
    perm: Vec<usize>,
    size: usize,
}

impl SubsetSampler {
    pub fn new(m: usize, fraction: f64) -> Result<Self> {
        check(m, fraction)?;
        Ok(Self { perm: (0..m).collect(), size: sample_size(m, fraction) })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Unsorted draw into `out`.
    pub fn draw_into(&mut self, rng: &mut Rng, out: &mut Vec<usize>) {
        let m = self.perm.len();
        out.clear();
        for t in 0..self.size {
            let k = t + rng.below(m - t);
            self.perm.swap(t, k);
            out.push(self.perm[t]);
        }
    }

    pub fn draw(&mut self, rng: &mut Rng) -> IndexSample {
        let mut indices = Vec::with_capacity(self.size);
        self.draw_into(rng, &mut indices);
        indices.sort_unstable();
        IndexSample { indices }
    }
}

pub fn simple_random_sample(m: usize, fraction: f64, rng: &mut Rng) -> Result<IndexSample> {
    Ok(SubsetSampler::new(m, fraction)?.draw(rng))
}
