//! Row pairs drawn with probability proportional to `|a_i x a_j|^2`.

use super::{CumulativeTable, IndexSample, Rng};
use crate::operators::RowOperator;
use crate::{Error, Result};

pub const DEFAULT_PAIR_CAP: usize = 4000;

/// `||a_i||^2 ||a_j||^2 - |a_i a_j^*|^2`, clamped at zero.
pub fn cross_product_sq(op: &RowOperator, i: usize, j: usize) -> Result<f64> {
    if i == j {
        return Err(Error::InvalidConfig(format!("cross product needs two distinct rows, got {i} twice")));
    }
    let inner = op.row_pair_inner(i, j)?;
    Ok(pair_weight(op, i, j, inner.norm_sqr()))
}

#[inline]
pub(crate) fn pair_weight(op: &RowOperator, i: usize, j: usize, inner_sq: f64) -> f64 {
    (op.row_norm_sq(i) * op.row_norm_sq(j) - inner_sq).max(0.0)
}

/// Pair law over a set of rows.
///
/// Pairs are stored unordered (`i < j`) with doubled mass, so [`total`]
/// equals the sum over ordered pairs `i != j`, which for the full row set is
/// `||A||_F^4 - ||AA^*||_F^2`.
///
/// [`total`]: PairDistribution::total
#[derive(Debug, Clone)]
pub struct PairDistribution {
    rows: Vec<usize>,
    /// Offset of pair `(p, p + 1)` in the flattened upper triangle.
    starts: Vec<usize>,
    table: CumulativeTable,
}

impl PairDistribution {
    fn over(op: &RowOperator, rows: Vec<usize>) -> Result<Self> {
        let k = rows.len();
        let mut starts = Vec::with_capacity(k);
        let mut weights = Vec::with_capacity(k * k.saturating_sub(1) / 2);
        for p in 0..k {
            starts.push(weights.len());
            for q in p + 1..k {
                let (i, j) = (rows[p], rows[q]);
                weights.push(2.0 * pair_weight(op, i, j, op.pair_inner(i, j).norm_sqr()));
            }
        }
        Ok(Self { rows, starts, table: CumulativeTable::new(weights)? })
    }

    /// Rows the law ranges over (all rows for the full table).
    pub fn rows(&self) -> &[usize] {
        &self.rows
    }

    pub fn total(&self) -> f64 {
        self.table.total()
    }

    pub fn cumulative(&self) -> &[f64] {
        self.table.cumulative()
    }

    /// Probability of drawing the unordered pair at positions `p < q`.
    pub fn probability(&self, p: usize, q: usize) -> f64 {
        let (p, q) = if p < q { (p, q) } else { (q, p) };
        self.table.weight(self.starts[p] + (q - p - 1)) / self.total()
    }

    fn decode(&self, slot: usize) -> (usize, usize) {
        let p = self.starts.partition_point(|&s| s <= slot) - 1;
        let q = p + 1 + (slot - self.starts[p]);
        (self.rows[p], self.rows[q])
    }

    fn draw(&self, rng: &mut Rng) -> Result<(usize, usize)> {
        match self.table.sample(rng) {
            Ok(slot) => Ok(self.decode(slot)),
            Err(Error::ZeroWeights) => Err(Error::ParallelRows),
            Err(e) => Err(e),
        }
    }
}

pub fn build_pair_distribution(op: &RowOperator, cap: usize) -> Result<PairDistribution> {
    let m = op.rows();
    if m > cap {
        return Err(Error::PairCap { rows: m, cap });
    }
    if m < 2 {
        return Err(Error::InvalidStructure("pair sampling needs at least two rows".into()));
    }
    PairDistribution::over(op, (0..m).collect())
}

/// Draws `(i, j)` with `i < j`.
pub fn sample_pair(dist: &PairDistribution, rng: &mut Rng) -> Result<(usize, usize)> {
    dist.draw(rng)
}

/// Pair law restricted to `indices`, built fresh per call.
pub fn sample_pair_within(op: &RowOperator, indices: &IndexSample, rng: &mut Rng) -> Result<(usize, usize)> {
    if indices.len() < 2 {
        return Err(Error::InvalidStructure("pair sampling needs at least two rows".into()));
    }
    if let Some(&bad) = indices.indices().iter().find(|&&i| i >= op.rows()) {
        return Err(Error::IndexOutOfRange { index: bad, rows: op.rows() });
    }
    PairDistribution::over(op, indices.indices().to_vec())?.draw(rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{chi_square, chi_square_critical};
    use crate::{DenseMatrix, Scalar};
    use nalgebra::DMatrix;
    use num_complex::Complex;

    fn gaussian(m: usize, n: usize, seed: u64) -> DenseMatrix {
        let mut rng = Rng::new(seed);
        DenseMatrix::from_fn(m, n, |_, _| Scalar::new(rng.normal(), rng.normal())).unwrap()
    }

    fn real(m: usize, n: usize, v: &[f64]) -> RowOperator {
        DenseMatrix::from_real(m, n, v).unwrap().into()
    }

    #[test]
    fn cross_product_examples() {
        assert_eq!(cross_product_sq(&real(2, 2, &[1.0, 0.0, 0.0, 1.0]), 0, 1).unwrap(), 1.0);
        assert_eq!(cross_product_sq(&real(2, 2, &[1.0, 0.0, 2.0, 0.0]), 0, 1).unwrap(), 0.0);
        assert_eq!(cross_product_sq(&real(2, 2, &[1.0, 0.0, 1.0, 1.0]), 0, 1).unwrap(), 1.0);
        assert!(cross_product_sq(&real(2, 2, &[1.0, 0.0, 1.0, 1.0]), 1, 1).is_err());
    }

    #[test]
    fn cross_product_symmetric_and_scale_covariant() {
        let a = gaussian(6, 4, 1);
        let op: RowOperator = a.clone().into();
        let doubled: RowOperator =
            DenseMatrix::from_fn(6, 4, |i, j| a.get(i, j) * if i == 2 { 2.0 } else { 1.0 }).unwrap().into();
        for i in 0..6 {
            for j in 0..6 {
                if i != j {
                    assert_eq!(cross_product_sq(&op, i, j).unwrap(), cross_product_sq(&op, j, i).unwrap());
                }
            }
        }
        for j in (0..6).filter(|&j| j != 2) {
            let (w, w2) = (cross_product_sq(&op, 2, j).unwrap(), cross_product_sq(&doubled, 2, j).unwrap());
            assert!((w2 - 4.0 * w).abs() <= 1e-12 * w2);
        }
    }

    #[test]
    fn identity_two_by_two_table() {
        let op: RowOperator = DenseMatrix::identity(2).into();
        let dist = build_pair_distribution(&op, DEFAULT_PAIR_CAP).unwrap();
        assert_eq!(dist.cumulative().len(), 1);
        // Ordered mass: (0,1) and (1,0) each weigh 1.
        assert_eq!(dist.total(), 2.0);
        assert_eq!(dist.probability(0, 1), 1.0);
        let mut rng = Rng::new(0);
        for _ in 0..100 {
            assert_eq!(sample_pair(&dist, &mut rng).unwrap(), (0, 1));
        }
    }

    #[test]
    fn total_matches_singular_value_oracle() {
        for seed in 0..5 {
            let a = gaussian(20, 10, seed);
            let na = DMatrix::from_fn(20, 10, |i, j| {
                let v = a.get(i, j);
                Complex::new(v.re, v.im)
            });
            let sv = na.singular_values();
            let fro4 = sv.iter().map(|s| s * s).sum::<f64>().powi(2);
            let sum_s4: f64 = sv.iter().map(|s| s.powi(4)).sum();
            let op: RowOperator = a.into();
            let dist = build_pair_distribution(&op, DEFAULT_PAIR_CAP).unwrap();
            let expected = fro4 - sum_s4;
            assert!((dist.total() - expected).abs() <= 1e-8 * expected);
        }
    }

    #[test]
    fn identical_rows_are_never_sampled_together() {
        let op = real(3, 2, &[1.0, 0.0, 2.0, 0.0, 0.0, 1.0]);
        let dist = build_pair_distribution(&op, DEFAULT_PAIR_CAP).unwrap();
        assert_eq!(dist.probability(0, 1), 0.0);
        let mut rng = Rng::new(8);
        for _ in 0..100_000 {
            assert_ne!(sample_pair(&dist, &mut rng).unwrap(), (0, 1));
        }
    }

    #[test]
    fn all_parallel_rows_error() {
        let op = real(3, 2, &[1.0, 1.0, 2.0, 2.0, -1.0, -1.0]);
        let dist = build_pair_distribution(&op, DEFAULT_PAIR_CAP).unwrap();
        assert!(matches!(sample_pair(&dist, &mut Rng::new(0)), Err(Error::ParallelRows)));
    }

    #[test]
    fn pair_cap_refuses() {
        let op: RowOperator = DenseMatrix::identity(5).into();
        assert!(matches!(build_pair_distribution(&op, 4), Err(Error::PairCap { rows: 5, cap: 4 })));
    }

    #[test]
    fn pair_frequencies_pass_chi_square() {
        let op: RowOperator = gaussian(10, 5, 21).into();
        let dist = build_pair_distribution(&op, DEFAULT_PAIR_CAP).unwrap();
        let mut counts = vec![0u64; 45];
        let mut probs = vec![0.0; 45];
        let slot = |i: usize, j: usize| i * 10 - i * (i + 1) / 2 + (j - i - 1);
        for i in 0..10 {
            for j in i + 1..10 {
                probs[slot(i, j)] = cross_product_sq(&op, i, j).unwrap() * 2.0 / dist.total();
            }
        }
        let mut rng = Rng::new(77);
        for _ in 0..200_000 {
            let (i, j) = sample_pair(&dist, &mut rng).unwrap();
            assert!(i < j);
            counts[slot(i, j)] += 1;
        }
        let (stat, df) = chi_square(&counts, &probs);
        assert!(stat < chi_square_critical(df, 0.001), "chi2 {stat} df {df}");
    }

    #[test]
    fn subset_pair_of_two_is_certain() {
        let op: RowOperator = gaussian(5, 3, 2).into();
        let subset = IndexSample::new(vec![1, 3], 5).unwrap();
        let mut rng = Rng::new(0);
        for _ in 0..50 {
            assert_eq!(sample_pair_within(&op, &subset, &mut rng).unwrap(), (1, 3));
        }
    }

    #[test]
    fn full_subset_matches_full_table_law() {
        let op: RowOperator = gaussian(6, 4, 3).into();
        let full = build_pair_distribution(&op, DEFAULT_PAIR_CAP).unwrap();
        let all = IndexSample::new((0..6).collect(), 6).unwrap();
        let (mut a, mut b) = (Rng::new(5), Rng::new(5));
        for _ in 0..1000 {
            assert_eq!(sample_pair(&full, &mut a).unwrap(), sample_pair_within(&op, &all, &mut b).unwrap());
        }
    }

    #[test]
    fn subset_frequencies_pass_chi_square() {
        let op: RowOperator = gaussian(200, 50, 4).into();
        let rows: Vec<usize> = (0..20).map(|k| 3 + 9 * k).collect();
        let subset = IndexSample::new(rows.clone(), 200).unwrap();
        let mut probs = Vec::new();
        let mut index = std::collections::HashMap::new();
        let mut total = 0.0;
        for p in 0..20 {
            for q in p + 1..20 {
                let w = cross_product_sq(&op, rows[p], rows[q]).unwrap();
                index.insert((rows[p], rows[q]), probs.len());
                probs.push(w);
                total += w;
            }
        }
        probs.iter_mut().for_each(|p| *p /= total);
        let mut counts = vec![0u64; probs.len()];
        let mut rng = Rng::new(6);
        for _ in 0..100_000 {
            counts[index[&sample_pair_within(&op, &subset, &mut rng).unwrap()]] += 1;
        }
        let (stat, df) = chi_square(&counts, &probs);
        assert!(stat < chi_square_critical(df, 0.001), "chi2 {stat} df {df}");
    }
}
