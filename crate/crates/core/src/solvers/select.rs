//! Row selection rules.
//!
//! Selectors read a residual vector `r = b - A x` (full or restricted to a
//! sampled subset) and return the working rows. `None` means the residual
//! they saw is exactly zero.

use crate::operators::RowOperator;
use crate::sampling::{locate, Rng};
use crate::{Error, Result, Scalar};

/// Retries when a two-row rule draws the same row twice.
pub const COLLISION_RETRIES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Selection {
    Single(usize),
    Pair(usize, usize),
}

/// Threshold and membership of the greedy one-row index set.
#[derive(Debug, Clone, PartialEq)]
pub struct GreedySet {
    pub epsilon: f64,
    pub members: Vec<usize>,
}

/// `eps = (max_i |r_i|^2/||a_i||^2 / ||r||^2 + 1/||A||_F^2) / 2` and the rows
/// with `|r_i|^2 >= eps ||r||^2 ||a_i||^2`.
pub fn grk_index_set(op: &RowOperator, r: &[Scalar]) -> Option<GreedySet> {
    let norms = op.row_norms_sq();
    let total: f64 = r.iter().map(|v| v.norm_sqr()).sum();
    if total == 0.0 {
        return None;
    }
    let (best, best_ratio) = argmax(r.iter().zip(norms).map(|(v, n)| v.norm_sqr() / n));
    let epsilon = 0.5 * (best_ratio / total + 1.0 / op.frobenius_sq());
    let cut = epsilon * total;
    let members = (0..r.len()).filter(|&i| i == best || r[i].norm_sqr() >= cut * norms[i]).collect();
    Some(GreedySet { epsilon, members })
}

/// Greedy randomized row: drawn from the greedy set with probability
/// proportional to `|r_i|^2`.
pub fn grk_select(op: &RowOperator, r: &[Scalar], rng: &mut Rng, scratch: &mut Vec<f64>) -> Result<Option<usize>> {
    let Some(set) = grk_index_set(op, r) else {
        return Ok(None);
    };
    draw_from(&set.members, |i| r[i].norm_sqr(), rng, scratch).map(Some)
}

/// Threshold data of the two-row greedy set.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoRowGreedySet {
    pub i_max: usize,
    /// `||r||_1 - |r_{i_max}|`.
    pub reduced_l1: f64,
    pub epsilon: f64,
    pub members: Vec<usize>,
}

/// With `i_max` the largest homogeneous residual, `S = ||r||_1 - |r_{i_max}|`:
/// `eps = (max_{i != i_max} |r_i|/||a_i|| / S + 1/(||A||_{2,1} - ||a_{i_max}||)) / 2`
/// and members are rows with `|r_i| >= eps S ||a_i||`. `None` when `S = 0`.
pub fn tgrk_index_set(op: &RowOperator, r: &[Scalar], l21: f64) -> Option<TwoRowGreedySet> {
    let norms = op.row_norms_sq();
    let ((i_max, h_max), (second, h_second)) = top_two(r.iter().zip(norms).map(|(v, n)| v.norm() / n.sqrt()));
    if h_max == 0.0 || r.len() < 2 {
        return None;
    }
    let reduced_l1 = r.iter().map(|v| v.norm()).sum::<f64>() - r[i_max].norm();
    if reduced_l1 <= 0.0 || h_second == 0.0 {
        return None;
    }
    let epsilon = 0.5 * (h_second / reduced_l1 + 1.0 / (l21 - norms[i_max].sqrt()));
    let cut = epsilon * reduced_l1;
    let members = (0..r.len()).filter(|&i| i == i_max || i == second || r[i].norm() >= cut * norms[i].sqrt()).collect();
    Some(TwoRowGreedySet { i_max, reduced_l1, epsilon, members })
}

/// Two greedy rows drawn independently with probability proportional to
/// `|r_i|`. A repeated row is redrawn up to [`COLLISION_RETRIES`] times,
/// after which the step degrades to a single row.
pub fn tgrk_select(
    op: &RowOperator,
    r: &[Scalar],
    l21: f64,
    rng: &mut Rng,
    scratch: &mut Vec<f64>,
) -> Result<Option<Selection>> {
    let Some(set) = tgrk_index_set(op, r, l21) else {
        return Ok(srk_select(op, r).map(Selection::Single));
    };
    if set.members.len() == 1 {
        return Ok(Some(Selection::Single(set.members[0])));
    }
    let weight = |i: usize| r[i].norm();
    let i = draw_from(&set.members, weight, rng, scratch)?;
    for _ in 0..=COLLISION_RETRIES {
        let j = pick(&set.members, scratch, rng);
        if j != i {
            return Ok(Some(Selection::Pair(i, j)));
        }
    }
    Ok(Some(Selection::Single(i)))
}

/// Largest homogeneous residual `|r_i| / ||a_i||`; ties go to the lowest index.
pub fn srk_select(op: &RowOperator, r: &[Scalar]) -> Option<usize> {
    let (i, v) = argmax(r.iter().zip(op.row_norms_sq()).map(|(v, n)| v.norm_sqr() / n));
    (v > 0.0).then_some(i)
}

/// Largest and second-largest homogeneous residuals.
pub fn tsrk_select(op: &RowOperator, r: &[Scalar]) -> Option<(usize, usize)> {
    if r.len() < 2 {
        return None;
    }
    let ((i, v), (j, _)) = top_two(r.iter().zip(op.row_norms_sq()).map(|(v, n)| v.norm_sqr() / n));
    (v > 0.0).then_some((i, j))
}

/// Argmax over the sampled rows `rows`, given their residuals `r_sampled`.
pub fn srks_select(op: &RowOperator, rows: &[usize], r_sampled: &[Scalar]) -> Option<usize> {
    let (k, v) = argmax(rows.iter().zip(r_sampled).map(|(&i, v)| v.norm_sqr() / op.row_norm_sq(i)));
    (v > 0.0).then(|| rows[k])
}

pub fn tsrks_select(op: &RowOperator, rows: &[usize], r_sampled: &[Scalar]) -> Option<(usize, usize)> {
    if rows.len() < 2 {
        return None;
    }
    let ((p, v), (q, _)) = top_two(rows.iter().zip(r_sampled).map(|(&i, v)| v.norm_sqr() / op.row_norm_sq(i)));
    (v > 0.0).then(|| (rows[p], rows[q]))
}

/// Consecutive disjoint pairs `(0,1), (2,3), ...`; odd `m` closes the cycle
/// with `(m-1, 0)`.
pub fn cyclic_pair(k: usize, m: usize) -> (usize, usize) {
    assert!(m >= 2, "cyclic pairs need at least two rows");
    let pairs = m / 2 + m % 2;
    let p = k % pairs;
    if 2 * p + 1 < m {
        (2 * p, 2 * p + 1)
    } else {
        (m - 1, 0)
    }
}

/// `i` with probability `||a_i||^2 / ||A||_F^2`, then `j != i` with
/// probability `||a_j||^2 / (||A||_F^2 - ||a_i||^2)`.
pub(crate) fn norm_weighted_pair(cumulative: &[f64], rng: &mut Rng) -> Result<(usize, usize)> {
    let total = *cumulative.last().ok_or(Error::ZeroWeights)?;
    let i = locate(cumulative, rng.next_f64() * total);
    let before = if i == 0 { 0.0 } else { cumulative[i - 1] };
    let wi = cumulative[i] - before;
    for _ in 0..=COLLISION_RETRIES {
        // Draw over the mass with slot i removed, then shift past it.
        let u = rng.next_f64() * (total - wi);
        let j = if u < before { locate(cumulative, u) } else { locate(cumulative, u + wi) };
        if j != i {
            return Ok((i, j));
        }
    }
    Err(Error::ParallelRows)
}

/// Index with the largest value; ties go to the first.
fn argmax(values: impl Iterator<Item = f64>) -> (usize, f64) {
    let mut best = (0, f64::NEG_INFINITY);
    for (k, v) in values.enumerate() {
        if v > best.1 {
            best = (k, v);
        }
    }
    best
}

/// Largest and second-largest entries (distinct positions), first index on ties.
fn top_two(values: impl Iterator<Item = f64>) -> ((usize, f64), (usize, f64)) {
    let mut first = (0, f64::NEG_INFINITY);
    let mut second = (0, f64::NEG_INFINITY);
    for (k, v) in values.enumerate() {
        if v > first.1 {
            second = first;
            first = (k, v);
        } else if v > second.1 {
            second = (k, v);
        }
    }
    (first, second)
}

fn draw_from(members: &[usize], weight: impl Fn(usize) -> f64, rng: &mut Rng, scratch: &mut Vec<f64>) -> Result<usize> {
    scratch.clear();
    let mut acc = 0.0;
    for &i in members {
        acc += weight(i);
        scratch.push(acc);
    }
    if acc <= 0.0 {
        return Err(Error::Internal("greedy index set carries no residual mass".into()));
    }
    Ok(pick(members, scratch, rng))
}

fn pick(members: &[usize], cumulative: &[f64], rng: &mut Rng) -> usize {
    let total = cumulative[cumulative.len() - 1];
    members[locate(cumulative, rng.next_f64() * total)]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::DenseMatrix;

    fn c(re: f64) -> Scalar {
        Scalar::new(re, 0.0)
    }

    fn diag(d: &[f64]) -> RowOperator {
        let n = d.len();
        DenseMatrix::from_fn(n, n, |i, j| c(if i == j { d[i] } else { 0.0 })).unwrap().into()
    }

    #[test]
    fn grk_single_nonzero_residual() {
        let op = diag(&[1.0, 2.0, 3.0]);
        let r = [c(0.0), c(0.5), c(0.0)];
        let mut rng = Rng::new(0);
        let mut scratch = Vec::new();
        for _ in 0..100 {
            assert_eq!(grk_select(&op, &r, &mut rng, &mut scratch).unwrap(), Some(1));
        }
        assert_eq!(grk_select(&op, &[c(0.0); 3], &mut rng, &mut scratch).unwrap(), None);
    }

    #[test]
    fn grk_identity_three_one() {
        let op = diag(&[1.0, 1.0]);
        let r = [c(3.0), c(1.0)];
        let set = grk_index_set(&op, &r).unwrap();
        assert!((set.epsilon - 0.5 * (0.9 + 0.5)).abs() < 1e-15);
        assert_eq!(set.members, vec![0]);
        let mut rng = Rng::new(1);
        let mut scratch = Vec::new();
        for _ in 0..100 {
            assert_eq!(grk_select(&op, &r, &mut rng, &mut scratch).unwrap(), Some(0));
        }
    }

    #[test]
    fn grk_uniform_residual_uses_all_rows() {
        let op = diag(&[1.0; 4]);
        let r = [c(2.0); 4];
        assert_eq!(grk_index_set(&op, &r).unwrap().members, vec![0, 1, 2, 3]);
        let mut rng = Rng::new(2);
        let mut scratch = Vec::new();
        let mut counts = [0u32; 4];
        for _ in 0..40_000 {
            counts[grk_select(&op, &r, &mut rng, &mut scratch).unwrap().unwrap()] += 1;
        }
        let se = (0.25f64 * 0.75 / 40_000.0).sqrt();
        for n in counts {
            assert!((n as f64 / 40_000.0 - 0.25).abs() < 3.0 * se);
        }
    }

    /// Direct evaluation of the two-row threshold, written independently.
    fn tgrk_oracle(d: &[f64], r: &[f64]) -> (f64, Vec<usize>) {
        let h: Vec<f64> = r.iter().zip(d).map(|(r, d)| r.abs() / d.abs()).collect();
        let mut i_max = 0;
        for k in 0..h.len() {
            if h[k] > h[i_max] {
                i_max = k;
            }
        }
        let rho = d[i_max].abs();
        let varrho = r[i_max].abs();
        let l1: f64 = r.iter().map(|v| v.abs()).sum();
        let l21: f64 = d.iter().map(|v| v.abs()).sum();
        let max_other = (0..h.len()).filter(|&k| k != i_max).map(|k| h[k]).fold(0.0, f64::max);
        let eps = 0.5 * (max_other / (l1 - varrho) + 1.0 / (l21 - rho));
        let set = (0..r.len()).filter(|&k| r[k].abs() >= eps * (l1 - varrho) * d[k].abs()).collect();
        (eps, set)
    }

    #[test]
    fn tgrk_set_matches_oracle_on_diagonal() {
        let d = [1.0, 2.0, 0.5, 3.0];
        let r = [0.4, -1.0, 0.3, 2.5];
        let op = diag(&d);
        let rr: Vec<Scalar> = r.iter().map(|&v| c(v)).collect();
        let set = tgrk_index_set(&op, &rr, op.norms().l21).unwrap();
        let (eps, members) = tgrk_oracle(&d, &r);
        assert!((set.epsilon - eps).abs() < 1e-15);
        assert_eq!(set.members, members);
        assert_eq!(set.i_max, 3);
    }

    #[test]
    fn tgrk_two_row_residual_selects_those_rows() {
        let op = diag(&[1.0; 5]);
        let r = [c(0.0), c(2.0), c(0.0), c(1.5), c(0.0)];
        let mut rng = Rng::new(4);
        let mut scratch = Vec::new();
        for _ in 0..200 {
            match tgrk_select(&op, &r, 5.0, &mut rng, &mut scratch).unwrap().unwrap() {
                Selection::Pair(i, j) => assert!((i, j) == (1, 3) || (i, j) == (3, 1)),
                Selection::Single(_) => panic!("expected a pair"),
            }
        }
    }

    #[test]
    fn tgrk_symmetric_pair_frequencies() {
        let op = diag(&[1.0; 6]);
        let r = [c(1.0), c(0.0), c(0.0), c(-1.0), c(0.0), c(0.0)];
        let mut rng = Rng::new(5);
        let mut scratch = Vec::new();
        let n = 100_000;
        let mut forward = 0;
        for _ in 0..n {
            match tgrk_select(&op, &r, 6.0, &mut rng, &mut scratch).unwrap().unwrap() {
                Selection::Pair(0, 3) => forward += 1,
                Selection::Pair(3, 0) => {}
                other => panic!("unexpected {other:?}"),
            }
        }
        let se = (0.25f64 / n as f64).sqrt();
        assert!((forward as f64 / n as f64 - 0.5).abs() < 3.0 * se);
    }

    #[test]
    fn tgrk_lone_residual_is_single_step() {
        let op = diag(&[1.0; 3]);
        let r = [c(0.0), c(0.0), c(4.0)];
        let mut rng = Rng::new(0);
        assert_eq!(tgrk_select(&op, &r, 3.0, &mut rng, &mut Vec::new()).unwrap(), Some(Selection::Single(2)));
        assert_eq!(tgrk_select(&op, &[c(0.0); 3], 3.0, &mut rng, &mut Vec::new()).unwrap(), None);
    }

    #[test]
    fn semi_randomized_examples() {
        let op = diag(&[1.0; 3]);
        let r = [c(0.1), c(0.9), c(0.5)];
        assert_eq!(srk_select(&op, &r), Some(1));
        assert_eq!(tsrk_select(&op, &r), Some((1, 2)));
        let tie = diag(&[1.0; 4]);
        let r = [c(2.0), c(1.0), c(0.0), c(-2.0)];
        assert_eq!(srk_select(&tie, &r), Some(0));
        assert_eq!(tsrk_select(&tie, &r), Some((0, 3)));
        let two = diag(&[1.0, 5.0]);
        assert_eq!(tsrk_select(&two, &[c(0.0), c(1.0)]), Some((1, 0)));
        assert_eq!(srk_select(&two, &[c(0.0), c(0.0)]), None);
    }

    #[test]
    fn sampled_selection_on_full_set_matches_full_rule() {
        let op = diag(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        let r = [c(0.3), c(1.9), c(-2.0), c(4.1), c(0.0)];
        let rows: Vec<usize> = (0..5).collect();
        assert_eq!(srks_select(&op, &rows, &r), srk_select(&op, &r));
        assert_eq!(tsrks_select(&op, &rows, &r), tsrk_select(&op, &r));
        assert_eq!(tsrks_select(&op, &[1, 3], &[r[1], r[3]]), Some((3, 1)));
    }

    #[test]
    fn cyclic_pairs() {
        assert_eq!((0..3).map(|k| cyclic_pair(k, 4)).collect::<Vec<_>>(), vec![(0, 1), (2, 3), (0, 1)]);
        assert_eq!((0..4).map(|k| cyclic_pair(k, 5)).collect::<Vec<_>>(), vec![(0, 1), (2, 3), (4, 0), (0, 1)]);
        assert!((0..5).all(|k| cyclic_pair(k, 2) == (0, 1)));
    }

    #[test]
    fn norm_weighted_pair_law() {
        let weights = [1.0, 2.0, 3.0, 4.0];
        let mut cum = Vec::new();
        let mut acc = 0.0;
        for w in weights {
            acc += w;
            cum.push(acc);
        }
        let mut rng = Rng::new(8);
        let n = 200_000;
        let mut counts = [[0u32; 4]; 4];
        for _ in 0..n {
            let (i, j) = norm_weighted_pair(&cum, &mut rng).unwrap();
            assert_ne!(i, j);
            counts[i][j] += 1;
        }
        for i in 0..4 {
            for j in 0..4 {
                if i == j {
                    continue;
                }
                let p = weights[i] / 10.0 * weights[j] / (10.0 - weights[i]);
                let se = (p * (1.0 - p) / n as f64).sqrt();
                assert!((counts[i][j] as f64 / n as f64 - p).abs() < 4.0 * se, "({i},{j})");
            }
        }
    }
}
