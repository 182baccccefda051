//! Eigenvalues of the short-side Gram matrix for small diagnostics.

use super::RowOperator;
use crate::{Error, Result, Scalar};

pub const DEFAULT_SPECTRUM_CAP: usize = 512;

const SWEEP_LIMIT: usize = 100;
const OFF_DIAGONAL_TOL: f64 = 1e-10;
const RANK_CUTOFF: f64 = 1e-10;

/// Spectrum of `AA^*` (or `A^*A`, whichever is smaller). Both share their
/// nonzero eigenvalues.
#[derive(Debug, Clone, PartialEq)]
pub struct GramSpectrum {
    /// Descending.
    pub eigenvalues: Vec<f64>,
    /// `||A||_2^2`.
    pub lambda_max: f64,
    /// Smallest eigenvalue above `1e-10 * lambda_max`, or 0 for a zero matrix.
    pub lambda_min_nonzero: f64,
    pub rank: usize,
}

impl GramSpectrum {
    /// `||A||_2`.
    pub fn sigma_max(&self) -> f64 {
        self.lambda_max.sqrt()
    }
}

impl RowOperator {
    /// Short-side Gram matrix, row-major.
    pub fn gram(&self, cap: usize) -> Result<(usize, Vec<Scalar>)> {
        let (m, n) = (self.rows(), self.cols());
        let dim = m.min(n);
        if dim > cap {
            return Err(Error::DiagnosticsCap { dim, cap });
        }
        let mut g = vec![Scalar::new(0.0, 0.0); dim * dim];
        if m <= n {
            for i in 0..m {
                for j in i..m {
                    let v = self.pair_inner(i, j);
                    g[i * m + j] = v;
                    g[j * m + i] = v.conj();
                }
            }
        } else {
            // A^*A accumulated from rows: sum_i a_i^* a_i.
            for i in 0..m {
                let row = self.row_view(i)?;
                for &(p, ap) in &row {
                    for &(q, aq) in &row {
                        g[p * n + q] += ap.conj() * aq;
                    }
                }
            }
        }
        Ok((dim, g))
    }

    /// `||AA^*||_F^2 = sum_{i,j} |a_i a_j^*|^2`.
    pub fn gram_frobenius_sq(&self, cap: usize) -> Result<f64> {
        let (_, g) = self.gram(cap)?;
        Ok(g.iter().map(|v| v.norm_sqr()).sum())
    }

    pub fn gram_spectrum(&self, cap: usize) -> Result<GramSpectrum> {
        let (dim, g) = self.gram(cap)?;
        let mut eigenvalues = hermitian_eigenvalues(dim, g)?;
        eigenvalues.sort_by(|a, b| b.total_cmp(a));
        let lambda_max = eigenvalues.first().copied().unwrap_or(0.0).max(0.0);
        let cutoff = RANK_CUTOFF * lambda_max;
        let kept: Vec<f64> = eigenvalues.iter().copied().filter(|&v| v > cutoff).collect();
        Ok(GramSpectrum {
            lambda_min_nonzero: kept.last().copied().unwrap_or(0.0),
            rank: kept.len(),
            lambda_max,
            eigenvalues,
        })
    }
}

/// Cyclic Jacobi for a Hermitian matrix stored row-major.
pub(crate) fn hermitian_eigenvalues(n: usize, mut g: Vec<Scalar>) -> Result<Vec<f64>> {
    let at = |i: usize, j: usize| i * n + j;
    let off = |g: &[Scalar]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += g[at(i, j)].norm_sqr();
                }
            }
        }
        s
    };
    let total: f64 = g.iter().map(|v| v.norm_sqr()).sum();
    if total == 0.0 {
        return Ok(vec![0.0; n]);
    }
    let target = (OFF_DIAGONAL_TOL * OFF_DIAGONAL_TOL) * total;
    let mut sweeps = 0;
    while off(&g) > target {
        sweeps += 1;
        if sweeps > SWEEP_LIMIT {
            return Err(Error::Internal("Jacobi eigenvalue sweep did not converge".into()));
        }
        for p in 0..n {
            for q in p + 1..n {
                let gpq = g[at(p, q)];
                let abs = gpq.norm();
                if abs <= f64::MIN_POSITIVE {
                    continue;
                }
                let e = gpq / abs;
                let tau = (g[at(q, q)].re - g[at(p, p)].re) / (2.0 * abs);
                let t = if tau >= 0.0 { 1.0 } else { -1.0 } / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // V has V_pp = c, V_pq = s, V_qp = -s conj(e), V_qq = c conj(e); G <- V^* G V.
                let (vpp, vpq) = (Scalar::new(c, 0.0), Scalar::new(s, 0.0));
                let (vqp, vqq) = (-s * e.conj(), c * e.conj());
                for k in 0..n {
                    let (gkp, gkq) = (g[at(k, p)], g[at(k, q)]);
                    g[at(k, p)] = gkp * vpp + gkq * vqp;
                    g[at(k, q)] = gkp * vpq + gkq * vqq;
                }
                for k in 0..n {
                    let (gpk, gqk) = (g[at(p, k)], g[at(q, k)]);
                    g[at(p, k)] = vpp.conj() * gpk + vqp.conj() * gqk;
                    g[at(q, k)] = vpq.conj() * gpk + vqq.conj() * gqk;
                }
                g[at(p, q)] = Scalar::new(0.0, 0.0);
                g[at(q, p)] = Scalar::new(0.0, 0.0);
            }
        }
    }
    Ok((0..n).map(|i| g[at(i, i)].re).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::DenseMatrix;
    use nalgebra::DMatrix;
    use num_complex::Complex;

    fn lcg(seed: u64) -> impl FnMut() -> f64 {
        let mut s = seed;
        move || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        }
    }

    #[test]
    fn identity_spectrum() {
        let op: RowOperator = DenseMatrix::identity(4).into();
        let s = op.gram_spectrum(DEFAULT_SPECTRUM_CAP).unwrap();
        assert_eq!(s.rank, 4);
        assert!((s.lambda_max - 1.0).abs() < 1e-14);
        assert!((s.lambda_min_nonzero - 1.0).abs() < 1e-14);
    }

    #[test]
    fn diagonal_spectrum() {
        let op: RowOperator = DenseMatrix::from_real(2, 2, &[3.0, 0.0, 0.0, 4.0]).unwrap().into();
        let s = op.gram_spectrum(DEFAULT_SPECTRUM_CAP).unwrap();
        assert!((s.lambda_min_nonzero - 9.0).abs() < 1e-12);
        assert!((s.sigma_max() - 4.0).abs() < 1e-12);
        let rank_one: RowOperator = DenseMatrix::from_real(2, 2, &[1.0, 0.0, 2.0, 0.0]).unwrap().into();
        let s = rank_one.gram_spectrum(DEFAULT_SPECTRUM_CAP).unwrap();
        assert_eq!(s.rank, 1);
        assert!((s.lambda_min_nonzero - 5.0).abs() < 1e-12);
        assert!((s.sigma_max() - 5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn rank_deficient_matrix() {
        let op: RowOperator = DenseMatrix::from_real(3, 2, &[1.0, 2.0, 2.0, 4.0, 3.0, 6.0]).unwrap().into();
        let s = op.gram_spectrum(DEFAULT_SPECTRUM_CAP).unwrap();
        assert_eq!(s.rank, 1);
        assert!((s.lambda_max - 70.0).abs() < 1e-10);
        assert!((s.lambda_min_nonzero - 70.0).abs() < 1e-10);
    }

    #[test]
    fn cap_is_enforced() {
        let op: RowOperator = DenseMatrix::identity(5).into();
        assert!(matches!(op.gram_spectrum(4), Err(Error::DiagnosticsCap { dim: 5, cap: 4 })));
    }

    #[test]
    fn matches_nalgebra_eigenvalues_on_random_complex_matrices() {
        let mut next = lcg(7);
        for &(m, n) in &[(5, 3), (3, 5), (20, 12), (12, 30), (40, 40)] {
            let a = DenseMatrix::from_fn(m, n, |_, _| Scalar::new(next(), next())).unwrap();
            let na = DMatrix::from_fn(m, n, |i, j| {
                let v = a.get(i, j);
                Complex::new(v.re, v.im)
            });
            let gram = if m <= n { &na * na.adjoint() } else { na.adjoint() * &na };
            let mut reference: Vec<f64> = gram.symmetric_eigenvalues().iter().copied().collect();
            reference.sort_by(|x, y| y.total_cmp(x));
            let op: RowOperator = a.into();
            let s = op.gram_spectrum(DEFAULT_SPECTRUM_CAP).unwrap();
            for (x, y) in s.eigenvalues.iter().zip(&reference) {
                assert!((x - y).abs() <= 1e-9 * reference[0], "{x} vs {y}");
            }
            let fro: f64 = gram.iter().map(|v| v.norm_sqr()).sum();
            let ours = op.gram_frobenius_sq(DEFAULT_SPECTRUM_CAP).unwrap();
            assert!((ours - fro).abs() <= 1e-10 * fro);
        }
    }

    #[test]
    fn largest_eigenvalue_matches_power_iteration() {
        let mut next = lcg(11);
        let a = DenseMatrix::from_fn(30, 10, |_, _| Scalar::new(next(), next())).unwrap();
        let op: RowOperator = a.into();
        let mut v: Vec<Scalar> = (0..10).map(|k| Scalar::new(1.0 + k as f64, 0.0)).collect();
        let mut lambda = 0.0;
        for _ in 0..2000 {
            let w = op.apply_adjoint(&op.apply(&v).unwrap()).unwrap();
            let norm = super::super::norm2(&w);
            lambda = norm / super::super::norm2(&v);
            v = w.iter().map(|z| z / norm).collect();
        }
        let s = op.gram_spectrum(DEFAULT_SPECTRUM_CAP).unwrap();
        assert!((s.lambda_max - lambda).abs() < 1e-8 * lambda);
    }
}
