//! Row-access matrices.
//!
//! Every Kaczmarz-type iteration touches `A` only through a handful of rows
//! per step, so [`RowOperator`] exposes rows, row inner products and row
//! norms as the primary interface, with full products (`A x`, `A^* y`) kept
//! for residual checks and diagnostics. Operators are immutable once built.

mod dense;
mod kronecker;
mod sparse;
mod spectrum;

pub use dense::DenseMatrix;
pub use kronecker::{KroneckerOperator, MATERIALIZE_LIMIT};
pub use sparse::SparseRowMatrix;
pub use spectrum::{GramSpectrum, DEFAULT_SPECTRUM_CAP};

use crate::{Error, Result, Scalar};

const ZERO: Scalar = Scalar::new(0.0, 0.0);

#[derive(Debug, Clone)]
pub enum Storage {
    Dense(DenseMatrix),
    Sparse {
        rows: SparseRowMatrix,
        /// Transposed copy for column access.
        cols: SparseRowMatrix,
    },
    Kronecker(KroneckerOperator),
}

/// Frobenius, `l_{2,1}` and per-row Euclidean norms.
#[derive(Debug, Clone, PartialEq)]
pub struct Norms {
    pub frobenius: f64,
    pub l21: f64,
    pub row_norms: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct RowOperator {
    storage: Storage,
    row_norms_sq: Vec<f64>,
    frobenius_sq: f64,
}

impl From<DenseMatrix> for RowOperator {
    fn from(m: DenseMatrix) -> Self {
        Self::with_storage(Storage::Dense(m))
    }
}

impl From<SparseRowMatrix> for RowOperator {
    fn from(m: SparseRowMatrix) -> Self {
        let cols = m.transpose();
        Self::with_storage(Storage::Sparse { rows: m, cols })
    }
}

impl From<KroneckerOperator> for RowOperator {
    fn from(k: KroneckerOperator) -> Self {
        Self::with_storage(Storage::Kronecker(k))
    }
}

impl RowOperator {
    fn with_storage(storage: Storage) -> Self {
        let m = match &storage {
            Storage::Dense(d) => d.rows(),
            Storage::Sparse { rows, .. } => rows.rows(),
            Storage::Kronecker(k) => k.dim(),
        };
        let row_norms_sq: Vec<f64> = (0..m)
            .map(|i| match &storage {
                Storage::Dense(d) => d.row(i).iter().map(|v| v.norm_sqr()).sum(),
                Storage::Sparse { rows, .. } => rows.row(i).1.iter().map(|v| v.norm_sqr()).sum(),
                Storage::Kronecker(k) => k.row_norm_sq(i),
            })
            .collect();
        let frobenius_sq = row_norms_sq.iter().sum();
        Self { storage, row_norms_sq, frobenius_sq }
    }

    pub fn storage(&self) -> &Storage {
        &self.storage
    }

    pub fn rows(&self) -> usize {
        self.row_norms_sq.len()
    }

    pub fn cols(&self) -> usize {
        match &self.storage {
            Storage::Dense(d) => d.cols(),
            Storage::Sparse { rows, .. } => rows.cols(),
            Storage::Kronecker(k) => k.dim(),
        }
    }

    fn check_row(&self, i: usize) -> Result<()> {
        if i >= self.rows() {
            return Err(Error::IndexOutOfRange { index: i, rows: self.rows() });
        }
        Ok(())
    }

    fn check_len(expected: usize, got: usize) -> Result<()> {
        if expected != got {
            return Err(Error::DimensionMismatch { expected, got });
        }
        Ok(())
    }

    /// Calls `f(col, value)` for the stored entries of row `i` in column order.
    #[inline]
    pub fn for_each_in_row(&self, i: usize, mut f: impl FnMut(usize, Scalar)) {
        match &self.storage {
            Storage::Dense(d) => d.row(i).iter().enumerate().for_each(|(j, &v)| f(j, v)),
            Storage::Sparse { rows, .. } => {
                let (cols, vals) = rows.row(i);
                cols.iter().zip(vals).for_each(|(&j, &v)| f(j, v));
            }
            Storage::Kronecker(k) => k.for_each_in_row(i, f),
        }
    }

    /// Nonzero entries of row `i` in increasing column order.
    pub fn row_view(&self, i: usize) -> Result<Vec<(usize, Scalar)>> {
        self.check_row(i)?;
        let mut out = Vec::new();
        self.for_each_in_row(i, |j, v| {
            if v != ZERO {
                out.push((j, v));
            }
        });
        Ok(out)
    }

    /// `a_i x` without conjugation.
    pub fn row_dot(&self, i: usize, x: &[Scalar]) -> Result<Scalar> {
        self.check_row(i)?;
        Self::check_len(self.cols(), x.len())?;
        Ok(self.dot_row(i, x))
    }

    #[inline]
    pub(crate) fn dot_row(&self, i: usize, x: &[Scalar]) -> Scalar {
        match &self.storage {
            Storage::Dense(d) => d.row(i).iter().zip(x).map(|(a, b)| a * b).sum(),
            Storage::Sparse { rows, .. } => {
                let (cols, vals) = rows.row(i);
                cols.iter().zip(vals).map(|(&j, a)| a * x[j]).sum()
            }
            Storage::Kronecker(k) => {
                let mut acc = ZERO;
                k.for_each_in_row(i, |j, v| acc += v * x[j]);
                acc
            }
        }
    }

    /// `a_i a_j^* = sum_k A[i,k] conj(A[j,k])`.
    pub fn row_pair_inner(&self, i: usize, j: usize) -> Result<Scalar> {
        self.check_row(i)?;
        self.check_row(j)?;
        Ok(self.pair_inner(i, j))
    }

    pub(crate) fn pair_inner(&self, i: usize, j: usize) -> Scalar {
        match &self.storage {
            Storage::Dense(d) => d.row(i).iter().zip(d.row(j)).map(|(a, b)| a * b.conj()).sum(),
            Storage::Sparse { rows, .. } => {
                let (ci, vi) = rows.row(i);
                let (cj, vj) = rows.row(j);
                let (mut p, mut q) = (0, 0);
                let mut acc = ZERO;
                while p < ci.len() && q < cj.len() {
                    match ci[p].cmp(&cj[q]) {
                        std::cmp::Ordering::Less => p += 1,
                        std::cmp::Ordering::Greater => q += 1,
                        std::cmp::Ordering::Equal => {
                            acc += vi[p] * vj[q].conj();
                            p += 1;
                            q += 1;
                        }
                    }
                }
                acc
            }
            Storage::Kronecker(k) => k.pair_inner(i, j),
        }
    }

    /// `x += coeff * a_i^*`.
    #[inline]
    pub(crate) fn add_row_adjoint(&self, i: usize, coeff: Scalar, x: &mut [Scalar]) {
        match &self.storage {
            Storage::Dense(d) => {
                for (xj, a) in x.iter_mut().zip(d.row(i)) {
                    *xj += coeff * a.conj();
                }
            }
            Storage::Sparse { rows, .. } => {
                let (cols, vals) = rows.row(i);
                for (&j, a) in cols.iter().zip(vals) {
                    x[j] += coeff * a.conj();
                }
            }
            Storage::Kronecker(k) => k.for_each_in_row(i, |j, a| x[j] += coeff * a.conj()),
        }
    }

    /// `r -= A d` where `d = sum_t coeffs[t] * a_{rows[t]}^*`.
    ///
    /// Dense storage goes row by row; sparse and Kronecker storage only visit
    /// the columns in the support of `d`.
    pub(crate) fn sub_apply_row_combination(&self, terms: &[(usize, Scalar)], r: &mut [Scalar]) {
        match &self.storage {
            Storage::Dense(d) => {
                let mut delta = vec![ZERO; d.cols()];
                for &(i, c) in terms {
                    self.add_row_adjoint(i, c, &mut delta);
                }
                for (k, rk) in r.iter_mut().enumerate() {
                    *rk -= d.row(k).iter().zip(&delta).map(|(a, b)| a * b).sum::<Scalar>();
                }
            }
            _ => {
                let mut support: Vec<(usize, Scalar)> = Vec::new();
                for &(i, c) in terms {
                    self.for_each_in_row(i, |j, a| support.push((j, c * a.conj())));
                }
                support.sort_by_key(|&(j, _)| j);
                let mut t = 0;
                while t < support.len() {
                    let j = support[t].0;
                    let mut dj = ZERO;
                    while t < support.len() && support[t].0 == j {
                        dj += support[t].1;
                        t += 1;
                    }
                    self.for_each_in_col(j, |k, a| r[k] -= a * dj);
                }
            }
        }
    }

    #[inline]
    fn for_each_in_col(&self, j: usize, mut f: impl FnMut(usize, Scalar)) {
        match &self.storage {
            Storage::Dense(d) => (0..d.rows()).for_each(|k| f(k, d.get(k, j))),
            Storage::Sparse { cols, .. } => {
                let (rows, vals) = cols.row(j);
                rows.iter().zip(vals).for_each(|(&k, &v)| f(k, v));
            }
            Storage::Kronecker(k) => k.for_each_in_col(j, f),
        }
    }

    pub fn apply(&self, x: &[Scalar]) -> Result<Vec<Scalar>> {
        Self::check_len(self.cols(), x.len())?;
        let mut y = vec![ZERO; self.rows()];
        self.apply_into(x, &mut y);
        Ok(y)
    }

    pub(crate) fn apply_into(&self, x: &[Scalar], y: &mut [Scalar]) {
        match &self.storage {
            Storage::Kronecker(k) => k.apply_into(x, y),
            _ => {
                for (i, yi) in y.iter_mut().enumerate() {
                    *yi = self.dot_row(i, x);
                }
            }
        }
    }

    /// `A^* y` (conjugate transpose).
    pub fn apply_adjoint(&self, y: &[Scalar]) -> Result<Vec<Scalar>> {
        Self::check_len(self.rows(), y.len())?;
        let mut x = vec![ZERO; self.cols()];
        match &self.storage {
            Storage::Kronecker(k) => k.apply_adjoint_into(y, &mut x),
            _ => {
                for (i, &yi) in y.iter().enumerate() {
                    if yi != ZERO {
                        self.add_row_adjoint(i, yi, &mut x);
                    }
                }
            }
        }
        Ok(x)
    }

    /// `b - A x`.
    pub fn residual(&self, b: &[Scalar], x: &[Scalar]) -> Result<Vec<Scalar>> {
        Self::check_len(self.rows(), b.len())?;
        let mut r = self.apply(x)?;
        for (ri, bi) in r.iter_mut().zip(b) {
            *ri = bi - *ri;
        }
        Ok(r)
    }

    #[inline]
    pub fn row_norm_sq(&self, i: usize) -> f64 {
        self.row_norms_sq[i]
    }

    pub fn row_norms_sq(&self) -> &[f64] {
        &self.row_norms_sq
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.frobenius_sq
    }

    pub fn norms(&self) -> Norms {
        let row_norms: Vec<f64> = self.row_norms_sq.iter().map(|v| v.sqrt()).collect();
        Norms { frobenius: self.frobenius_sq.sqrt(), l21: row_norms.iter().sum(), row_norms }
    }

    /// Dense copy for small operators (tests, diagnostics).
    pub fn to_dense(&self) -> Result<DenseMatrix> {
        match &self.storage {
            Storage::Dense(d) => Ok(d.clone()),
            Storage::Sparse { rows, .. } => Ok(rows.to_dense()),
            Storage::Kronecker(k) => k.materialize(),
        }
    }
}

pub(crate) fn norm2(v: &[Scalar]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}
