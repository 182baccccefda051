use crate::{Error, Result, Scalar};

use super::DenseMatrix;

/// Largest factor product that may be materialized densely (64x64 ⊗ 64x64).
pub const MATERIALIZE_LIMIT: usize = 64 * 64;

type SparseLines = Vec<Vec<(usize, Scalar)>>;

/// `left ⊗ right` for square factors, never formed explicitly.
///
/// Row `p * n2 + q` has entry `left[p, u] * right[q, v]` at column `u * n2 + v`.
/// Each factor keeps row- and column-wise lists of its nonzeros, so banded
/// factors give cheap rows, columns and matrix-vector products.
#[derive(Debug, Clone)]
pub struct KroneckerOperator {
    left: DenseMatrix,
    right: DenseMatrix,
    left_rows: SparseLines,
    left_cols: SparseLines,
    right_rows: SparseLines,
    right_cols: SparseLines,
}

fn nonzero_lines(m: &DenseMatrix) -> (SparseLines, SparseLines) {
    let mut rows = vec![Vec::new(); m.rows()];
    let mut cols = vec![Vec::new(); m.cols()];
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            let v = m.get(i, j);
            if v != Scalar::new(0.0, 0.0) {
                rows[i].push((j, v));
                cols[j].push((i, v));
            }
        }
    }
    (rows, cols)
}

impl KroneckerOperator {
    pub fn new(left: DenseMatrix, right: DenseMatrix) -> Result<Self> {
        for f in [&left, &right] {
            if f.rows() != f.cols() {
                return Err(Error::InvalidStructure(format!(
                    "Kronecker factors must be square, got {}x{}",
                    f.rows(),
                    f.cols()
                )));
            }
        }
        let (left_rows, left_cols) = nonzero_lines(&left);
        let (right_rows, right_cols) = nonzero_lines(&right);
        Ok(Self { left, right, left_rows, left_cols, right_rows, right_cols })
    }

    pub fn left(&self) -> &DenseMatrix {
        &self.left
    }

    pub fn right(&self) -> &DenseMatrix {
        &self.right
    }

    /// Side length `n1 * n2` of the (square) product.
    pub fn dim(&self) -> usize {
        self.left.rows() * self.right.rows()
    }

    #[inline]
    fn split(&self, i: usize) -> (usize, usize) {
        let n2 = self.right.rows();
        (i / n2, i % n2)
    }

    #[inline]
    pub(crate) fn for_each_in_row(&self, i: usize, mut f: impl FnMut(usize, Scalar)) {
        let n2 = self.right.rows();
        let (p, q) = self.split(i);
        for &(u, lv) in &self.left_rows[p] {
            for &(v, rv) in &self.right_rows[q] {
                f(u * n2 + v, lv * rv);
            }
        }
    }

    #[inline]
    pub(crate) fn for_each_in_col(&self, j: usize, mut f: impl FnMut(usize, Scalar)) {
        let n2 = self.right.rows();
        let (u, v) = self.split(j);
        for &(p, lv) in &self.left_cols[u] {
            for &(q, rv) in &self.right_cols[v] {
                f(p * n2 + q, lv * rv);
            }
        }
    }

    /// `a_i a_j^*` through the mixed-product rule on factor rows.
    pub(crate) fn pair_inner(&self, i: usize, j: usize) -> Scalar {
        let (p1, q1) = self.split(i);
        let (p2, q2) = self.split(j);
        let inner = |a: &[Scalar], b: &[Scalar]| -> Scalar { a.iter().zip(b).map(|(x, y)| x * y.conj()).sum() };
        inner(self.left.row(p1), self.left.row(p2)) * inner(self.right.row(q1), self.right.row(q2))
    }

    pub(crate) fn row_norm_sq(&self, i: usize) -> f64 {
        let (p, q) = self.split(i);
        let sq = |row: &[(usize, Scalar)]| row.iter().map(|(_, v)| v.norm_sqr()).sum::<f64>();
        sq(&self.left_rows[p]) * sq(&self.right_rows[q])
    }

    /// `(left ⊗ right) x`, via `right` on each block then `left` across blocks.
    pub(crate) fn apply_into(&self, x: &[Scalar], y: &mut [Scalar]) {
        let n1 = self.left.rows();
        let n2 = self.right.rows();
        let zero = Scalar::new(0.0, 0.0);
        // panel[u * n2 + q] = sum_v right[q, v] x[u * n2 + v]
        let mut panel = vec![zero; n1 * n2];
        for u in 0..n1 {
            let block = &x[u * n2..(u + 1) * n2];
            for q in 0..n2 {
                panel[u * n2 + q] = self.right_rows[q].iter().map(|&(v, rv)| rv * block[v]).sum();
            }
        }
        for p in 0..n1 {
            let out = &mut y[p * n2..(p + 1) * n2];
            out.fill(zero);
            for &(u, lv) in &self.left_rows[p] {
                for (o, pv) in out.iter_mut().zip(&panel[u * n2..(u + 1) * n2]) {
                    *o += lv * pv;
                }
            }
        }
    }

    /// `(left ⊗ right)^* y`.
    pub(crate) fn apply_adjoint_into(&self, y: &[Scalar], x: &mut [Scalar]) {
        let n1 = self.left.rows();
        let n2 = self.right.rows();
        let zero = Scalar::new(0.0, 0.0);
        let mut panel = vec![zero; n1 * n2];
        for p in 0..n1 {
            let block = &y[p * n2..(p + 1) * n2];
            for v in 0..n2 {
                panel[p * n2 + v] = self.right_cols[v].iter().map(|&(q, rv)| rv.conj() * block[q]).sum();
            }
        }
        for u in 0..n1 {
            let out = &mut x[u * n2..(u + 1) * n2];
            out.fill(zero);
            for &(p, lv) in &self.left_cols[u] {
                let lc = lv.conj();
                for (o, pv) in out.iter_mut().zip(&panel[p * n2..(p + 1) * n2]) {
                    *o += lc * pv;
                }
            }
        }
    }

    /// Dense copy of the product; refused above [`MATERIALIZE_LIMIT`].
    pub fn materialize(&self) -> Result<DenseMatrix> {
        let n = self.dim();
        if n > MATERIALIZE_LIMIT {
            return Err(Error::MaterializationGuard { rows: n, cols: n });
        }
        let mut values = vec![Scalar::new(0.0, 0.0); n * n];
        for i in 0..n {
            self.for_each_in_row(i, |j, v| values[i * n + j] = v);
        }
        DenseMatrix::new(n, n, values)
    }
}
