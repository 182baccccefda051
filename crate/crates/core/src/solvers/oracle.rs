//! Direct least-norm solve for small systems, used as a reference.

use super::LinearSystem;
use crate::operators::DEFAULT_SPECTRUM_CAP;
use crate::{Error, Result, Scalar};

const PIVOT_TOL: f64 = 1e-12;

/// `A^+ b` through the normal equations of the short side: `A^* (AA^*)^{-1} b`
/// when `m <= n`, `(A^*A)^{-1} A^* b` otherwise.
pub fn least_norm_oracle(system: &LinearSystem) -> Result<Vec<Scalar>> {
    let op = &system.op;
    let (dim, gram) = op.gram(DEFAULT_SPECTRUM_CAP)?;
    if op.rows() <= op.cols() {
        let y = gaussian_solve(dim, gram, system.b.clone())?;
        op.apply_adjoint(&y)
    } else {
        let rhs = op.apply_adjoint(&system.b)?;
        gaussian_solve(dim, gram, rhs)
    }
}

/// Partially pivoted elimination on a row-major `n x n` matrix.
pub(crate) fn gaussian_solve(n: usize, mut a: Vec<Scalar>, mut rhs: Vec<Scalar>) -> Result<Vec<Scalar>> {
    let scale = (0..n).map(|i| a[i * n + i].norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Err(Error::Singular);
    }
    for col in 0..n {
        let pivot =
            (col..n).max_by(|&p, &q| a[p * n + col].norm().total_cmp(&a[q * n + col].norm())).expect("nonempty range");
        if a[pivot * n + col].norm() <= PIVOT_TOL * scale {
            return Err(Error::Singular);
        }
        if pivot != col {
            for k in 0..n {
                a.swap(pivot * n + k, col * n + k);
            }
            rhs.swap(pivot, col);
        }
        let diag = a[col * n + col];
        for row in col + 1..n {
            let factor = a[row * n + col] / diag;
            if factor == Scalar::new(0.0, 0.0) {
                continue;
            }
            for k in col..n {
                let v = a[col * n + k];
                a[row * n + k] -= factor * v;
            }
            let v = rhs[col];
            rhs[row] -= factor * v;
        }
    }
    for col in (0..n).rev() {
        let mut acc = rhs[col];
        for k in col + 1..n {
            acc -= a[col * n + k] * rhs[k];
        }
        rhs[col] = acc / a[col * n + col];
    }
    Ok(rhs)
}
