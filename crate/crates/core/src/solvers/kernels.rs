//! Row projections shared by every method.

use crate::operators::RowOperator;
use crate::{Error, Result, Scalar};

/// Correction `x += sum coeff * a_row^*` produced by one step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Update {
    Single { row: usize, coeff: Scalar },
    Pair { rows: (usize, usize), coeffs: (Scalar, Scalar) },
}

impl Update {
    pub(crate) fn apply(&self, op: &RowOperator, x: &mut [Scalar]) {
        match *self {
            Update::Single { row, coeff } => op.add_row_adjoint(row, coeff, x),
            Update::Pair { rows, coeffs } => {
                op.add_row_adjoint(rows.0, coeffs.0, x);
                op.add_row_adjoint(rows.1, coeffs.1, x);
            }
        }
    }

    pub(crate) fn update_residual(&self, op: &RowOperator, r: &mut [Scalar]) {
        match *self {
            Update::Single { row, coeff } => op.sub_apply_row_combination(&[(row, coeff)], r),
            Update::Pair { rows, coeffs } => op.sub_apply_row_combination(&[(rows.0, coeffs.0), (rows.1, coeffs.1)], r),
        }
    }
}

#[inline]
fn row_residual(op: &RowOperator, b: &[Scalar], x: &[Scalar], i: usize) -> Scalar {
    b[i] - op.dot_row(i, x)
}

pub(crate) fn single_coeffs(op: &RowOperator, b: &[Scalar], x: &[Scalar], i: usize) -> Update {
    Update::Single { row: i, coeff: row_residual(op, b, x, i) / op.row_norm_sq(i) }
}

/// Oblique projection onto both hyperplanes; single-row step on `i` when the
/// rows are parallel to within `parallel_tol`.
pub(crate) fn two_row_coeffs(
    op: &RowOperator,
    b: &[Scalar],
    x: &[Scalar],
    i: usize,
    j: usize,
    parallel_tol: f64,
) -> Result<Update> {
    let (ni, nj) = (op.row_norm_sq(i), op.row_norm_sq(j));
    let p = op.pair_inner(i, j);
    let det = ni * nj - p.norm_sqr();
    if det <= parallel_tol * ni * nj {
        return Ok(single_coeffs(op, b, x, i));
    }
    if det <= 0.0 || !det.is_finite() {
        return Err(Error::Internal(format!("two-row determinant {det} after passing the parallel test")));
    }
    let (ri, rj) = (row_residual(op, b, x, i), row_residual(op, b, x, j));
    Ok(Update::Pair { rows: (i, j), coeffs: ((nj * ri - p * rj) / det, (ni * rj - p.conj() * ri) / det) })
}

/// Same projection written with the normalized coherence `mu`.
pub(crate) fn gtrk_coeffs(
    op: &RowOperator,
    b: &[Scalar],
    x: &[Scalar],
    i: usize,
    j: usize,
    parallel_tol: f64,
) -> Result<Update> {
    let (si, sj) = (op.row_norm_sq(i).sqrt(), op.row_norm_sq(j).sqrt());
    let mu = op.pair_inner(j, i) / (sj * si);
    let gap = 1.0 - mu.norm_sqr();
    if gap <= parallel_tol {
        return Ok(single_coeffs(op, b, x, i));
    }
    let r1 = row_residual(op, b, x, i) / si;
    let r2 = row_residual(op, b, x, j) / sj;
    Ok(Update::Pair { rows: (i, j), coeffs: ((r1 - mu.conj() * r2) / (gap * si), (r2 - mu * r1) / (gap * sj)) })
}

fn check_step_args(op: &RowOperator, b: &[Scalar], x: &[Scalar], rows: &[usize]) -> Result<()> {
    if b.len() != op.rows() {
        return Err(Error::DimensionMismatch { expected: op.rows(), got: b.len() });
    }
    if x.len() != op.cols() {
        return Err(Error::DimensionMismatch { expected: op.cols(), got: x.len() });
    }
    for &i in rows {
        if i >= op.rows() {
            return Err(Error::IndexOutOfRange { index: i, rows: op.rows() });
        }
        if op.row_norm_sq(i) == 0.0 {
            return Err(Error::ZeroRow(i));
        }
    }
    if rows.len() == 2 && rows[0] == rows[1] {
        return Err(Error::InvalidConfig(format!("two-row step needs distinct rows, got {} twice", rows[0])));
    }
    Ok(())
}

/// `x + ((b_i - a_i x) / ||a_i||^2) a_i^*`.
pub fn single_row_update(op: &RowOperator, b: &[Scalar], x: &[Scalar], i: usize) -> Result<Vec<Scalar>> {
    check_step_args(op, b, x, &[i])?;
    let mut next = x.to_vec();
    single_coeffs(op, b, x, i).apply(op, &mut next);
    Ok(next)
}

/// Projects `x` onto `{a_i x = b_i} ∩ {a_j x = b_j}`. The flag reports a
/// single-row fallback on `i` for (near-)parallel rows.
pub fn project_two_rows(
    op: &RowOperator,
    b: &[Scalar],
    x: &[Scalar],
    i: usize,
    j: usize,
    parallel_tol: f64,
) -> Result<(Vec<Scalar>, bool)> {
    check_step_args(op, b, x, &[i, j])?;
    let update = two_row_coeffs(op, b, x, i, j, parallel_tol)?;
    let mut next = x.to_vec();
    update.apply(op, &mut next);
    Ok((next, matches!(update, Update::Single { .. })))
}

pub fn gtrk_update(
    op: &RowOperator,
    b: &[Scalar],
    x: &[Scalar],
    i: usize,
    j: usize,
    parallel_tol: f64,
) -> Result<Vec<Scalar>> {
    check_step_args(op, b, x, &[i, j])?;
    let mut next = x.to_vec();
    gtrk_coeffs(op, b, x, i, j, parallel_tol)?.apply(op, &mut next);
    Ok(next)
}
