//! Nonuniform samples of a trigonometric polynomial.

use std::f64::consts::TAU;

use crate::sampling::Rng;
use crate::solvers::LinearSystem;
use crate::{DenseMatrix, Error, Result, Scalar};

#[derive(Debug, Clone)]
pub struct TrigPolyProblem {
    pub m: usize,
    /// Bandwidth; the system has `2r + 1` columns.
    pub r: usize,
    /// Sorted sample points in `[0, 1)`.
    pub t: Vec<f64>,
    pub w: Vec<f64>,
    pub system: LinearSystem,
}

/// `w_j = (t_{j+1} - t_{j-1}) / 2` with the points extended periodically.
fn density_weights(t: &[f64]) -> Vec<f64> {
    let m = t.len();
    (0..m)
        .map(|j| {
            let next = if j + 1 < m { t[j + 1] } else { t[0] + 1.0 };
            let prev = if j > 0 { t[j - 1] } else { t[m - 1] - 1.0 };
            0.5 * (next - prev)
        })
        .collect()
}

/// Builds the weighted Fourier system `A[j,k] = sqrt(w_j) exp(2 pi i k t_j)`,
/// `k = -r..=r`, with `b = A x_star`.
pub fn trig_poly_from_points(t: Vec<f64>, r: usize, x_star: Vec<Scalar>) -> Result<TrigPolyProblem> {
    let m = t.len();
    let n = 2 * r + 1;
    if m <= n {
        return Err(Error::InvalidConfig(format!("need more samples than unknowns: m = {m}, n = {n}")));
    }
    if x_star.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: x_star.len() });
    }
    if t.windows(2).any(|p| !(p[0] < p[1])) || t[0] < 0.0 || t[m - 1] >= 1.0 {
        return Err(Error::InvalidConfig("sample points must be strictly increasing in [0, 1)".into()));
    }
    let w = density_weights(&t);
    let a = DenseMatrix::from_fn(m, n, |j, col| {
        let k = col as f64 - r as f64;
        Scalar::from_polar(w[j].sqrt(), TAU * k * t[j])
    })?;
    let b = a.values().chunks(n).map(|row| row.iter().zip(&x_star).map(|(a, x)| a * x).sum()).collect();
    let system = LinearSystem::new(a, b, Some(x_star))?;
    Ok(TrigPolyProblem { m, r, t, w, system })
}

/// Uniform random samples, standard complex Gaussian coefficients.
pub fn gen_trig_poly(m: usize, r: usize, rng: &mut Rng) -> Result<TrigPolyProblem> {
    let t = loop {
        let mut t: Vec<f64> = (0..m).map(|_| rng.next_f64()).collect();
        t.sort_by(f64::total_cmp);
        if t.windows(2).all(|p| p[0] < p[1]) {
            break t;
        }
    };
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let x_star = (0..2 * r + 1).map(|_| Scalar::new(scale * rng.normal(), scale * rng.normal())).collect();
    trig_poly_from_points(t, r, x_star)
}
