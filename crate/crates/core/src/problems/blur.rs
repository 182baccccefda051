//! Separable banded blur `A = A1 ⊗ A2` acting on column-stacked images.

use std::f64::consts::TAU;

use crate::{DenseMatrix, Error, KroneckerOperator, Result, Scalar};

#[derive(Debug, Clone)]
pub struct BlurModel {
    pub n: usize,
    pub r_band: usize,
    pub s_band: usize,
    pub sigma: f64,
    pub operator: KroneckerOperator,
}

/// `A1[i,j] = exp(-(i-j)^2 / (2 sigma^2)) / (sigma sqrt(2 pi))` for `|i-j| <= r`,
/// `A2[i,j] = 1 / (2s - 1)` for `|i-j| <= s`, both zero off the band.
pub fn build_blur(n: usize, r_band: usize, s_band: usize, sigma: f64) -> Result<BlurModel> {
    if n < 2 {
        return Err(Error::InvalidConfig(format!("image side must be at least 2, got {n}")));
    }
    if r_band >= n || s_band >= n {
        return Err(Error::InvalidConfig(format!("bands ({r_band}, {s_band}) must be below the side {n}")));
    }
    if s_band == 0 {
        return Err(Error::InvalidConfig("the averaging band s must be at least 1".into()));
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidConfig(format!("sigma must be positive, got {sigma}")));
    }
    let norm = 1.0 / (sigma * TAU.sqrt());
    let a1 = DenseMatrix::from_fn(n, n, |i, j| {
        let d = i.abs_diff(j);
        let v = if d <= r_band { norm * (-((d * d) as f64) / (2.0 * sigma * sigma)).exp() } else { 0.0 };
        Scalar::new(v, 0.0)
    })?;
    let avg = 1.0 / (2 * s_band - 1) as f64;
    let a2 = DenseMatrix::from_fn(n, n, |i, j| Scalar::new(if i.abs_diff(j) <= s_band { avg } else { 0.0 }, 0.0))?;
    Ok(BlurModel { n, r_band, s_band, sigma, operator: KroneckerOperator::new(a1, a2)? })
}
