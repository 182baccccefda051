//! Restoration quality: PSNR, global SSIM and relative error norm.

use crate::{Error, Result};

/// Dynamic range of 8-bit pixels.
pub const PIXEL_RANGE: f64 = 255.0;

fn check(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch { expected: a.len(), got: b.len() });
    }
    if a.is_empty() {
        return Err(Error::InvalidStructure("empty image".into()));
    }
    Ok(())
}

/// `10 log10(N d^2 / ||x - x_k||^2)` with `d = 255`; `+inf` for identical inputs.
pub fn psnr(x_ref: &[f64], x_k: &[f64]) -> Result<f64> {
    check(x_ref, x_k)?;
    let err: f64 = x_ref.iter().zip(x_k).map(|(a, b)| (a - b).powi(2)).sum();
    if err == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (x_ref.len() as f64 * PIXEL_RANGE * PIXEL_RANGE / err).log10())
}

/// Single-window SSIM over the whole image with population moments.
pub fn ssim(x_ref: &[f64], x_k: &[f64]) -> Result<f64> {
    check(x_ref, x_k)?;
    if x_ref == x_k {
        return Ok(1.0);
    }
    let n = x_ref.len() as f64;
    let (mx, my) = (x_ref.iter().sum::<f64>() / n, x_k.iter().sum::<f64>() / n);
    let (mut vx, mut vy, mut cov) = (0.0, 0.0, 0.0);
    for (a, b) in x_ref.iter().zip(x_k) {
        vx += (a - mx).powi(2);
        vy += (b - my).powi(2);
        cov += (a - mx) * (b - my);
    }
    let (vx, vy, cov) = (vx / n, vy / n, cov / n);
    let c1 = (0.01 * PIXEL_RANGE).powi(2);
    let c2 = (0.03 * PIXEL_RANGE).powi(2);
    Ok((2.0 * mx * my + c1) * (2.0 * cov + c2) / ((mx * mx + my * my + c1) * (vx + vy + c2)))
}

/// `||x - x_k|| / ||x||`.
pub fn error_norm(x_ref: &[f64], x_k: &[f64]) -> Result<f64> {
    check(x_ref, x_k)?;
    let err: f64 = x_ref.iter().zip(x_k).map(|(a, b)| (a - b).powi(2)).sum();
    let norm: f64 = x_ref.iter().map(|a| a * a).sum();
    if err == 0.0 {
        return Ok(0.0);
    }
    Ok((err / norm).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn image(seed: u64, n: usize) -> Vec<f64> {
        let mut s = seed;
        (0..n)
            .map(|_| {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                (s >> 40) as f64 / (1u64 << 24) as f64 * 255.0
            })
            .collect()
    }

    #[test]
    fn identical_images() {
        let x = image(1, 100);
        assert_eq!(ssim(&x, &x).unwrap(), 1.0);
        assert_eq!(error_norm(&x, &x).unwrap(), 0.0);
        assert_eq!(psnr(&x, &x).unwrap(), f64::INFINITY);
    }

    #[test]
    fn psnr_of_uniform_offset() {
        let n = 64;
        let x = image(2, n);
        let offset = 255.0 / (n as f64).sqrt();
        let y: Vec<f64> = x.iter().map(|v| v + offset).collect();
        // Direct evaluation: N d^2 / (N offset^2) = N.
        let expected = 10.0 * (n as f64 * 255.0 * 255.0 / (n as f64 * offset * offset)).log10();
        assert!((psnr(&x, &y).unwrap() - expected).abs() < 1e-10);
        assert!((expected - 10.0 * (n as f64).log10()).abs() < 1e-10);
    }

    #[test]
    fn ssim_is_symmetric_and_bounded() {
        let (x, y) = (image(3, 200), image(4, 200));
        let (s1, s2) = (ssim(&x, &y).unwrap(), ssim(&y, &x).unwrap());
        assert!((s1 - s2).abs() < 1e-15);
        assert!(s1 < 1.0 && s1 > -1.0);
    }

    #[test]
    fn error_norm_scales() {
        let x = vec![3.0, 4.0];
        assert!((error_norm(&x, &[0.0, 0.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!(psnr(&x, &[1.0]).is_err());
    }
}
