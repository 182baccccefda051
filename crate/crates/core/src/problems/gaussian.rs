//! Dense systems with independent standard normal entries.

use crate::sampling::Rng;
use crate::solvers::LinearSystem;
use crate::{DenseMatrix, Error, Result, Scalar};

/// Real `m x n` Gaussian matrix, Gaussian `x_star`, `b = A x_star`.
pub fn gen_gaussian(m: usize, n: usize, rng: &mut Rng) -> Result<LinearSystem> {
    if m < 2 || n < 2 {
        return Err(Error::InvalidConfig(format!("Gaussian systems need m, n >= 2, got {m} x {n}")));
    }
    let a = DenseMatrix::from_fn(m, n, |_, _| Scalar::new(rng.normal(), 0.0))?;
    let x_star: Vec<Scalar> = (0..n).map(|_| Scalar::new(rng.normal(), 0.0)).collect();
    let b = a.values().chunks(n).map(|row| row.iter().zip(&x_star).map(|(a, x)| a * x).sum()).collect();
    LinearSystem::new(a, b, Some(x_star))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_and_consistency() {
        let sys = gen_gaussian(30, 7, &mut Rng::new(0)).unwrap();
        assert_eq!((sys.op.rows(), sys.op.cols()), (30, 7));
        let b_norm = sys.b.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        assert!(sys.residual_norm(sys.x_star.as_ref().unwrap()).unwrap() <= 1e-10 * b_norm);
        assert!(sys.b.iter().all(|v| v.im == 0.0));
        assert!(gen_gaussian(1, 5, &mut Rng::new(0)).is_err());
    }

    #[test]
    fn column_moments() {
        let m = 10_000;
        let sys = gen_gaussian(m, 3, &mut Rng::new(9)).unwrap();
        let dense = sys.op.to_dense().unwrap();
        for j in 0..3 {
            let col: Vec<f64> = (0..m).map(|i| dense.get(i, j).re).collect();
            let mean = col.iter().sum::<f64>() / m as f64;
            let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / m as f64;
            let bound = 5.0 / (m as f64).sqrt();
            assert!(mean.abs() < bound && (var - 1.0).abs() < bound, "{mean} {var}");
        }
    }

    #[test]
    fn seeded_draws_repeat() {
        let a = gen_gaussian(5, 4, &mut Rng::new(7)).unwrap();
        let b = gen_gaussian(5, 4, &mut Rng::new(7)).unwrap();
        assert_eq!(a.b, b.b);
    }
}
