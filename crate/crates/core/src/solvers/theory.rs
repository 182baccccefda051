//! Ingredients and values of the expected-error contraction bounds.

use crate::operators::{RowOperator, DEFAULT_SPECTRUM_CAP};
use crate::Result;

/// A contraction factor. `vacuous` marks values that promise no decrease
/// (`>= 1`) or rest on a negative base (`sqrt(lambda_min) < rho`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Factor {
    pub value: f64,
    pub vacuous: bool,
}

impl Factor {
    fn new(value: f64, negative_base: bool) -> Self {
        Self { value, vacuous: negative_base || !(value < 1.0) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TheoryFactors {
    pub frobenius: f64,
    pub spectral_norm: f64,
    /// `||AA^*||_F`.
    pub gram_frobenius: f64,
    pub l21: f64,
    /// Smallest nonzero eigenvalue of `A^*A`.
    pub lambda_min: f64,
    /// `max_{i0} sum_{i != i0} ||a_i|| = ||A||_{2,1} - min_i ||a_i||`.
    pub omega: f64,
    /// `max_i ||a_i||`.
    pub rho_max: f64,
    /// `1 - lambda_min / ||A||_F^2`.
    pub rk: Factor,
    /// `1 - 2(||A||_F^4 - ||A||_F^2 ||A||_2^2) / (||A||_F^4 - ||AA^*||_F^2) * lambda_min / ||A||_F^2`.
    pub trk: Factor,
    /// First-step TGRK factor `1 - (sqrt(lambda_min) - rho)^2 / (||A||_{2,1} - rho)^2`.
    pub tgrk_first: Factor,
    /// Later-step TGRK factor
    /// `1 - [((sqrt(lambda_min) - rho)/(Omega - rho) + (sqrt(lambda_min) - rho)/(||A||_{2,1} - rho)) / 2]^2`.
    pub tgrk: Factor,
    /// `1 - (lambda_min - rho^2) / (Omega^2 - rho^2)`.
    pub tsrk: Factor,
    /// `||A||_F^4 + ||AA^*||_F^2 > 2 ||A||_F^2 ||A||_2^2`.
    pub trk_inequality_holds: bool,
}

impl TheoryFactors {
    pub fn trk_beats_rk(&self) -> bool {
        self.trk.value < self.rk.value
    }
}

/// Bound ingredients, with `rho` taken as the largest row norm.
pub fn theory_factors(op: &RowOperator) -> Result<TheoryFactors> {
    theory_factors_capped(op, DEFAULT_SPECTRUM_CAP)
}

pub fn theory_factors_capped(op: &RowOperator, cap: usize) -> Result<TheoryFactors> {
    let spectrum = op.gram_spectrum(cap)?;
    let gram_fro_sq = op.gram_frobenius_sq(cap)?;
    let norms = op.norms();
    let fro_sq = op.frobenius_sq();
    let fro4 = fro_sq * fro_sq;
    let lambda_min = spectrum.lambda_min_nonzero;
    let spec_sq = spectrum.lambda_max;
    let rho = norms.row_norms.iter().copied().fold(0.0, f64::max);
    let min_row = norms.row_norms.iter().copied().fold(f64::INFINITY, f64::min);
    let omega = norms.l21 - min_row;

    let rk = Factor::new(1.0 - lambda_min / fro_sq, false);
    let trk_gain = 2.0 * (fro4 - fro_sq * spec_sq) / (fro4 - gram_fro_sq);
    let trk = Factor::new(1.0 - trk_gain * lambda_min / fro_sq, false);

    let base = lambda_min.sqrt() - rho;
    let negative = base < 0.0;
    let tgrk_first = Factor::new(1.0 - (base / (norms.l21 - rho)).powi(2), negative);
    let blend = 0.5 * (base / (omega - rho) + base / (norms.l21 - rho));
    let tgrk = Factor::new(1.0 - blend * blend, negative);
    let tsrk = Factor::new(1.0 - (lambda_min - rho * rho) / (omega * omega - rho * rho), lambda_min < rho * rho);

    Ok(TheoryFactors {
        frobenius: fro_sq.sqrt(),
        spectral_norm: spec_sq.sqrt(),
        gram_frobenius: gram_fro_sq.sqrt(),
        l21: norms.l21,
        lambda_min,
        omega,
        rho_max: rho,
        rk,
        trk,
        tgrk_first,
        tgrk,
        tsrk,
        trk_inequality_holds: fro4 + gram_fro_sq > 2.0 * fro_sq * spec_sq,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::Rng;
    use crate::{DenseMatrix, Scalar};

    #[test]
    fn identity_factors() {
        for n in [4usize, 10, 25] {
            let op: RowOperator = DenseMatrix::identity(n).into();
            let f = theory_factors(&op).unwrap();
            let nf = n as f64;
            assert!((f.lambda_min - 1.0).abs() < 1e-14);
            assert!((f.rk.value - (1.0 - 1.0 / nf)).abs() < 1e-14);
            assert!((f.trk.value - (1.0 - 2.0 / nf)).abs() < 1e-14);
            assert!(f.trk_beats_rk());
            assert!((f.gram_frobenius.powi(2) - nf).abs() < 1e-12);
            // sqrt(lambda_min) = rho: the greedy two-row bounds give no decrease.
            assert_eq!(f.tsrk.value, 1.0);
            assert!(f.tsrk.vacuous);
        }
    }

    #[test]
    fn diagonal_omega_and_rho() {
        let op: RowOperator = DenseMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, 2.0]).unwrap().into();
        let f = theory_factors(&op).unwrap();
        assert_eq!(f.omega, 2.0);
        assert_eq!(f.rho_max, 2.0);
    }

    #[test]
    fn gaussian_factors_in_unit_interval() {
        let mut rng = Rng::new(3);
        let op: RowOperator = DenseMatrix::from_fn(50, 20, |_, _| Scalar::new(rng.normal(), 0.0)).unwrap().into();
        let f = theory_factors(&op).unwrap();
        for factor in [f.rk, f.trk] {
            assert!((0.0..1.0).contains(&factor.value) && !factor.vacuous);
        }
        assert!(f.trk_beats_rk());
        assert!(f.trk_inequality_holds);
    }

    #[test]
    fn rank_deficient_uses_nonzero_eigenvalue() {
        let op: RowOperator =
            DenseMatrix::from_real(3, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 1.0, 1.0, 0.0]).unwrap().into();
        let f = theory_factors(&op).unwrap();
        assert!((f.lambda_min - 1.0).abs() < 1e-12);
        for factor in [f.rk, f.trk] {
            assert!((0.0..1.0).contains(&factor.value));
        }
    }
}
