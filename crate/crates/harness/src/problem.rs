//! Turns a [`ProblemSpec`] into a linear system.

use std::path::Path;

use anyhow::{ensure, Context, Result};
use kaczmarz_core::problems::{build_blur, gen_gaussian, gen_trig_poly, load_matrix_market, phantom, GrayImage};
use kaczmarz_core::{DenseMatrix, LinearSystem, Rng, RowOperator, Scalar};

use crate::spec::ProblemSpec;

/// A blurred image together with its sharp reference.
pub struct DeblurProblem {
    pub reference: GrayImage,
    pub system: LinearSystem,
}

pub fn build_system(problem: &ProblemSpec, seed: u64) -> Result<LinearSystem> {
    let mut rng = Rng::new(seed);
    match problem {
        ProblemSpec::Trigpoly { m, r } => Ok(gen_trig_poly(*m, *r, &mut rng)?.system),
        ProblemSpec::Gaussian { m, n } => Ok(gen_gaussian(*m, *n, &mut rng)?),
        ProblemSpec::Identity { n } => with_random_solution(DenseMatrix::identity(*n).into(), &mut rng),
        ProblemSpec::Mtx { path } => {
            let op = load_matrix_market(path).with_context(|| format!("loading {}", path.display()))?;
            with_random_solution(op, &mut rng)
        }
        ProblemSpec::Deblur { image, size, r, s, sigma } => {
            Ok(build_deblur(image.as_deref(), *size, *r, *s, *sigma)?.system)
        }
    }
}

fn with_random_solution(op: RowOperator, rng: &mut Rng) -> Result<LinearSystem> {
    let xs: Vec<Scalar> = (0..op.cols()).map(|_| Scalar::new(rng.normal(), 0.0)).collect();
    let b = op.apply(&xs)?;
    Ok(LinearSystem::new(op, b, Some(xs))?)
}

pub fn build_deblur(image: Option<&Path>, size: usize, r: usize, s: usize, sigma: f64) -> Result<DeblurProblem> {
    let reference = match image {
        Some(p) => GrayImage::load(p).with_context(|| format!("loading {}", p.display()))?,
        None => phantom(size),
    };
    ensure!(
        reference.width() == reference.height(),
        "deblurring needs a square image, got {}x{}",
        reference.width(),
        reference.height()
    );
    let blur = build_blur(reference.width(), r, s, sigma)?;
    let xs: Vec<Scalar> = reference.to_column_stacked().into_iter().map(|v| Scalar::new(v, 0.0)).collect();
    let op: RowOperator = blur.operator.into();
    let b = op.apply(&xs)?;
    Ok(DeblurProblem { reference, system: LinearSystem::new(op, b, Some(xs))? })
}
