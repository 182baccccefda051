//! One- and two-dimensional Kaczmarz row-action solvers for consistent
//! linear systems `A x = b` over the complex field.
//!
//! The crate is split into four layers:
//!
//! - [`operators`]: immutable row-access matrices (dense, CSR, and an
//!   implicit Kronecker product) with cached row norms.
//! - [`sampling`]: the seeded generator plus the discrete laws used for row
//!   and row-pair selection.
//! - [`solvers`]: the projection kernels, the per-method selection rules and
//!   the iteration driver.
//! - [`problems`]: generators and loaders for the benchmark families, and
//!   image quality metrics for the deblurring experiments.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod operators;
pub mod problems;
pub mod sampling;
pub mod solvers;

pub use error::{Error, Result};
pub use num_complex::Complex64 as Scalar;
pub use operators::{DenseMatrix, KroneckerOperator, RowOperator, SparseRowMatrix};
pub use sampling::Rng;
pub use solvers::{solve, LinearSystem, Method, SolveReport, SolverConfig, StopRule};
