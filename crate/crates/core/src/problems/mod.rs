//! Test-problem generators, file loaders and image-quality metrics.

mod blur;
mod gaussian;
mod image;
mod metrics;
mod mtx;
mod trigpoly;

pub use blur::{build_blur, BlurModel};
pub use gaussian::gen_gaussian;
pub use image::{phantom, GrayImage};
pub use metrics::{error_norm, psnr, ssim, PIXEL_RANGE};
pub use mtx::{load_matrix_market, read_matrix_market, write_matrix_market, MatrixMarket};
pub use trigpoly::{gen_trig_poly, trig_poly_from_points, TrigPolyProblem};
