//! Simulation generators: Matérn Gaussian-process predictors, the Fourier
//! system, Laplace noise, slope operators in four sparsity variants per
//! family, and dataset assembly Y = 1 + β(X) + Z.
//!
//! All generators are pure functions of their specification and a seed.

mod bessel;
mod dataset;
mod fourier;
mod laplace;
mod matern;
mod slope;

pub use bessel::bessel_k;
pub use dataset::{generate_dataset, predictor_mixing_matrix, DatasetSpec, NoiseKind, NoiseSpec};
pub use fourier::{fourier_basis, fourier_point, fourier_system};
pub use laplace::{laplace_quantile, sample_laplace};
pub use matern::{matern_cov, sample_gp, MaternSpec};
pub use slope::{apply_slope, apply_slope_on_grid, Family, SlopeSpec, SlopeVariant};
