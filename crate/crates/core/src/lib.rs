//! Bootstrap max-statistic hypothesis tests for functional linear models.
//!
//! The crate tests whether the slope operator of a functional linear model is
//! null, covering scalar-on-function, function-on-function, function-on-vector
//! and mixed-predictor designs with one engine: observations are projected
//! onto (empirical or fixed) orthonormal bases, the cross-score vectors are
//! reduced to partially standardized max/min statistics, and a Gaussian
//! bootstrap supplies critical values and simultaneous confidence intervals.
//! Simulation generators and a Monte Carlo harness reproduce the reference
//! size/power studies at desk scale.

pub mod error;
pub mod fpca;
pub mod harness;
pub mod hilbert;
pub mod io;
pub mod maxtest;
mod numeric;
pub mod profile;
pub mod rng;
pub mod simgen;
pub mod tauselect;

pub use error::{Error, Result};
pub use fpca::{alignment_report, empirical_eigensystem, project_scores, AlignmentReport, EigenSystem};
pub use harness::{read_results, run_study, write_results, PowerRow, PowerTable, StudyConfig};
pub use hilbert::{Grid, HilbertPoint, Sample};
pub use io::{
    read_functional_csv, read_ragged_csv, read_sample_json, read_scalar_csv,
    write_functional_csv, write_sample_json, write_scalar_csv, SampleDoc,
};
pub use maxtest::{
    bootstrap_quantiles, cross_scores, decide, empirical_quantiles, max_min_statistics, run_test,
    simultaneous_intervals, summarize, BasisChoice, BootstrapQuantiles, CrossScoreMatrix,
    Decision, Summary, TestConfig, TestResult,
};
pub use profile::{
    activity_profile, profiles_to_sample, threshold_grid, ActivityProfile, ActivityTrajectory,
};
pub use simgen::{
    apply_slope, apply_slope_on_grid, bessel_k, fourier_basis, fourier_point, fourier_system,
    generate_dataset, laplace_quantile, matern_cov, predictor_mixing_matrix, sample_gp,
    sample_laplace, DatasetSpec, Family, MaternSpec, NoiseKind, NoiseSpec, SlopeSpec,
    SlopeVariant,
};
pub use tauselect::{select_tau, TauPolicy};
