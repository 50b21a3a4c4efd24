//! Matérn covariance function and Gaussian-process path sampling.

use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;
use statrs::function::gamma::gamma;

use super::bessel::bessel_k;
use crate::error::{Error, Result};
use crate::hilbert::{Grid, HilbertPoint, Sample};
use crate::rng::{stream_rng, tag};

/// Matérn covariance parameters: smoothness ν, range ρ, scale σ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaternSpec {
    pub nu: f64,
    pub rho: f64,
    pub sigma: f64,
}

impl Default for MaternSpec {
    fn default() -> Self {
        Self {
            nu: 1.0,
            rho: 1.0,
            sigma: 1.0,
        }
    }
}

impl MaternSpec {
    pub fn validate(&self) -> Result<()> {
        if self.nu <= 0.0 || self.rho <= 0.0 || self.sigma <= 0.0 {
            return Err(Error::Domain(format!(
                "Matérn parameters must be positive: nu={}, rho={}, sigma={}",
                self.nu, self.rho, self.sigma
            )));
        }
        Ok(())
    }
}

/// C(s, t) = σ²·2^{1−ν}/Γ(ν)·(√(2ν)|s−t|/ρ)^ν·K_ν(√(2ν)|s−t|/ρ),
/// with the continuity limit σ² at s = t.
pub fn matern_cov(s: f64, t: f64, spec: &MaternSpec) -> f64 {
    let d = (s - t).abs();
    let sigma2 = spec.sigma * spec.sigma;
    if d <= 1e-10 * spec.rho {
        return sigma2;
    }
    let arg = (2.0 * spec.nu).sqrt() * d / spec.rho;
    sigma2 * 2f64.powf(1.0 - spec.nu) / gamma(spec.nu) * arg.powf(spec.nu) * bessel_k(spec.nu, arg)
}

/// Draw `n` centered Gaussian paths on `grid` with Matérn covariance.
///
/// The covariance matrix is factorized by symmetric eigendecomposition with
/// negative eigenvalues clipped at zero; path i is generated from the stream
/// `(seed, [GP_PATH, i])`.
pub fn sample_gp(grid: &Arc<Grid>, spec: &MaternSpec, n: usize, seed: u64) -> Result<Sample> {
    spec.validate()?;
    if n == 0 {
        return Err(Error::Domain("need at least one path".into()));
    }
    let factor = gp_factor(grid, spec)?;
    let m = grid.len();
    let elements: Vec<HilbertPoint> = (0..n)
        .map(|i| {
            let mut rng = stream_rng(seed, &[tag::GP_PATH, i as u64]);
            let z = nalgebra::DVector::from_iterator(m, (0..m).map(|_| rng.sample::<f64, _>(StandardNormal)));
            let values = (&factor * z).iter().copied().collect();
            HilbertPoint::functional(grid.clone(), values).expect("grid lengths match")
        })
        .collect();
    Sample::new(elements)
}

/// Symmetric PSD factor of the Matérn covariance matrix on `grid`.
pub(crate) fn gp_factor(grid: &Arc<Grid>, spec: &MaternSpec) -> Result<DMatrix<f64>> {
    let m = grid.len();
    let pts = grid.points();
    let mut cov = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in i..m {
            let v = matern_cov(pts[i], pts[j], spec);
            cov[(i, j)] = v;
            cov[(j, i)] = v;
        }
    }
    let eig = SymmetricEigen::new(cov);
    let lambda_max = eig.eigenvalues.iter().fold(0.0f64, |a, &b| a.max(b));
    let lambda_min = eig.eigenvalues.iter().fold(0.0f64, |a, &b| a.min(b));
    if lambda_min < -1e-8 * lambda_max.max(1.0) {
        return Err(Error::Numerical(format!(
            "covariance matrix is indefinite: eigenvalue {lambda_min}"
        )));
    }
    let mut factor = eig.eigenvectors;
    for (c, &lambda) in eig.eigenvalues.iter().enumerate() {
        factor.column_mut(c).scale_mut(lambda.max(0.0).sqrt());
    }
    Ok(factor)
}
