//! Dataset assembly: predictors, noise and responses Y = 1 + β(X) + Z for
//! the three simulation families.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::laplace::laplace_draw;
use super::matern::{sample_gp, MaternSpec};
use super::slope::{Family, SlopeOperator, SlopeSpec};
use crate::error::{Error, Result};
use crate::hilbert::{Grid, HilbertPoint, Sample};
use crate::rng::{derive_seed, stream_rng, tag};
use crate::simgen::fourier_point;

/// Noise model: a single unit-variance Laplace draw per observation, or a
/// truncated functional expansion with Laplace coefficients of variance
/// λ_j = j^{−decay}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    ScalarLaplace,
    FunctionalLaplace,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    pub k_terms: usize,
    pub decay: f64,
}

impl NoiseSpec {
    pub fn scalar() -> Self {
        Self {
            kind: NoiseKind::ScalarLaplace,
            k_terms: 50,
            decay: 1.5,
        }
    }

    pub fn functional() -> Self {
        Self {
            kind: NoiseKind::FunctionalLaplace,
            k_terms: 50,
            decay: 1.5,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k_terms == 0 {
            return Err(Error::Domain("noise needs at least one expansion term".into()));
        }
        if self.decay <= 1.0 {
            return Err(Error::Domain(format!(
                "noise eigenvalue decay must exceed 1, got {}",
                self.decay
            )));
        }
        Ok(())
    }
}

/// Eigenvalue decay of the function-on-vector predictor covariance Σ = A·D·Aᵀ.
const PREDICTOR_DECAY: f64 = 1.5;

/// Complete description of one simulated dataset family.
#[derive(Debug, Clone)]
pub struct DatasetSpec {
    pub slope: SlopeSpec,
    pub noise: NoiseSpec,
    pub grid: Arc<Grid>,
    pub matern: MaternSpec,
    /// Seed of design-level randomness that stays fixed across replicates
    /// (the orthogonal mixing matrix of the vector predictor).
    pub design_seed: u64,
}

impl DatasetSpec {
    /// Family defaults: Matérn(1, 1, 1) predictors, the reference noise for
    /// the family, a 101-point unit grid.
    pub fn standard(slope: SlopeSpec, design_seed: u64) -> Result<Self> {
        let noise = match slope.family {
            Family::ScalarOnFunction => NoiseSpec::scalar(),
            _ => NoiseSpec::functional(),
        };
        Ok(Self {
            slope,
            noise,
            grid: Grid::default_unit(101)?,
            matern: MaternSpec::default(),
            design_seed,
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.slope.validate()?;
        self.noise.validate()?;
        self.matern.validate()?;
        let expected = match self.slope.family {
            Family::ScalarOnFunction => NoiseKind::ScalarLaplace,
            Family::FunctionOnFunction | Family::FunctionOnVector => NoiseKind::FunctionalLaplace,
        };
        if self.noise.kind != expected {
            return Err(Error::Domain(format!(
                "noise kind {:?} is inconsistent with family {:?}",
                self.noise.kind, self.slope.family
            )));
        }
        Ok(())
    }
}

/// The orthogonal mixing matrix of the vector predictor: the Q factor of a
/// seeded q×q Gaussian matrix (sign-normalized), fixed for a given design
/// seed.
pub fn predictor_mixing_matrix(design_seed: u64, q: usize) -> DMatrix<f64> {
    let mut rng = stream_rng(design_seed, &[tag::DESIGN_MATRIX]);
    let raw = DMatrix::from_fn(q, q, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = raw.qr();
    let mut qmat = qr.q();
    let rmat = qr.r();
    for c in 0..q {
        if rmat[(c, c)] < 0.0 {
            qmat.column_mut(c).neg_mut();
        }
    }
    qmat
}

/// Symmetric square root of A·diag(j^{−decay})·Aᵀ.
fn predictor_cov_sqrt(design_seed: u64, q: usize) -> DMatrix<f64> {
    let a = predictor_mixing_matrix(design_seed, q);
    let d_sqrt = DVector::from_iterator(
        q,
        (1..=q).map(|j| (j as f64).powf(-PREDICTOR_DECAY).sqrt()),
    );
    let mut scaled = a.clone();
    for c in 0..q {
        scaled.column_mut(c).scale_mut(d_sqrt[c]);
    }
    scaled * a.transpose()
}

/// Generate `(X, Y)` with Y = 1 + r·g(X) + Z. Deterministic given `seed`;
/// design-level randomness is controlled by `spec.design_seed` alone.
pub fn generate_dataset(spec: &DatasetSpec, n: usize, seed: u64) -> Result<(Sample, Sample)> {
    spec.validate()?;
    if n == 0 {
        return Err(Error::Domain("need at least one observation".into()));
    }
    let grid = &spec.grid;
    let op = SlopeOperator::new(&spec.slope, grid)?;

    let x = match spec.slope.family {
        Family::ScalarOnFunction | Family::FunctionOnFunction => {
            sample_gp(grid, &spec.matern, n, derive_seed(seed, &[tag::PREDICTOR]))?
        }
        Family::FunctionOnVector => {
            let q = spec.slope.q;
            let sqrt_cov = predictor_cov_sqrt(spec.design_seed, q);
            let scale = 1.0 / 2f64.sqrt(); // unit-variance Laplace coordinates
            let elements: Vec<HilbertPoint> = (0..n)
                .map(|i| {
                    let mut rng = stream_rng(seed, &[tag::PREDICTOR, i as u64]);
                    let l = DVector::from_iterator(q, (0..q).map(|_| laplace_draw(&mut rng, scale)));
                    HilbertPoint::scalar((&sqrt_cov * l).iter().copied().collect())
                        .expect("q ≥ 1")
                })
                .collect();
            Sample::new(elements)?
        }
    };

    let y = match spec.noise.kind {
        NoiseKind::ScalarLaplace => {
            let scale = 1.0 / 2f64.sqrt();
            let elements: Vec<HilbertPoint> = (0..n)
                .map(|i| {
                    let mut rng = stream_rng(seed, &[tag::NOISE, i as u64]);
                    let z = laplace_draw(&mut rng, scale);
                    let signal = op.apply(x.element(i))?;
                    HilbertPoint::scalar(vec![1.0 + signal.scalar_part()[0] + z])
                })
                .collect::<Result<_>>()?;
            Sample::new(elements)?
        }
        NoiseKind::FunctionalLaplace => {
            let k = spec.noise.k_terms;
            let phis: Vec<HilbertPoint> = (1..=k).map(|j| fourier_point(grid, j)).collect();
            let scales: Vec<f64> = (1..=k)
                .map(|j| ((j as f64).powf(-spec.noise.decay) / 2.0).sqrt())
                .collect();
            let elements: Vec<HilbertPoint> = (0..n)
                .map(|i| {
                    let mut rng = stream_rng(seed, &[tag::NOISE, i as u64]);
                    let signal = op.apply(x.element(i))?;
                    let mut values: Vec<f64> = signal.functional_parts()[0]
                        .values()
                        .iter()
                        .map(|v| 1.0 + v)
                        .collect();
                    for (phi, &s) in phis.iter().zip(&scales) {
                        let eta = laplace_draw(&mut rng, s);
                        for (v, b) in values.iter_mut().zip(phi.functional_parts()[0].values()) {
                            *v += eta * b;
                        }
                    }
                    Ok(HilbertPoint::functional(grid.clone(), values).expect("grid lengths match"))
                })
                .collect::<Result<_>>()?;
            Sample::new(elements)?
        }
    };

    Ok((x, y))
}
