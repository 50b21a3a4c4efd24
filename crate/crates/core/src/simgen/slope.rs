//! Slope operators of the three simulation families, in four sparsity
//! variants each, applied by quadrature.

use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::fourier::fourier_basis;
use crate::error::{Error, Result};
use crate::hilbert::{Grid, HilbertPoint};

/// Which functional linear model is being simulated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    ScalarOnFunction,
    FunctionOnFunction,
    FunctionOnVector,
}

impl Family {
    pub const ALL: [Family; 3] = [
        Family::ScalarOnFunction,
        Family::FunctionOnFunction,
        Family::FunctionOnVector,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Family::ScalarOnFunction => "scalar_on_function",
            Family::FunctionOnFunction => "function_on_function",
            Family::FunctionOnVector => "function_on_vector",
        }
    }
}

/// Spectral sparsity of the slope.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SlopeVariant {
    Sparsest,
    Sparse,
    Dense,
    Densest,
}

impl SlopeVariant {
    pub const ALL: [SlopeVariant; 4] = [
        SlopeVariant::Sparsest,
        SlopeVariant::Sparse,
        SlopeVariant::Dense,
        SlopeVariant::Densest,
    ];
}

/// A slope operator description: family, variant, signal strength r,
/// truncation of the dense sums, and the predictor dimension q for the
/// function-on-vector family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeSpec {
    pub family: Family,
    pub variant: SlopeVariant,
    pub r: f64,
    pub k_trunc: usize,
    pub q: usize,
}

impl SlopeSpec {
    pub fn new(family: Family, variant: SlopeVariant, r: f64) -> Self {
        Self {
            family,
            variant,
            r,
            k_trunc: 100,
            q: 5,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.r < 0.0 {
            return Err(Error::Domain(format!("signal strength r must be ≥ 0, got {}", self.r)));
        }
        if self.k_trunc == 0 {
            return Err(Error::Domain("k_trunc must be at least 1".into()));
        }
        if self.q == 0 {
            return Err(Error::Domain("q must be at least 1".into()));
        }
        Ok(())
    }
}

/// Σ_{j=1}^{terms} (j+2)^{−decay}·φ_j(u).
fn fourier_sum(terms: usize, decay: f64, u: f64) -> f64 {
    (1..=terms)
        .map(|j| (j as f64 + 2.0).powf(-decay) * fourier_basis(j, u))
        .sum()
}

/// g(t) for the scalar-on-function family.
fn g_scalar_on_function(variant: SlopeVariant, k_trunc: usize, t: f64) -> f64 {
    match variant {
        SlopeVariant::Sparsest => 1.0,
        SlopeVariant::Sparse => 11.0 / 4.0 * fourier_sum(3, 1.0, t),
        SlopeVariant::Dense => 12.0 / 4.0 * fourier_sum(k_trunc, 1.0, t),
        SlopeVariant::Densest => 6.0 / 4.0 * t * t * t.exp(),
    }
}

/// g(s, t) for the function-on-function family.
fn g_function_on_function(variant: SlopeVariant, k_trunc: usize, s: f64, t: f64) -> f64 {
    match variant {
        SlopeVariant::Sparsest => 5.0 / 7.0,
        SlopeVariant::Sparse => 10.0 / 4.0 * fourier_sum(3, 1.2, s) * fourier_sum(3, 1.2, t),
        SlopeVariant::Dense => {
            9.0 / 4.0 * fourier_sum(k_trunc, 1.2, s) * fourier_sum(k_trunc, 1.2, t)
        }
        SlopeVariant::Densest => 10.0 / 4.0 * (s * t).powi(2) * ((s + t) / 4.0).exp(),
    }
}

/// The j-th component function g^j(t) (1-based j) for the function-on-vector
/// family; the component enters through its position u = (j−1)/(q−1).
fn g_function_on_vector(variant: SlopeVariant, k_trunc: usize, q: usize, j: usize, t: f64) -> f64 {
    let u = if q == 1 { 0.0 } else { (j - 1) as f64 / (q - 1) as f64 };
    match variant {
        SlopeVariant::Sparsest => 11.0 / 10.0,
        SlopeVariant::Sparse => 11.0 / 4.0 * fourier_sum(3, 1.2, u) * fourier_sum(3, 1.2, t),
        SlopeVariant::Dense => {
            6.0 / 4.0 * fourier_sum(k_trunc, 1.2, u) * fourier_sum(k_trunc, 1.2, t)
        }
        SlopeVariant::Densest => {
            11.0 / 4.0 * u * u * (u / 8.0).exp() * t * t * (t / 8.0).exp()
        }
    }
}

/// A slope with its kernel pre-evaluated on concrete grids.
pub(crate) struct SlopeOperator {
    spec: SlopeSpec,
    kind: OperatorKind,
}

enum OperatorKind {
    /// g on the input grid; output is a scalar.
    Scalar { g: Vec<f64>, in_grid: Arc<Grid> },
    /// g(s_k, t_l) with rows indexed by the input grid and columns by the
    /// output grid.
    Bivariate {
        g: DMatrix<f64>,
        in_grid: Arc<Grid>,
        out_grid: Arc<Grid>,
    },
    /// g^j(t_l) per vector component, on the output grid.
    VectorCoef { g: Vec<Vec<f64>>, out_grid: Arc<Grid> },
}

impl SlopeOperator {
    /// Build the operator for the given input grid (functional families) or
    /// output grid (function-on-vector).
    pub(crate) fn new(spec: &SlopeSpec, grid: &Arc<Grid>) -> Result<Self> {
        spec.validate()?;
        let kind = match spec.family {
            Family::ScalarOnFunction => OperatorKind::Scalar {
                g: grid
                    .points()
                    .iter()
                    .map(|&t| g_scalar_on_function(spec.variant, spec.k_trunc, t))
                    .collect(),
                in_grid: grid.clone(),
            },
            Family::FunctionOnFunction => {
                let m = grid.len();
                let pts = grid.points();
                let g = DMatrix::from_fn(m, m, |k, l| {
                    g_function_on_function(spec.variant, spec.k_trunc, pts[k], pts[l])
                });
                OperatorKind::Bivariate {
                    g,
                    in_grid: grid.clone(),
                    out_grid: grid.clone(),
                }
            }
            Family::FunctionOnVector => OperatorKind::VectorCoef {
                g: (1..=spec.q)
                    .map(|j| {
                        grid.points()
                            .iter()
                            .map(|&t| g_function_on_vector(spec.variant, spec.k_trunc, spec.q, j, t))
                            .collect()
                    })
                    .collect(),
                out_grid: grid.clone(),
            },
        };
        Ok(Self { spec: *spec, kind })
    }

    /// r · (g applied to x).
    pub(crate) fn apply(&self, x: &HilbertPoint) -> Result<HilbertPoint> {
        let r = self.spec.r;
        match &self.kind {
            OperatorKind::Scalar { g, in_grid } => {
                let xv = functional_values(x, in_grid)?;
                let w = in_grid.weights();
                let mut acc = 0.0;
                for k in 0..w.len() {
                    acc += w[k] * g[k] * xv[k];
                }
                HilbertPoint::scalar(vec![r * acc])
            }
            OperatorKind::Bivariate { g, in_grid, out_grid } => {
                let xv = functional_values(x, in_grid)?;
                let w = in_grid.weights();
                let mut out = vec![0.0; out_grid.len()];
                for (l, o) in out.iter_mut().enumerate() {
                    let mut acc = 0.0;
                    for k in 0..w.len() {
                        acc += w[k] * g[(k, l)] * xv[k];
                    }
                    *o = r * acc;
                }
                HilbertPoint::functional(out_grid.clone(), out)
            }
            OperatorKind::VectorCoef { g, out_grid } => {
                if !x.functional_parts().is_empty() || x.scalar_part().len() != self.spec.q {
                    return Err(Error::Domain(format!(
                        "function-on-vector slope expects a length-{} vector",
                        self.spec.q
                    )));
                }
                let mut out = vec![0.0; out_grid.len()];
                for (j, coef) in g.iter().enumerate() {
                    let xj = x.scalar_part()[j];
                    for (o, c) in out.iter_mut().zip(coef) {
                        *o += xj * c;
                    }
                }
                for o in &mut out {
                    *o *= r;
                }
                HilbertPoint::functional(out_grid.clone(), out)
            }
        }
    }
}

fn functional_values<'a>(x: &'a HilbertPoint, grid: &Arc<Grid>) -> Result<&'a [f64]> {
    if x.functional_parts().len() != 1 || !x.scalar_part().is_empty() {
        return Err(Error::Domain(
            "slope expects a point with exactly one functional component".into(),
        ));
    }
    let part = &x.functional_parts()[0];
    if part.grid().as_ref() != grid.as_ref() {
        return Err(Error::Conformability("point grid differs from slope grid".into()));
    }
    Ok(part.values())
}

/// Apply the slope described by `spec` to `x`. Functional inputs supply the
/// quadrature grid; the function-on-vector output is produced on the default
/// 101-point unit grid (use [`apply_slope_on_grid`] to control it).
pub fn apply_slope(spec: &SlopeSpec, x: &HilbertPoint) -> Result<HilbertPoint> {
    let grid = match spec.family {
        Family::ScalarOnFunction | Family::FunctionOnFunction => {
            if x.functional_parts().len() != 1 {
                return Err(Error::Domain(
                    "slope expects a point with exactly one functional component".into(),
                ));
            }
            x.functional_parts()[0].grid().clone()
        }
        Family::FunctionOnVector => Grid::default_unit(101)?,
    };
    apply_slope_on_grid(spec, x, &grid)
}

/// Apply the slope with an explicit grid choice.
pub fn apply_slope_on_grid(spec: &SlopeSpec, x: &HilbertPoint, grid: &Arc<Grid>) -> Result<HilbertPoint> {
    SlopeOperator::new(spec, grid)?.apply(x)
}
