//! The Fourier orthonormal system on [0, 1] used throughout the simulation
//! designs: φ₁ ≡ 1, φ_{2m}(t) = √2·cos(2mπt), φ_{2m+1}(t) = √2·sin(2mπt).

use std::sync::Arc;

use crate::error::Result;
use crate::fpca::EigenSystem;
use crate::hilbert::{Grid, HilbertPoint};

/// Evaluate the j-th Fourier basis element (1-based) at t ∈ [0, 1].
pub fn fourier_basis(j: usize, t: f64) -> f64 {
    assert!(j >= 1, "basis index is 1-based");
    if j == 1 {
        return 1.0;
    }
    let m = (j / 2) as f64;
    let arg = 2.0 * m * std::f64::consts::PI * t;
    if j.is_multiple_of(2) {
        2f64.sqrt() * arg.cos()
    } else {
        2f64.sqrt() * arg.sin()
    }
}

/// The j-th Fourier element sampled on `grid`, rescaled so the system is
/// orthonormal on the grid's interval.
pub fn fourier_point(grid: &Arc<Grid>, j: usize) -> HilbertPoint {
    let a = grid.points()[0];
    let span = grid.span();
    let norm = 1.0 / span.sqrt();
    let values = grid
        .points()
        .iter()
        .map(|&t| norm * fourier_basis(j, (t - a) / span))
        .collect();
    HilbertPoint::functional(grid.clone(), values).expect("grid lengths match")
}

/// The first `count` Fourier elements on `grid` as a fixed basis.
/// Fails if the grid is too coarse for the requested frequencies to stay
/// orthonormal under quadrature.
pub fn fourier_system(grid: &Arc<Grid>, count: usize) -> Result<EigenSystem> {
    EigenSystem::fixed((1..=count).map(|j| fourier_point(grid, j)).collect())
}
