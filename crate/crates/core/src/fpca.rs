//! Empirical covariance eigensystems and basis-alignment diagnostics.
//!
//! Eigenpairs of the sample covariance operator are computed through the
//! n×n Gram matrix of the centered observations (the duality / snapshot
//! method), so the cost is O(n²·gridsize + n³) regardless of how fine the
//! grids are, and the eigenelements are orthonormal under the quadrature
//! inner product by construction.

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hilbert::{HilbertPoint, Sample};

/// Relative eigenvalue cutoff below which components count as numerical noise.
const RANK_CUTOFF_REL: f64 = 1e-12;

/// Eigenvalues and orthonormal eigenelements of a covariance operator,
/// sorted by non-increasing eigenvalue. Also used to carry fixed orthonormal
/// bases, in which case every "eigenvalue" is a unit placeholder.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    eigenvalues: Vec<f64>,
    eigenelements: Vec<HilbertPoint>,
}

impl EigenSystem {
    /// Number of retained components.
    pub fn count(&self) -> usize {
        self.eigenelements.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenelements(&self) -> &[HilbertPoint] {
        &self.eigenelements
    }

    pub fn element(&self, j: usize) -> &HilbertPoint {
        &self.eigenelements[j]
    }

    pub fn is_empty(&self) -> bool {
        self.eigenelements.is_empty()
    }

    /// Wrap a fixed orthonormal sequence (e.g. a Fourier system) so it can be
    /// used wherever an empirical eigensystem is accepted. Orthonormality is
    /// verified under the quadrature inner product; eigenvalues are set to 1.
    pub fn fixed(elements: Vec<HilbertPoint>) -> Result<Self> {
        for j in 0..elements.len() {
            for k in j..elements.len() {
                let ip = elements[j].inner_product(&elements[k])?;
                let target = if j == k { 1.0 } else { 0.0 };
                if (ip - target).abs() > 1e-6 {
                    return Err(Error::Domain(format!(
                        "fixed basis is not orthonormal: ⟨e{j}, e{k}⟩ = {ip}"
                    )));
                }
            }
        }
        Ok(Self {
            eigenvalues: vec![1.0; elements.len()],
            eigenelements: elements,
        })
    }

    pub(crate) fn from_parts(eigenvalues: Vec<f64>, eigenelements: Vec<HilbertPoint>) -> Self {
        Self {
            eigenvalues,
            eigenelements,
        }
    }
}

/// Fix the sign of an eigenelement: the coordinate of largest magnitude
/// (functional parts first, then scalars; ties resolved to the earliest
/// index) is made positive.
fn fix_sign(element: &mut HilbertPoint) {
    let count = element.coordinate_count();
    let mut best_idx = 0usize;
    let mut best_mag = f64::NEG_INFINITY;
    for k in 0..count {
        let mag = element.coordinate(k).abs();
        if mag > best_mag {
            best_mag = mag;
            best_idx = k;
        }
    }
    if element.coordinate(best_idx) < 0.0 {
        for k in 0..count {
            let v = element.coordinate_mut(k);
            *v = -*v;
        }
    }
}

/// Leading eigenpairs of the sample covariance operator of a centered sample.
///
/// Returns at most `max_components` pairs, further capped by the numerical
/// rank (eigenvalues below `1e-12·λ₁` are discarded) and by `n − 1`, the rank
/// bound of a centered sample. An all-zero sample yields an empty system.
pub fn empirical_eigensystem(sample: &Sample, max_components: usize) -> Result<EigenSystem> {
    if !sample.is_centered() {
        return Err(Error::Domain("empirical eigensystem requires a centered sample".into()));
    }
    let n = sample.len();
    if n < 2 {
        return Err(Error::Domain(format!("need at least 2 observations, got {n}")));
    }
    if max_components == 0 {
        return Err(Error::Domain("max_components must be at least 1".into()));
    }

    // Gram matrix G[i, l] = ⟨x_i, x_l⟩ / n; rows are independent, entries
    // within a row are single inner products, so parallel assembly is exact.
    let elements = sample.elements();
    let inv_n = 1.0 / n as f64;
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (i..n)
                .map(|l| elements[i].inner_product(&elements[l]).expect("sample is conformable") * inv_n)
                .collect()
        })
        .collect();
    let mut gram = DMatrix::zeros(n, n);
    for i in 0..n {
        for (off, &v) in rows[i].iter().enumerate() {
            gram[(i, i + off)] = v;
            gram[(i + off, i)] = v;
        }
    }

    let eig = SymmetricEigen::new(gram);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .total_cmp(&eig.eigenvalues[a])
            .then(a.cmp(&b))
    });

    let lambda_max = eig.eigenvalues[order[0]];
    if lambda_max <= 0.0 {
        return Ok(EigenSystem::from_parts(Vec::new(), Vec::new()));
    }
    let cutoff = RANK_CUTOFF_REL * lambda_max;
    let rank = order
        .iter()
        .take_while(|&&idx| eig.eigenvalues[idx] >= cutoff)
        .count();
    let count = max_components.min(rank).min(n - 1);

    let mut eigenvalues = Vec::with_capacity(count);
    let mut eigenelements = Vec::with_capacity(count);
    for &idx in order.iter().take(count) {
        let lambda = eig.eigenvalues[idx];
        let scale = 1.0 / (n as f64 * lambda).sqrt();
        let mut acc = elements[0].zero_like();
        for (i, x) in elements.iter().enumerate() {
            acc = acc.add_scaled(x, eig.eigenvectors[(i, idx)] * scale)?;
        }
        fix_sign(&mut acc);
        eigenvalues.push(lambda);
        eigenelements.push(acc);
    }
    Ok(EigenSystem::from_parts(eigenvalues, eigenelements))
}

/// Score matrix: entry (i, j) is the inner product of observation i with
/// eigenelement j.
pub fn project_scores(sample: &Sample, basis: &EigenSystem) -> Result<DMatrix<f64>> {
    let n = sample.len();
    let count = basis.count();
    let mut scores = DMatrix::zeros(n, count);
    for j in 0..count {
        let e = basis.element(j);
        for i in 0..n {
            scores[(i, j)] = sample.element(i).inner_product(e)?;
        }
    }
    Ok(scores)
}

/// Cross inner products between two pairs of bases and the max-norm deviation
/// of their Kronecker alignment matrix from the identity.
#[derive(Debug, Clone)]
pub struct AlignmentReport {
    /// ⟨φ_j, φ̃_k⟩ for the predictor-side bases (p₁ × p₁).
    pub u_x: DMatrix<f64>,
    /// ⟨ψ_j, ψ̃_k⟩ for the response-side bases (p₂ × p₂).
    pub u_y: DMatrix<f64>,
    /// ‖U_X ⊗ U_Y − I_p‖_∞ with p = p₁·p₂.
    pub w_max_dev: f64,
}

/// Compare two (predictor, response) basis pairs.
///
/// The Kronecker product is never materialized: its diagonal deviation is
/// scanned directly and the off-diagonal maximum factorizes as
/// max(offdiag(U_X)·max|U_Y|, maxdiag|U_X|·offdiag(U_Y)).
pub fn alignment_report(
    basis_a: (&EigenSystem, &EigenSystem),
    basis_b: (&EigenSystem, &EigenSystem),
) -> Result<AlignmentReport> {
    let (ax, ay) = basis_a;
    let (bx, by) = basis_b;
    if ax.count() != bx.count() || ay.count() != by.count() {
        return Err(Error::Domain(format!(
            "basis counts differ: ({}, {}) vs ({}, {})",
            ax.count(),
            ay.count(),
            bx.count(),
            by.count()
        )));
    }
    let u_x = cross_gram(ax, bx)?;
    let u_y = cross_gram(ay, by)?;

    let (dx, off_x) = diag_and_offmax(&u_x);
    let (dy, off_y) = diag_and_offmax(&u_y);
    let all_y = u_y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let diag_max_x = dx.iter().fold(0.0f64, |m, v| m.max(v.abs()));

    // W entry at ((j₁,j₂),(k₁,k₂)) is u_x[j₁,k₁]·u_y[j₂,k₂]. Off-diagonal
    // entries have j₁≠k₁ (bounded by off_x·all_y) or j₁=k₁, j₂≠k₂ (bounded
    // by diag_max_x·off_y); both bounds are attained.
    let mut diag_dev = 0.0f64;
    for &a in &dx {
        for &b in &dy {
            diag_dev = diag_dev.max((a * b - 1.0).abs());
        }
    }
    let off_dev = (off_x * all_y).max(diag_max_x * off_y);
    Ok(AlignmentReport {
        u_x,
        u_y,
        w_max_dev: diag_dev.max(off_dev),
    })
}

fn cross_gram(a: &EigenSystem, b: &EigenSystem) -> Result<DMatrix<f64>> {
    let p = a.count();
    let mut m = DMatrix::zeros(p, p);
    for j in 0..p {
        for k in 0..p {
            m[(j, k)] = a.element(j).inner_product(b.element(k))?;
        }
    }
    Ok(m)
}

fn diag_and_offmax(m: &DMatrix<f64>) -> (Vec<f64>, f64) {
    let p = m.nrows();
    let diag: Vec<f64> = (0..p).map(|j| m[(j, j)]).collect();
    let mut off = 0.0f64;
    for j in 0..p {
        for k in 0..p {
            if j != k {
                off = off.max(m[(j, k)].abs());
            }
        }
    }
    (diag, off)
}
