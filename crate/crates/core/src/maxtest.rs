//! The testing engine: cross-score vectors, partially standardized max/min
//! statistics, Gaussian bootstrap quantiles, rejection decision, p-value and
//! simultaneous confidence intervals.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fpca::{empirical_eigensystem, project_scores, EigenSystem};
use crate::hilbert::{HilbertPoint, Sample};
use crate::numeric::{canonical_row_order, quantile_index};
use crate::rng::{derive_seed, stream_rng, tag};
use crate::simgen::fourier_system;
use crate::tauselect::{select_tau, TauPolicy};

/// Coordinates whose standard deviation falls at or below this fraction of
/// the largest one are excluded from max/min statistics and the bootstrap.
const DEGENERATE_REL: f64 = 1e-12;

/// Relative tolerance for negative eigenvalues of the estimated covariance;
/// anything below −NEG_EIGEN_REL·λ_max is treated as a numerical failure.
const NEG_EIGEN_REL: f64 = 1e-8;

/// The n × p matrix of products of predictor and response scores,
/// vectorized with the response index fastest: column (j₁−1)·p₂ + j₂
/// (1-based) holds ⟨X_i, φ_{j₁}⟩⟨Y_i, ψ_{j₂}⟩.
#[derive(Debug, Clone)]
pub struct CrossScoreMatrix {
    v: DMatrix<f64>,
    p1: usize,
    p2: usize,
}

impl CrossScoreMatrix {
    pub fn v(&self) -> &DMatrix<f64> {
        &self.v
    }

    pub fn n(&self) -> usize {
        self.v.nrows()
    }

    pub fn p(&self) -> usize {
        self.p1 * self.p2
    }

    pub fn p1(&self) -> usize {
        self.p1
    }

    pub fn p2(&self) -> usize {
        self.p2
    }

    /// Flat column index of the (0-based) pair (j₁, j₂).
    pub fn flat_index(&self, j1: usize, j2: usize) -> usize {
        j1 * self.p2 + j2
    }

    /// Inverse of [`flat_index`](Self::flat_index).
    pub fn pair_index(&self, j: usize) -> (usize, usize) {
        (j / self.p2, j % self.p2)
    }
}

/// Pair every predictor score with every response score.
pub fn cross_scores(xscores: &DMatrix<f64>, yscores: &DMatrix<f64>) -> Result<CrossScoreMatrix> {
    if xscores.nrows() != yscores.nrows() {
        return Err(Error::Domain(format!(
            "sample sizes differ: {} predictor rows vs {} response rows",
            xscores.nrows(),
            yscores.nrows()
        )));
    }
    let n = xscores.nrows();
    let p1 = xscores.ncols();
    let p2 = yscores.ncols();
    let mut v = DMatrix::zeros(n, p1 * p2);
    for i in 0..n {
        for j1 in 0..p1 {
            let x = xscores[(i, j1)];
            for j2 in 0..p2 {
                v[(i, j1 * p2 + j2)] = x * yscores[(i, j2)];
            }
        }
    }
    Ok(CrossScoreMatrix { v, p1, p2 })
}

/// Mean vector, covariance matrix (1/n convention) and per-coordinate
/// standard deviations of the cross-score rows.
#[derive(Debug, Clone)]
pub struct Summary {
    mean: DVector<f64>,
    cov: DMatrix<f64>,
    sd: DVector<f64>,
}

impl Summary {
    pub fn p(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    pub fn sd(&self) -> &DVector<f64> {
        &self.sd
    }

    /// Construct directly from given moments (used by tests and callers that
    /// already hold a mean/covariance pair). `sd` is derived from the
    /// diagonal.
    pub fn from_moments(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        if cov.nrows() != cov.ncols() || cov.nrows() != mean.len() {
            return Err(Error::Domain("mean/covariance dimensions differ".into()));
        }
        let sd = DVector::from_iterator(mean.len(), (0..mean.len()).map(|j| cov[(j, j)].max(0.0).sqrt()));
        Ok(Self { mean, cov, sd })
    }

    /// Row-wise summary of an arbitrary n × p matrix.
    ///
    /// Rows are reduced in canonical (lexicographic) order, so the result is
    /// bitwise invariant under permutations of the observations.
    pub fn from_rows(rows: &DMatrix<f64>) -> Result<Self> {
        let n = rows.nrows();
        let p = rows.ncols();
        if n < 2 {
            return Err(Error::Domain(format!("summary needs n ≥ 2 rows, got {n}")));
        }
        let order = canonical_row_order(n, p, |i, k| rows[(i, k)]);
        let inv_n = 1.0 / n as f64;
        let mean = DVector::from_iterator(
            p,
            (0..p).map(|j| order.iter().map(|&i| rows[(i, j)]).sum::<f64>() * inv_n),
        );
        // centered copy in canonical row order
        let mut centered = DMatrix::zeros(n, p);
        for (row, &i) in order.iter().enumerate() {
            for j in 0..p {
                centered[(row, j)] = rows[(i, j)] - mean[j];
            }
        }
        let mut cov = DMatrix::zeros(p, p);
        let cols: Vec<Vec<f64>> = (0..p).map(|j| centered.column(j).iter().copied().collect()).collect();
        let upper: Vec<Vec<f64>> = (0..p)
            .into_par_iter()
            .map(|j| {
                (j..p)
                    .map(|k| {
                        let cj = &cols[j];
                        let ck = &cols[k];
                        let mut acc = 0.0;
                        for i in 0..n {
                            acc += cj[i] * ck[i];
                        }
                        acc * inv_n
                    })
                    .collect()
            })
            .collect();
        for j in 0..p {
            for (off, &v) in upper[j].iter().enumerate() {
                cov[(j, j + off)] = v;
                cov[(j + off, j)] = v;
            }
        }
        let sd = DVector::from_iterator(p, (0..p).map(|j| cov[(j, j)].max(0.0).sqrt()));
        Ok(Self { mean, cov, sd })
    }

    /// Indices of coordinates that participate in max/min statistics and the
    /// bootstrap: sd above `1e-12` of the largest sd.
    pub fn retained_indices(&self) -> Vec<usize> {
        let max_sd = self.sd.iter().fold(0.0f64, |m, &v| m.max(v));
        if max_sd <= 0.0 {
            return Vec::new();
        }
        (0..self.sd.len())
            .filter(|&j| self.sd[j] > DEGENERATE_REL * max_sd)
            .collect()
    }
}

/// Column means, 1/n covariance and standard deviations of the cross scores.
pub fn summarize(cs: &CrossScoreMatrix) -> Result<Summary> {
    Summary::from_rows(&cs.v)
}

/// Partially standardized max and min statistics √n·V̄_j / σ̂_j^τ over the
/// non-degenerate coordinates.
pub fn max_min_statistics(summary: &Summary, tau: f64, n: usize) -> Result<(f64, f64)> {
    check_tau(tau)?;
    let retained = summary.retained_indices();
    if retained.is_empty() {
        return Err(Error::Degenerate(
            "all coordinates have (numerically) zero variance".into(),
        ));
    }
    let sqrt_n = (n as f64).sqrt();
    let mut t_u = f64::NEG_INFINITY;
    let mut t_l = f64::INFINITY;
    for &j in &retained {
        let value = sqrt_n * summary.mean()[j] / summary.sd()[j].powf(tau);
        t_u = t_u.max(value);
        t_l = t_l.min(value);
    }
    Ok((t_u, t_l))
}

// Tuning policies produce τ ∈ [0, 1); the statistics themselves also accept
// the fully studentized endpoint τ = 1.
fn check_tau(tau: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&tau) {
        return Err(Error::Domain(format!("tau must lie in [0, 1], got {tau}")));
    }
    Ok(())
}

fn check_significance(significance: f64) -> Result<()> {
    if !(significance > 0.0 && significance < 1.0) {
        return Err(Error::Domain(format!(
            "significance must lie in (0, 1), got {significance}"
        )));
    }
    Ok(())
}

/// Draws Gaussian vectors with the law of the estimated covariance restricted
/// to the retained coordinates.
///
/// The correlation matrix of the retained block is eigen-factorized (negative
/// eigenvalues clipped at zero) and draws are rescaled by the standard
/// deviations afterwards, so fully standardized statistics (τ = 1) do not
/// depend on coordinate scales at all.
pub(crate) struct StandardizedSampler {
    factor: DMatrix<f64>,
    sd: Vec<f64>,
    retained: Vec<usize>,
}

impl StandardizedSampler {
    pub(crate) fn new(summary: &Summary) -> Result<Self> {
        let retained = summary.retained_indices();
        if retained.is_empty() {
            return Err(Error::Degenerate(
                "all coordinates have (numerically) zero variance".into(),
            ));
        }
        let k = retained.len();
        let sd: Vec<f64> = retained.iter().map(|&j| summary.sd()[j]).collect();
        let mut corr = DMatrix::zeros(k, k);
        for a in 0..k {
            corr[(a, a)] = 1.0;
            for b in a + 1..k {
                let v = summary.cov()[(retained[a], retained[b])] / (sd[a] * sd[b]);
                corr[(a, b)] = v;
                corr[(b, a)] = v;
            }
        }
        let eig = SymmetricEigen::new(corr);
        let lambda_max = eig.eigenvalues.iter().fold(0.0f64, |m, &v| m.max(v));
        let lambda_min = eig.eigenvalues.iter().fold(0.0f64, |m, &v| m.min(v));
        if lambda_min < -NEG_EIGEN_REL * lambda_max.max(1.0) {
            return Err(Error::Numerical(format!(
                "covariance is not positive semi-definite: eigenvalue {lambda_min}"
            )));
        }
        let mut factor = eig.eigenvectors;
        for (c, &lambda) in eig.eigenvalues.iter().enumerate() {
            let s = lambda.max(0.0).sqrt();
            factor.column_mut(c).scale_mut(s);
        }
        Ok(Self { factor, sd, retained })
    }

    pub(crate) fn dim(&self) -> usize {
        self.sd.len()
    }

    /// Per-coordinate weights σ̂_j^{1−τ}; a correlation-scale draw times this
    /// weight equals S*_j / σ̂_j^τ.
    pub(crate) fn weights(&self, tau: f64) -> Vec<f64> {
        self.sd.iter().map(|s| s.powf(1.0 - tau)).collect()
    }

    /// Shifts √n·V̄_j / σ̂_j^τ used by the signal-injected bootstrap.
    pub(crate) fn shifts(&self, summary: &Summary, tau: f64, n: usize) -> Vec<f64> {
        let sqrt_n = (n as f64).sqrt();
        self.retained
            .iter()
            .zip(&self.sd)
            .map(|(&j, s)| sqrt_n * summary.mean()[j] / s.powf(tau))
            .collect()
    }

    /// Draw `b` correlation-scale vectors as the columns of a k × b matrix;
    /// column r is generated from the stream `(seed, [stream_tag, r])`, so
    /// the result does not depend on worker count.
    pub(crate) fn draw_block(&self, b: usize, seed: u64, stream_tag: u64) -> DMatrix<f64> {
        let k = self.dim();
        let mut z = vec![0.0f64; k * b];
        z.par_chunks_mut(k).enumerate().for_each(|(r, col)| {
            let mut rng = stream_rng(seed, &[stream_tag, r as u64]);
            for v in col.iter_mut() {
                *v = rng.sample(StandardNormal);
            }
        });
        let z = DMatrix::from_vec(k, b, z);
        &self.factor * z
    }
}

/// Empirical bootstrap quantiles of the max and min statistics, together
/// with the replicate values they were computed from.
#[derive(Debug, Clone)]
pub struct BootstrapQuantiles {
    pub q_m: f64,
    pub q_l: f64,
    pub b: usize,
    pub m_samples: Vec<f64>,
    pub l_samples: Vec<f64>,
}

/// Order statistics at ⌈(1−ϱ/2)·b⌉ of the max replicates and ⌈(ϱ/2)·b⌉ of
/// the min replicates.
pub fn empirical_quantiles(m_samples: &[f64], l_samples: &[f64], significance: f64) -> (f64, f64) {
    let b = m_samples.len();
    let mut m_sorted = m_samples.to_vec();
    let mut l_sorted = l_samples.to_vec();
    m_sorted.sort_unstable_by(f64::total_cmp);
    l_sorted.sort_unstable_by(f64::total_cmp);
    let q_m = m_sorted[quantile_index(1.0 - significance / 2.0, b)];
    let q_l = l_sorted[quantile_index(significance / 2.0, b)];
    (q_m, q_l)
}

/// Bootstrap the max/min statistics: draw `b` vectors from N_p(0, Σ̂) on the
/// retained coordinate set, form max/min of the partially standardized
/// coordinates, and return the empirical quantiles at ϱ.
pub fn bootstrap_quantiles(
    summary: &Summary,
    tau: f64,
    b: usize,
    significance: f64,
    seed: u64,
) -> Result<BootstrapQuantiles> {
    check_tau(tau)?;
    check_significance(significance)?;
    if b < 100 {
        return Err(Error::Domain(format!("bootstrap needs b ≥ 100 replicates, got {b}")));
    }
    let sampler = StandardizedSampler::new(summary)?;
    let weights = sampler.weights(tau);
    let draws = sampler.draw_block(b, seed, tag::BOOT_REPLICATE);
    let mut m_samples = vec![0.0; b];
    let mut l_samples = vec![0.0; b];
    for r in 0..b {
        let col = draws.column(r);
        let mut hi = f64::NEG_INFINITY;
        let mut lo = f64::INFINITY;
        for (w, &s) in weights.iter().zip(col.iter()) {
            let v = w * s;
            hi = hi.max(v);
            lo = lo.min(v);
        }
        m_samples[r] = hi;
        l_samples[r] = lo;
    }
    let (q_m, q_l) = empirical_quantiles(&m_samples, &l_samples, significance);
    Ok(BootstrapQuantiles {
        q_m,
        q_l,
        b,
        m_samples,
        l_samples,
    })
}

/// Rejection decision and finite-B two-sided p-value.
#[derive(Debug, Clone, Copy)]
pub struct Decision {
    pub reject: bool,
    pub p_value: f64,
}

/// Apply the rejection rule (strict comparisons against the bootstrap
/// quantiles) and compute the doubled-minimum tail p-value with add-one
/// smoothing. The decision rule is the quantile comparison; the p-value is a
/// reporting convenience.
pub fn decide(t_u: f64, t_l: f64, quantiles: &BootstrapQuantiles) -> Decision {
    let reject = t_u > quantiles.q_m || t_l < quantiles.q_l;
    let b = quantiles.b as f64;
    let upper = (1 + quantiles.m_samples.iter().filter(|&&m| m >= t_u).count()) as f64 / (b + 1.0);
    let lower = (1 + quantiles.l_samples.iter().filter(|&&l| l <= t_l).count()) as f64 / (b + 1.0);
    let p_value = (2.0 * upper.min(lower)).min(1.0);
    Decision { reject, p_value }
}

/// Simultaneous confidence intervals
/// [V̄_j − n^{−1/2}·σ̂_j^τ·q_M, V̄_j − n^{−1/2}·σ̂_j^τ·q_L] per coordinate.
/// Degenerate coordinates collapse to the single point V̄_j.
pub fn simultaneous_intervals(
    summary: &Summary,
    tau: f64,
    quantiles: &BootstrapQuantiles,
    n: usize,
) -> Vec<[f64; 2]> {
    let retained = summary.retained_indices();
    let mut is_retained = vec![false; summary.p()];
    for &j in &retained {
        is_retained[j] = true;
    }
    let inv_sqrt_n = 1.0 / (n as f64).sqrt();
    (0..summary.p())
        .map(|j| {
            let center = summary.mean()[j];
            if !is_retained[j] {
                return [center, center];
            }
            let scale = summary.sd()[j].powf(tau) * inv_sqrt_n;
            [center - scale * quantiles.q_m, center - scale * quantiles.q_l]
        })
        .collect()
}

/// How the projection bases are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisChoice {
    /// Eigenelements of the empirical covariance operators (the default).
    Empirical,
    /// Fixed orthonormal sequences: the Fourier system for a functional
    /// space, the canonical unit vectors for a Euclidean space.
    Fourier,
}

/// Configuration of a single hypothesis test run.
#[derive(Debug, Clone)]
pub struct TestConfig {
    /// Number of predictor-side components; defaults to the sample size for
    /// functional predictors and to the vector dimension otherwise, capped
    /// at the available rank.
    pub p1: Option<usize>,
    /// Response-side counterpart of `p1`.
    pub p2: Option<usize>,
    pub tau: TauPolicy,
    /// Bootstrap replicates for the final quantiles.
    pub bootstrap: usize,
    pub significance: f64,
    pub seed: u64,
    pub basis: BasisChoice,
}

impl Default for TestConfig {
    fn default() -> Self {
        Self {
            p1: None,
            p2: None,
            tau: TauPolicy::default(),
            bootstrap: 1000,
            significance: 0.05,
            seed: 0,
            basis: BasisChoice::Empirical,
        }
    }
}

/// Outcome of a hypothesis test run.
#[derive(Debug, Clone)]
pub struct TestResult {
    pub t_u: f64,
    pub t_l: f64,
    pub quantiles: BootstrapQuantiles,
    pub tau: f64,
    pub reject: bool,
    pub p_value: f64,
    pub sci: Vec<[f64; 2]>,
    pub significance: f64,
    pub p1: usize,
    pub p2: usize,
    pub seed: u64,
}

#[derive(Serialize)]
struct TestResultDoc<'a> {
    t_u: f64,
    t_l: f64,
    q_m: f64,
    q_l: f64,
    tau: f64,
    p_value: f64,
    reject: bool,
    sci: &'a [[f64; 2]],
    p1: usize,
    p2: usize,
    b: usize,
    significance: f64,
    seed: u64,
}

impl TestResult {
    /// Stable JSON rendering of the result (replicate values are omitted).
    pub fn to_json(&self) -> String {
        serde_json::to_string(&TestResultDoc {
            t_u: self.t_u,
            t_l: self.t_l,
            q_m: self.quantiles.q_m,
            q_l: self.quantiles.q_l,
            tau: self.tau,
            p_value: self.p_value,
            reject: self.reject,
            sci: &self.sci,
            p1: self.p1,
            p2: self.p2,
            b: self.quantiles.b,
            significance: self.significance,
            seed: self.seed,
        })
        .expect("test result serializes")
    }
}

fn default_components(point: &HilbertPoint, n: usize) -> usize {
    if point.functional_parts().is_empty() {
        point.scalar_part().len()
    } else {
        n
    }
}

fn build_basis(sample: &Sample, requested: usize, choice: BasisChoice) -> Result<EigenSystem> {
    match choice {
        BasisChoice::Empirical => empirical_eigensystem(sample, requested),
        BasisChoice::Fourier => {
            let template = sample.element(0);
            let n_func = template.functional_parts().len();
            let n_scalar = template.scalar_part().len();
            match (n_func, n_scalar) {
                (1, 0) => {
                    let grid = template.functional_parts()[0].grid().clone();
                    fourier_system(&grid, requested)
                }
                (0, q) => {
                    let count = requested.min(q);
                    let elements = (0..count)
                        .map(|j| {
                            let mut v = vec![0.0; q];
                            v[j] = 1.0;
                            HilbertPoint::scalar(v).expect("unit vector is a valid point")
                        })
                        .collect();
                    EigenSystem::fixed(elements)
                }
                _ => Err(Error::Domain(
                    "fixed bases are supported for a single functional component or a pure \
                     vector space; use the empirical basis for mixed direct sums"
                        .into(),
                )),
            }
        }
    }
}

/// End-to-end test of a null slope operator.
///
/// Centers both samples, builds bases per `config.basis`, forms cross scores,
/// selects τ per the policy, bootstraps the max/min quantiles and assembles
/// the decision. Deterministic given `config.seed`.
pub fn run_test(x: &Sample, y: &Sample, config: &TestConfig) -> Result<TestResult> {
    if x.len() != y.len() {
        return Err(Error::Domain(format!(
            "predictor and response sample sizes differ: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    let n = x.len();
    if n < 3 {
        return Err(Error::Domain(format!("test needs n ≥ 3 observations, got {n}")));
    }
    check_significance(config.significance)?;

    let xc = x.center()?;
    let yc = y.center()?;
    let p1_req = config.p1.unwrap_or_else(|| default_components(x.element(0), n));
    let p2_req = config.p2.unwrap_or_else(|| default_components(y.element(0), n));
    if p1_req == 0 || p2_req == 0 {
        return Err(Error::Domain("component counts must be at least 1".into()));
    }
    let x_basis = build_basis(&xc, p1_req, config.basis)?;
    let y_basis = build_basis(&yc, p2_req, config.basis)?;
    if x_basis.is_empty() || y_basis.is_empty() {
        return Err(Error::Degenerate(
            "a sample has numerical rank zero after centering".into(),
        ));
    }

    let xscores = project_scores(&xc, &x_basis)?;
    let yscores = project_scores(&yc, &y_basis)?;
    let cross = cross_scores(&xscores, &yscores)?;
    let summary = summarize(&cross)?;

    let tau = select_tau(
        &summary,
        n,
        &config.tau,
        config.significance,
        derive_seed(config.seed, &[tag::TAU_SELECT]),
    )?;
    let quantiles = bootstrap_quantiles(
        &summary,
        tau,
        config.bootstrap,
        config.significance,
        derive_seed(config.seed, &[tag::FINAL_BOOT]),
    )?;
    let (t_u, t_l) = max_min_statistics(&summary, tau, n)?;
    let decision = decide(t_u, t_l, &quantiles);
    let sci = simultaneous_intervals(&summary, tau, &quantiles, n);

    Ok(TestResult {
        t_u,
        t_l,
        quantiles,
        tau,
        reject: decision.reject,
        p_value: decision.p_value,
        sci,
        significance: config.significance,
        p1: x_basis.count(),
        p2: y_basis.count(),
        seed: config.seed,
    })
}
