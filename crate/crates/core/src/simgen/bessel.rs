//! Modified Bessel function of the second kind K_ν.
//!
//! Temme's series for x < 2 and Steed's continued fraction for x ≥ 2, with
//! forward recurrence from the fractional order μ ∈ [−1/2, 1/2]. Both
//! branches deliver close to machine precision (well inside 1e-10 relative)
//! across the ranges used by the Matérn covariance.

use statrs::function::gamma::gamma;

const MAX_ITER: usize = 10_000;
const EPS: f64 = f64::EPSILON;

/// Leading coefficients of 1/Γ(1+z) = Σ a_k z^k, used near μ = 0 where the
/// direct difference of reciprocal gammas cancels.
const INV_GAMMA_A1: f64 = 0.577_215_664_901_532_9;
const INV_GAMMA_A3: f64 = -0.042_002_635_034_095_24;

/// Γ₁(μ) = [1/Γ(1−μ) − 1/Γ(1+μ)]/(2μ) and Γ₂(μ) = [1/Γ(1−μ) + 1/Γ(1+μ)]/2,
/// plus the reciprocal gammas themselves.
fn temme_gammas(mu: f64) -> (f64, f64, f64, f64) {
    let gampl = 1.0 / gamma(1.0 + mu);
    let gammi = 1.0 / gamma(1.0 - mu);
    let gam1 = if mu.abs() < 1e-4 {
        -(INV_GAMMA_A1 + INV_GAMMA_A3 * mu * mu)
    } else {
        (gammi - gampl) / (2.0 * mu)
    };
    let gam2 = 0.5 * (gammi + gampl);
    (gam1, gam2, gampl, gammi)
}

/// K_μ(x) and K_{μ+1}(x) for |μ| ≤ 1/2 and 0 < x ≤ 2 (Temme's series).
fn k_pair_series(mu: f64, x: f64) -> (f64, f64) {
    let x2 = 0.5 * x;
    let mu2 = mu * mu;
    let pimu = std::f64::consts::PI * mu;
    let fact = if pimu.abs() < EPS { 1.0 } else { pimu / pimu.sin() };
    let d = -x2.ln();
    let e = mu * d;
    let fact2 = if e.abs() < EPS { 1.0 } else { e.sinh() / e };
    let (gam1, gam2, gampl, gammi) = temme_gammas(mu);
    let mut ff = fact * (gam1 * e.cosh() + gam2 * fact2 * d);
    let mut sum = ff;
    let e_exp = e.exp();
    let mut p = 0.5 * e_exp / gampl;
    let mut q = 0.5 / (e_exp * gammi);
    let mut c = 1.0;
    let d2 = x2 * x2;
    let mut sum1 = p;
    for i in 1..=MAX_ITER {
        let fi = i as f64;
        ff = (fi * ff + p + q) / (fi * fi - mu2);
        c *= d2 / fi;
        p /= fi - mu;
        q /= fi + mu;
        let del = c * ff;
        sum += del;
        let del1 = c * (p - fi * ff);
        sum1 += del1;
        if del.abs() < sum.abs() * EPS {
            break;
        }
    }
    (sum, sum1 * 2.0 / x)
}

/// K_μ(x) and K_{μ+1}(x) for |μ| ≤ 1/2 and x ≥ 2 (Steed's CF2).
fn k_pair_continued_fraction(mu: f64, x: f64) -> (f64, f64) {
    let mu2 = mu * mu;
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut delh = d;
    let mut h = delh;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let a1 = 0.25 - mu2;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 2..=MAX_ITER {
        a -= 2.0 * (i as f64 - 1.0);
        c = -a * c / i as f64;
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh *= b * d - 1.0;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < EPS {
            break;
        }
    }
    h *= a1;
    let rkmu = (std::f64::consts::PI / (2.0 * x)).sqrt() * (-x).exp() / s;
    let rk1 = rkmu * (mu + x + 0.5 - h) / x;
    (rkmu, rk1)
}

/// K_ν(x) for real order ν and x > 0. Even in ν.
pub fn bessel_k(nu: f64, x: f64) -> f64 {
    assert!(x > 0.0, "bessel_k requires x > 0, got {x}");
    let nu = nu.abs();
    let nl = (nu + 0.5).floor() as usize;
    let mu = nu - nl as f64;
    let (mut rkmu, mut rk1) = if x < 2.0 {
        k_pair_series(mu, x)
    } else {
        k_pair_continued_fraction(mu, x)
    };
    let xi2 = 2.0 / x;
    for i in 1..=nl {
        let next = (mu + i as f64) * xi2 * rk1 + rkmu;
        rkmu = rk1;
        rk1 = next;
    }
    rkmu
}
