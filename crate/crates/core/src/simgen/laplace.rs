//! Centered Laplace draws via the inverse CDF.

use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::stream_rng;

/// Quantile function of the centered Laplace distribution with the given
/// scale: monotone, maps u = 0.5 to 0 exactly. Variance is 2·scale².
pub fn laplace_quantile(u: f64, scale: f64) -> f64 {
    if u < 0.5 {
        scale * (2.0 * u).ln()
    } else {
        -scale * (2.0 * (1.0 - u)).ln()
    }
}

/// One centered Laplace draw from `rng`.
pub(crate) fn laplace_draw<R: Rng + ?Sized>(rng: &mut R, scale: f64) -> f64 {
    // u = 0 would map to −∞; redraw (probability 2⁻⁵³ per draw)
    let u = loop {
        let u: f64 = rng.gen();
        if u > 0.0 {
            break u;
        }
    };
    laplace_quantile(u, scale)
}

/// `n` i.i.d. centered Laplace draws with the given scale.
pub fn sample_laplace(scale: f64, n: usize, seed: u64) -> Result<Vec<f64>> {
    if scale <= 0.0 {
        return Err(Error::Domain(format!("Laplace scale must be positive, got {scale}")));
    }
    let mut rng = stream_rng(seed, &[]);
    Ok((0..n).map(|_| laplace_draw(&mut rng, scale)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_point_maps_to_zero() {
        assert_eq!(laplace_quantile(0.5, 1.0), 0.0);
        assert!(laplace_quantile(0.25, 1.0) < 0.0);
        assert!(laplace_quantile(0.75, 1.0) > 0.0);
    }

    #[test]
    fn unit_variance_at_reference_scale() {
        let scale = 1.0 / 2f64.sqrt();
        let draws = sample_laplace(scale, 1_000_000, 42).unwrap();
        let n = draws.len() as f64;
        let mean: f64 = draws.iter().sum::<f64>() / n;
        let var: f64 = draws.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
        assert!((var - 1.0).abs() < 0.01, "variance {var}");
    }

    #[test]
    fn median_is_near_zero() {
        let mut draws = sample_laplace(1.0, 1_000_001, 7).unwrap();
        draws.sort_unstable_by(f64::total_cmp);
        let median = draws[draws.len() / 2];
        assert!(median.abs() < 0.01, "median {median}");
    }

    #[test]
    fn draws_are_reproducible() {
        let a = sample_laplace(1.0, 16, 3).unwrap();
        let b = sample_laplace(1.0, 16, 3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn invalid_scale_errors() {
        assert!(sample_laplace(0.0, 4, 0).is_err());
    }
}
