//! Data-driven selection of the partial-standardization exponent τ.
//!
//! The exponent is chosen from a grid by a signal-injected bootstrap: for
//! each candidate τ the null quantiles are estimated from one block of
//! Gaussian draws, and the attained power is estimated as the exceedance
//! rate of a second, independent block shifted by the observed signal
//! √n·V̄. The same two blocks of draws are reused for every candidate
//! (common random numbers), so candidates that only rescale coordinates tie
//! exactly and the smallest-τ tie-break applies.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maxtest::{empirical_quantiles, StandardizedSampler, Summary};
use crate::rng::tag;

fn default_grid() -> Vec<f64> {
    (0..10).map(|k| k as f64 / 10.0).collect()
}

fn default_inner_b() -> usize {
    250
}

/// Policy for choosing τ ∈ [0, 1).
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum TauPolicy {
    /// Use the given exponent as is.
    Fixed { fixed_value: f64 },
    /// Pick the power-maximizing exponent from `grid` using `inner_b`
    /// bootstrap replicates per candidate.
    Grid {
        #[serde(default = "default_grid")]
        grid: Vec<f64>,
        #[serde(default = "default_inner_b")]
        inner_b: usize,
    },
}

impl Default for TauPolicy {
    fn default() -> Self {
        TauPolicy::Grid {
            grid: default_grid(),
            inner_b: default_inner_b(),
        }
    }
}

impl TauPolicy {
    pub fn fixed(value: f64) -> Self {
        TauPolicy::Fixed { fixed_value: value }
    }

    pub fn grid(values: Vec<f64>) -> Self {
        TauPolicy::Grid {
            grid: values,
            inner_b: default_inner_b(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            TauPolicy::Fixed { fixed_value } => {
                if !(0.0..1.0).contains(fixed_value) {
                    return Err(Error::Domain(format!(
                        "fixed tau must lie in [0, 1), got {fixed_value}"
                    )));
                }
            }
            TauPolicy::Grid { grid, inner_b } => {
                if grid.is_empty() {
                    return Err(Error::Domain("tau grid must be non-empty".into()));
                }
                if grid.iter().any(|t| !(0.0..1.0).contains(t)) {
                    return Err(Error::Domain("tau grid values must lie in [0, 1)".into()));
                }
                if grid.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::Domain("tau grid must be strictly increasing".into()));
                }
                if *inner_b < 100 {
                    return Err(Error::Domain(format!(
                        "tau selection needs inner_b ≥ 100 replicates, got {inner_b}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Select τ according to `policy`. Deterministic given `seed`.
pub fn select_tau(
    summary: &Summary,
    n: usize,
    policy: &TauPolicy,
    significance: f64,
    seed: u64,
) -> Result<f64> {
    policy.validate()?;
    let (grid, inner_b) = match policy {
        TauPolicy::Fixed { fixed_value } => return Ok(*fixed_value),
        TauPolicy::Grid { grid, inner_b } => (grid, *inner_b),
    };

    let sampler = StandardizedSampler::new(summary)?;
    // One block for the null quantiles, an independent block for the
    // power estimate; both shared across the τ grid.
    let quantile_draws = sampler.draw_block(inner_b, seed, tag::TAU_QUANTILE);
    let fresh_draws = sampler.draw_block(inner_b, seed, tag::TAU_FRESH);

    let mut best_tau = grid[0];
    let mut best_power = -1.0f64;
    for &tau in grid {
        let weights = sampler.weights(tau);
        let shifts = sampler.shifts(summary, tau, n);

        let mut m_samples = vec![0.0; inner_b];
        let mut l_samples = vec![0.0; inner_b];
        for r in 0..inner_b {
            let col = quantile_draws.column(r);
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

        let mut hits = 0usize;
        for r in 0..inner_b {
            let col = fresh_draws.column(r);
            let mut hi = f64::NEG_INFINITY;
            let mut lo = f64::INFINITY;
            for ((w, shift), &s) in weights.iter().zip(&shifts).zip(col.iter()) {
                let v = w * s + shift;
                hi = hi.max(v);
                lo = lo.min(v);
            }
            if hi > q_m || lo < q_l {
                hits += 1;
            }
        }
        let power = hits as f64 / inner_b as f64;
        if power > best_power {
            best_power = power;
            best_tau = tau;
        }
    }
    Ok(best_tau)
}
