//! Activity-profile transform for wearable-device trajectories.
//!
//! A week of per-minute intensity readings A(t) is summarized by the
//! monotone profile Y(s) = Leb({t : A(t) ≥ s}) in days, evaluated on a grid
//! of positive intensity thresholds.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::hilbert::{Grid, HilbertPoint, Sample};

const MINUTES_PER_DAY: f64 = 1440.0;
const MAX_READINGS: usize = 7 * 1440;
const MAX_INTENSITY: f64 = 32767.0;

/// Per-minute intensity readings (counts in [0, 32767]) covering up to seven
/// days.
#[derive(Debug, Clone)]
pub struct ActivityTrajectory {
    readings: Vec<f64>,
}

impl ActivityTrajectory {
    pub fn new(readings: Vec<f64>) -> Result<Self> {
        if readings.len() > MAX_READINGS {
            return Err(Error::Validation(format!(
                "trajectory covers more than 7 days: {} readings",
                readings.len()
            )));
        }
        for (i, &v) in readings.iter().enumerate() {
            if !v.is_finite() || !(0.0..=MAX_INTENSITY).contains(&v) {
                return Err(Error::Validation(format!(
                    "reading {i} out of range [0, 32767]: {v}"
                )));
            }
        }
        Ok(Self { readings })
    }

    pub fn readings(&self) -> &[f64] {
        &self.readings
    }
}

/// The profile Y(s) per threshold, in days.
#[derive(Debug, Clone, PartialEq)]
pub struct ActivityProfile {
    pub thresholds: Vec<u32>,
    pub values: Vec<f64>,
}

/// Evaluate Y(s) = (minutes with reading ≥ s)/1440 on the given thresholds.
/// Thresholds must be positive (zero intensity is excluded) and strictly
/// increasing; the result is non-increasing in s.
pub fn activity_profile(traj: &ActivityTrajectory, thresholds: &[u32]) -> Result<ActivityProfile> {
    if thresholds.is_empty() {
        return Err(Error::Domain("need at least one threshold".into()));
    }
    if thresholds[0] < 1 {
        return Err(Error::Domain("thresholds must be at least 1".into()));
    }
    if thresholds.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Domain("thresholds must be strictly increasing".into()));
    }
    let mut sorted = traj.readings.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let values = thresholds
        .iter()
        .map(|&s| {
            let below = sorted.partition_point(|&v| v < s as f64);
            (sorted.len() - below) as f64 / MINUTES_PER_DAY
        })
        .collect();
    Ok(ActivityProfile {
        thresholds: thresholds.to_vec(),
        values,
    })
}

/// Standard threshold grid: `lo..=hi` subsampled every `step` units.
pub fn threshold_grid(lo: u32, hi: u32, step: u32) -> Result<Vec<u32>> {
    if lo < 1 || hi < lo || step == 0 {
        return Err(Error::Domain(format!(
            "invalid threshold grid: lo={lo}, hi={hi}, step={step}"
        )));
    }
    Ok((lo..=hi).step_by(step as usize).collect())
}

/// Bundle profiles (all on the same thresholds) into a functional sample
/// whose grid is the threshold axis.
pub fn profiles_to_sample(profiles: &[ActivityProfile]) -> Result<Sample> {
    if profiles.is_empty() {
        return Err(Error::Domain("no profiles given".into()));
    }
    let thresholds = &profiles[0].thresholds;
    if thresholds.len() < 2 {
        return Err(Error::Domain("need at least two thresholds to form a grid".into()));
    }
    let grid = Arc::new(Grid::from_points(thresholds.iter().map(|&s| s as f64).collect())?);
    let elements = profiles
        .iter()
        .enumerate()
        .map(|(i, p)| {
            if &p.thresholds != thresholds {
                return Err(Error::Domain(format!(
                    "profile {i} uses a different threshold grid"
                )));
            }
            HilbertPoint::functional(grid.clone(), p.values.clone())
        })
        .collect::<Result<Vec<_>>>()?;
    Sample::new(elements)
}
