// SPDX-License-Identifier: Apache-2.0
//! Synthetic kinetic harvesting calibrated to a daily energy budget.
//!
//! A day is split into dawn, day, dusk and night periods. Each period gets a
//! fixed share of the day's energy; inside a period the energy goes to the
//! minutes where the animal is active, drawn from a two-state Markov chain
//! with a configurable mean bout length and duty fraction.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::HarvestError;

/// One value per activity period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Periods<T> {
    pub dawn: T,
    pub day: T,
    pub dusk: T,
    pub night: T,
}

impl<T: Copy> Periods<T> {
    pub fn as_array(&self) -> [T; 4] {
        [self.dawn, self.day, self.dusk, self.night]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ActivityProfile {
    /// Start hour of each period; night runs until the next dawn.
    pub starts_h: Periods<f64>,
    /// Share of the daily energy harvested in each period.
    pub weights: Periods<f64>,
    /// J per day delivered to the combiner input.
    pub daily_energy: f64,
    pub mean_bout_minutes: f64,
    /// Long-run fraction of active minutes in each period.
    pub duty: Periods<f64>,
    /// Active-minute intensity is uniform in [1 − spread, 1 + spread].
    pub intensity_spread: f64,
    pub seed: u64,
}

impl Default for ActivityProfile {
    fn default() -> Self {
        Self {
            starts_h: Periods {
                dawn: 6.0,
                day: 9.0,
                dusk: 16.0,
                night: 19.0,
            },
            // crepuscular split; not measured
            weights: Periods {
                dawn: 0.35,
                day: 0.15,
                dusk: 0.35,
                night: 0.15,
            },
            daily_energy: 13.07,
            mean_bout_minutes: 20.0,
            duty: Periods {
                dawn: 0.6,
                day: 0.2,
                dusk: 0.6,
                night: 0.25,
            },
            intensity_spread: 0.5,
            seed: 43,
        }
    }
}

impl ActivityProfile {
    pub fn validate(&self) -> Result<(), HarvestError> {
        let starts = self.starts_h.as_array();
        if !(starts[0] >= 0.0 && starts.windows(2).all(|w| w[0] < w[1]) && starts[3] < 24.0) {
            return Err(HarvestError::InvalidParameter(format!(
                "period starts must increase within [0, 24): {starts:?}"
            )));
        }
        let weights = self.weights.as_array();
        if weights.iter().any(|w| !(*w >= 0.0)) || (weights.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
            return Err(HarvestError::InvalidParameter(format!(
                "period weights must be non-negative and sum to 1: {weights:?}"
            )));
        }
        if !(self.daily_energy >= 0.0) {
            return Err(HarvestError::InvalidParameter("daily_energy must be >= 0".into()));
        }
        if !(self.mean_bout_minutes >= 1.0) {
            return Err(HarvestError::InvalidParameter("mean_bout_minutes must be >= 1".into()));
        }
        if self.duty.as_array().iter().any(|d| !(0.0..=1.0).contains(d)) {
            return Err(HarvestError::InvalidParameter(
                "duty fractions must lie in [0, 1]".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.intensity_spread) {
            return Err(HarvestError::InvalidParameter(
                "intensity_spread must lie in [0, 1]".into(),
            ));
        }
        Ok(())
    }

    /// Period index (0 dawn .. 3 night) for an hour of the day.
    pub fn period_of(&self, hour: f64) -> usize {
        let starts = self.starts_h.as_array();
        starts.iter().rposition(|&s| hour >= s).unwrap_or(3)
    }
}

/// Kinetic harvest current (A) per sample, `days × 86400 / resolution` long.
pub fn generate_kinetic_trace(
    days: u32,
    profile: &ActivityProfile,
    resolution: u32,
    v_supply: f64,
) -> Result<Vec<f64>, HarvestError> {
    profile.validate()?;
    if resolution == 0 || 86_400 % resolution != 0 {
        return Err(HarvestError::InvalidParameter(format!(
            "resolution {resolution} s must divide a day"
        )));
    }
    let per_day = (86_400 / resolution) as usize;
    let period_of: Vec<usize> = (0..per_day)
        .map(|i| profile.period_of(i as f64 * resolution as f64 / 3600.0))
        .collect();
    let mut counts = [0usize; 4];
    for &p in &period_of {
        counts[p] += 1;
    }
    if let Some(p) = counts.iter().position(|&n| n == 0) {
        return Err(HarvestError::InvalidParameter(format!(
            "activity period {p} contains no samples at {resolution} s resolution"
        )));
    }

    let total = per_day * days as usize;
    if profile.daily_energy == 0.0 {
        return Ok(vec![0.0; total]);
    }

    let weights = profile.weights.as_array();
    let duty = profile.duty.as_array();
    let leave = 1.0 / profile.mean_bout_minutes;
    let mut rng = ChaCha8Rng::seed_from_u64(profile.seed);
    let mut active = false;
    let mut current = Vec::with_capacity(total);
    let to_current = 1.0 / (resolution as f64 * v_supply);

    for _ in 0..days {
        let mut intensity = vec![0.0f64; per_day];
        for (slot, &p) in intensity.iter_mut().zip(&period_of) {
            let d = duty[p];
            active = if d >= 1.0 {
                true
            } else if d <= 0.0 {
                false
            } else {
                let enter = (d / (1.0 - d) * leave).min(1.0);
                let u: f64 = rng.random();
                if active {
                    u >= leave
                } else {
                    u < enter
                }
            };
            let jitter: f64 = rng.random();
            if active {
                *slot = 1.0 + profile.intensity_spread * (2.0 * jitter - 1.0);
            }
        }

        let mut period_sum = [0.0f64; 4];
        for (x, &p) in intensity.iter().zip(&period_of) {
            period_sum[p] += x;
        }
        let mut energy: Vec<f64> = intensity
            .iter()
            .zip(&period_of)
            .map(|(&x, &p)| {
                let share = weights[p] * profile.daily_energy;
                if period_sum[p] > 0.0 {
                    share * x / period_sum[p]
                } else {
                    // quiet period: spread its share evenly
                    share / counts[p] as f64
                }
            })
            .collect();

        let sum: f64 = energy.iter().sum();
        let scale = profile.daily_energy / sum;
        for e in &mut energy {
            *e *= scale;
        }
        current.extend(energy.into_iter().map(|e| e * to_current));
    }
    Ok(current)
}
