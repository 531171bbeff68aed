// SPDX-License-Identifier: Apache-2.0
//! Solar irradiance traces and the irradiance → harvested current chain.

use chrono::{DateTime, Utc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::HarvestError;

/// Irradiance samples at a fixed resolution, each held over its interval.
#[derive(Debug, Clone, PartialEq)]
pub struct IrradianceTrace {
    pub start_time: DateTime<Utc>,
    /// s
    pub resolution: u32,
    /// W/m²
    pub samples: Vec<f64>,
}

impl IrradianceTrace {
    pub fn new(start_time: DateTime<Utc>, resolution: u32, samples: Vec<f64>) -> Result<Self, HarvestError> {
        if resolution == 0 {
            return Err(HarvestError::InvalidParameter("resolution must be > 0".into()));
        }
        if let Some(index) = samples.iter().position(|g| !(*g >= 0.0)) {
            return Err(HarvestError::NegativeIrradiance {
                index,
                value: samples[index],
            });
        }
        Ok(Self {
            start_time,
            resolution,
            samples,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Radiant exposure per day (J/m²), one entry per whole or partial day.
    pub fn daily_exposure(&self) -> Vec<f64> {
        let per_day = (86_400 / self.resolution as usize).max(1);
        self.samples
            .chunks(per_day)
            .map(|day| day.iter().sum::<f64>() * self.resolution as f64)
            .collect()
    }
}

/// Panel, geometry and PMIC factors converting irradiance into supply current.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolarChain {
    /// m²
    pub panel_area: f64,
    pub panel_efficiency: f64,
    /// Static angle-of-incidence loss.
    pub cosine_factor: f64,
    pub pmic_efficiency: f64,
    /// V
    pub v_supply: f64,
}

impl Default for SolarChain {
    fn default() -> Self {
        Self {
            panel_area: 0.040 * 0.040,
            panel_efficiency: 0.185,
            cosine_factor: 0.5,
            pmic_efficiency: 0.85,
            v_supply: 3.3,
        }
    }
}

impl SolarChain {
    /// Panel output power per unit irradiance (m²).
    pub fn power_factor(&self) -> f64 {
        self.panel_area * self.panel_efficiency * self.cosine_factor
    }

    /// Harvested current per unit irradiance (A per W/m²).
    pub fn current_factor(&self) -> f64 {
        self.power_factor() / self.v_supply * self.pmic_efficiency
    }

    pub fn validate(&self) -> Result<(), HarvestError> {
        let in_unit = |x: f64| x > 0.0 && x <= 1.0;
        if !(self.panel_area > 0.0)
            || !in_unit(self.panel_efficiency)
            || !in_unit(self.cosine_factor)
            || !in_unit(self.pmic_efficiency)
            || !(self.v_supply > 0.0)
        {
            return Err(HarvestError::InvalidParameter(format!(
                "solar chain factors out of range: {self:?}"
            )));
        }
        Ok(())
    }
}

/// Harvested current (A) for every irradiance sample.
pub fn solar_current_from_irradiance(trace: &IrradianceTrace, chain: &SolarChain) -> Result<Vec<f64>, HarvestError> {
    chain.validate()?;
    let factor = chain.current_factor();
    trace
        .samples
        .iter()
        .enumerate()
        .map(|(index, &g)| {
            if g >= 0.0 {
                Ok(g * factor)
            } else {
                Err(HarvestError::NegativeIrradiance { index, value: g })
            }
        })
        .collect()
}

/// Parameters of the synthetic clear-sky-plus-clouds irradiance generator.
///
/// Hours are local time measured from the trace start, which is treated as
/// local midnight. The defaults are a northern mid-latitude winter stand-in,
/// not measured values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolarProfile {
    pub sunrise_h: f64,
    pub sunset_h: f64,
    /// Clear-sky irradiance at solar noon, W/m².
    pub peak_wm2: f64,
    /// Probability that a day is cloudless.
    pub clear_day_probability: f64,
    /// Range of the mean attenuation drawn for an overcast day.
    pub overcast_min: f64,
    pub overcast_max: f64,
    /// Relative std-dev of the minute-level cloud fluctuation.
    pub cloud_noise: f64,
    /// Lag-one autocorrelation of the fluctuation.
    pub cloud_correlation: f64,
    pub seed: u64,
}

impl Default for SolarProfile {
    fn default() -> Self {
        Self::winter()
    }
}

impl SolarProfile {
    pub fn winter() -> Self {
        Self {
            sunrise_h: 8.5,
            sunset_h: 16.75,
            peak_wm2: 300.0,
            clear_day_probability: 0.35,
            overcast_min: 0.15,
            overcast_max: 0.8,
            cloud_noise: 0.3,
            cloud_correlation: 0.95,
            seed: 42,
        }
    }

    /// No clouds at all.
    pub fn cloudless(self) -> Self {
        Self {
            clear_day_probability: 1.0,
            ..self
        }
    }

    pub fn validate(&self) -> Result<(), HarvestError> {
        if !(0.0 <= self.sunrise_h && self.sunrise_h < self.sunset_h && self.sunset_h <= 24.0) {
            return Err(HarvestError::InvalidParameter(format!(
                "need 0 <= sunrise < sunset <= 24, got {} / {}",
                self.sunrise_h, self.sunset_h
            )));
        }
        let unit = |x: f64| (0.0..=1.0).contains(&x);
        if !(self.peak_wm2 >= 0.0)
            || !unit(self.clear_day_probability)
            || !unit(self.overcast_min)
            || !unit(self.overcast_max)
            || self.overcast_min > self.overcast_max
            || !(self.cloud_noise >= 0.0)
            || !(0.0..1.0).contains(&self.cloud_correlation)
        {
            return Err(HarvestError::InvalidParameter(format!(
                "solar profile parameters out of range: {self:?}"
            )));
        }
        Ok(())
    }

    /// Clear-sky irradiance at `hour` of the day.
    pub fn clear_sky(&self, hour: f64) -> f64 {
        if hour <= self.sunrise_h || hour >= self.sunset_h {
            return 0.0;
        }
        let phase = (hour - self.sunrise_h) / (self.sunset_h - self.sunrise_h);
        (self.peak_wm2 * (std::f64::consts::PI * phase).sin()).max(0.0)
    }

    pub fn solar_noon_h(&self) -> f64 {
        0.5 * (self.sunrise_h + self.sunset_h)
    }
}

/// Sky condition drawn for one day.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DayCondition {
    pub clear: bool,
    /// Mean attenuation; 1 on clear days.
    pub attenuation: f64,
}

/// Per-day sky conditions; the same draws the generator uses.
pub fn day_conditions(days: u32, profile: &SolarProfile) -> Vec<DayCondition> {
    let mut rng = ChaCha8Rng::seed_from_u64(profile.seed);
    rng.set_stream(0);
    (0..days)
        .map(|_| {
            let clear = rng.random::<f64>() < profile.clear_day_probability;
            let span = profile.overcast_max - profile.overcast_min;
            let overcast = profile.overcast_min + span * rng.random::<f64>();
            DayCondition {
                clear,
                attenuation: if clear { 1.0 } else { overcast },
            }
        })
        .collect()
}

/// Seeded synthetic irradiance at 60 s resolution.
///
/// Each sample is the clear-sky half-sine evaluated at the middle of its
/// minute, times the day's attenuation, times an AR(1) fluctuation on
/// overcast days, clipped to [0, 1] of clear sky.
pub fn generate_synthetic_irradiance(
    days: u32,
    profile: &SolarProfile,
    start_time: DateTime<Utc>,
) -> Result<IrradianceTrace, HarvestError> {
    if days == 0 {
        return Err(HarvestError::InvalidParameter("days must be >= 1".into()));
    }
    profile.validate()?;
    let resolution = 60u32;
    let per_day = 86_400 / resolution as usize;
    let conditions = day_conditions(days, profile);

    let mut noise_rng = ChaCha8Rng::seed_from_u64(profile.seed);
    noise_rng.set_stream(1);
    let rho = profile.cloud_correlation;
    let innovation = (1.0 - rho * rho).sqrt();
    let mut fluctuation = 0.0f64;

    let mut samples = Vec::with_capacity(per_day * days as usize);
    for condition in &conditions {
        for minute in 0..per_day {
            let z: f64 = StandardNormal.sample(&mut noise_rng);
            fluctuation = rho * fluctuation + innovation * profile.cloud_noise * z;
            let hour = (minute as f64 + 0.5) * resolution as f64 / 3600.0;
            let clear_sky = profile.clear_sky(hour);
            let factor = if condition.clear {
                1.0
            } else {
                (condition.attenuation * (1.0 + fluctuation)).clamp(0.0, 1.0)
            };
            samples.push(clear_sky * factor);
        }
    }
    IrradianceTrace::new(start_time, resolution, samples)
}
