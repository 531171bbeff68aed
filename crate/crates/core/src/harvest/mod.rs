// SPDX-License-Identifier: Apache-2.0
//! Harvested-current traces: solar, kinetic and their combination.

mod io;
pub mod kinetic;
pub mod solar;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

pub use io::{
    load_harvest_csv, load_irradiance_csv, read_irradiance_csv, write_harvest_csv, write_irradiance_csv, CsvLoadReport,
    DEFAULT_GAP_FILL_LIMIT,
};
pub use kinetic::{generate_kinetic_trace, ActivityProfile, Periods};
pub use solar::{
    day_conditions, generate_synthetic_irradiance, solar_current_from_irradiance, DayCondition, IrradianceTrace,
    SolarChain, SolarProfile,
};

#[derive(Debug, thiserror::Error)]
pub enum HarvestError {
    #[error("negative irradiance {value} at sample {index}")]
    NegativeIrradiance { index: usize, value: f64 },
    #[error("series lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("line {line}: {message}")]
    Malformed { line: u64, message: String },
    #[error("line {line}: timestamp does not follow the previous row by {resolution} s steps")]
    NonMonotone { line: u64, resolution: u32 },
    #[error("line {line}: gap of {missing} samples exceeds the fill limit {limit}")]
    GapTooLarge { line: u64, missing: u64, limit: u64 },
    #[error("trace file has no data rows")]
    Empty,
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Elementwise `efficiency × (solar + kinetic)`.
pub fn combine_sources(solar: &[f64], kinetic: &[f64], efficiency: f64) -> Result<Vec<f64>, HarvestError> {
    if solar.len() != kinetic.len() {
        return Err(HarvestError::LengthMismatch(solar.len(), kinetic.len()));
    }
    if !(efficiency > 0.0 && efficiency <= 1.0) {
        return Err(HarvestError::InvalidParameter(format!(
            "combiner efficiency must be in (0, 1], got {efficiency}"
        )));
    }
    Ok(solar.iter().zip(kinetic).map(|(s, k)| efficiency * (s + k)).collect())
}

/// Piecewise-constant harvested currents (A); sample `i` holds over
/// `[i·resolution, (i+1)·resolution)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HarvestTrace {
    pub start_time: DateTime<Utc>,
    pub resolution: u32,
    solar: Vec<f64>,
    kinetic: Vec<f64>,
    combined: Vec<f64>,
}

impl HarvestTrace {
    pub fn new(
        start_time: DateTime<Utc>,
        resolution: u32,
        solar: Vec<f64>,
        kinetic: Vec<f64>,
        efficiency: f64,
    ) -> Result<Self, HarvestError> {
        if resolution == 0 {
            return Err(HarvestError::InvalidParameter("resolution must be > 0".into()));
        }
        if let Some(bad) = solar.iter().chain(&kinetic).find(|x| !(**x >= 0.0)) {
            return Err(HarvestError::InvalidParameter(format!(
                "harvest currents must be non-negative, found {bad}"
            )));
        }
        let combined = combine_sources(&solar, &kinetic, efficiency)?;
        Ok(Self {
            start_time,
            resolution,
            solar,
            kinetic,
            combined,
        })
    }

    /// A trace with the same combined current at every sample and no source split.
    pub fn constant(start_time: DateTime<Utc>, resolution: u32, samples: usize, combined: f64) -> Self {
        Self::new(start_time, resolution, vec![combined; samples], vec![0.0; samples], 1.0)
            .expect("constant trace parameters are valid")
    }

    pub fn len(&self) -> usize {
        self.combined.len()
    }

    pub fn is_empty(&self) -> bool {
        self.combined.is_empty()
    }

    pub fn duration(&self) -> u64 {
        self.len() as u64 * self.resolution as u64
    }

    pub fn solar(&self) -> &[f64] {
        &self.solar
    }

    pub fn kinetic(&self) -> &[f64] {
        &self.kinetic
    }

    pub fn combined(&self) -> &[f64] {
        &self.combined
    }
}

/// Harvest section of a configuration file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HarvestConfig {
    /// Length of generated traces in days.
    pub days: u32,
    pub start_time: DateTime<Utc>,
    pub solar_chain: SolarChain,
    pub synthetic_solar: SolarProfile,
    pub kinetic: ActivityProfile,
}

impl Default for HarvestConfig {
    fn default() -> Self {
        Self {
            days: 14,
            start_time: default_start_time(),
            solar_chain: SolarChain::default(),
            synthetic_solar: SolarProfile::winter(),
            kinetic: ActivityProfile::default(),
        }
    }
}

/// 2023-11-24T00:00:00Z, the start of the winter preset.
pub fn default_start_time() -> DateTime<Utc> {
    DateTime::from_timestamp(1_700_784_000, 0).expect("valid timestamp")
}

impl HarvestConfig {
    /// Applies one seed to every generator.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.synthetic_solar.seed = seed;
        self.kinetic.seed = seed.wrapping_add(1);
        self
    }

    pub fn synthetic_irradiance(&self, days: u32) -> Result<IrradianceTrace, HarvestError> {
        generate_synthetic_irradiance(days, &self.synthetic_solar, self.start_time)
    }

    /// Builds the combined trace from irradiance plus either a supplied or a
    /// generated kinetic series.
    pub fn build_trace(
        &self,
        irradiance: &IrradianceTrace,
        kinetic: Option<Vec<f64>>,
        efficiency: f64,
    ) -> Result<HarvestTrace, HarvestError> {
        let solar = solar_current_from_irradiance(irradiance, &self.solar_chain)?;
        let kinetic = match kinetic {
            Some(k) => k,
            None => {
                let per_day = 86_400 / irradiance.resolution as usize;
                let days = solar.len().div_ceil(per_day.max(1)) as u32;
                let mut k = generate_kinetic_trace(
                    days.max(1),
                    &self.kinetic,
                    irradiance.resolution,
                    self.solar_chain.v_supply,
                )?;
                k.truncate(solar.len());
                k
            }
        };
        HarvestTrace::new(irradiance.start_time, irradiance.resolution, solar, kinetic, efficiency)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn combine_examples() {
        assert_eq!(combine_sources(&[0.0], &[0.0], 0.88).unwrap(), vec![0.0]);
        assert_abs_diff_eq!(
            combine_sources(&[0.010], &[0.002], 0.88).unwrap()[0],
            0.01056,
            epsilon = 1e-15
        );
        assert_eq!(combine_sources(&[0.123], &[0.0], 1.0).unwrap(), vec![0.123]);
        assert!(matches!(
            combine_sources(&[1.0, 2.0], &[1.0], 0.88),
            Err(HarvestError::LengthMismatch(2, 1))
        ));
    }

    #[test]
    fn build_trace_generates_matching_kinetic() {
        let cfg = HarvestConfig::default();
        let irr = cfg.synthetic_irradiance(2).unwrap();
        let trace = cfg.build_trace(&irr, None, 0.88).unwrap();
        assert_eq!(trace.len(), 2880);
        assert_eq!(trace.kinetic().len(), trace.solar().len());
        for i in 0..trace.len() {
            assert_abs_diff_eq!(
                trace.combined()[i],
                0.88 * (trace.solar()[i] + trace.kinetic()[i]),
                epsilon = 1e-18
            );
        }
    }

    proptest::proptest! {
        #[test]
        fn combine_is_linear_and_commutative(
            a in proptest::collection::vec(0.0f64..0.05, 1..50),
            eff in 0.01f64..1.0,
            k in 0.0f64..10.0,
        ) {
            let b: Vec<f64> = a.iter().rev().cloned().collect();
            let ab = combine_sources(&a, &b, eff).unwrap();
            let ba = combine_sources(&b, &a, eff).unwrap();
            proptest::prop_assert_eq!(&ab, &ba);
            let scaled_a: Vec<f64> = a.iter().map(|x| x * k).collect();
            let scaled_b: Vec<f64> = b.iter().map(|x| x * k).collect();
            let scaled = combine_sources(&scaled_a, &scaled_b, eff).unwrap();
            for (s, x) in scaled.iter().zip(&ab) {
                proptest::prop_assert!((s - k * x).abs() <= 1e-12 * (1.0 + s.abs()));
            }
        }
    }
}
