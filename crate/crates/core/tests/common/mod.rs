// SPDX-License-Identifier: Apache-2.0
#![allow(dead_code)]

use wildtrack_core::config::TaskSwitches;
use wildtrack_core::harvest::default_start_time;
use wildtrack_core::{validate_config, CapacitorSpec, HarvestConfig, HarvestTrace, SystemConfig, ValidatedConfig};

pub fn validated(config: SystemConfig) -> ValidatedConfig {
    validate_config(&config).expect("test config is valid")
}

pub fn config_with(capacitance: f64, fix: u64) -> SystemConfig {
    SystemConfig {
        capacitor: CapacitorSpec::paired(capacitance).expect("supported size"),
        intervals: wildtrack_core::config::Intervals {
            fix,
            ..Default::default()
        },
        ..SystemConfig::default()
    }
}

pub fn quiet(mut config: SystemConfig) -> SystemConfig {
    config.schedule = TaskSwitches::NONE;
    config
}

/// Zero-kinetic trace from per-minute combined currents.
pub fn trace_from(combined: Vec<f64>) -> HarvestTrace {
    let n = combined.len();
    HarvestTrace::new(default_start_time(), 60, combined, vec![0.0; n], 1.0).unwrap()
}

/// `(minutes, amperes)` blocks concatenated.
pub fn piecewise(blocks: &[(usize, f64)]) -> HarvestTrace {
    trace_from(blocks.iter().flat_map(|&(n, a)| std::iter::repeat_n(a, n)).collect())
}

/// Default synthetic winter trace (seeded solar + kinetic).
pub fn winter_trace(days: u32) -> HarvestTrace {
    let h = HarvestConfig::default();
    let irr = h.synthetic_irradiance(days).unwrap();
    h.build_trace(&irr, None, 0.88).unwrap()
}

/// Explicit-Euler integration of C dV/dt = I_H − V/R with step `h`.
pub fn euler(mut v: f64, capacitance: f64, i_h: f64, r: f64, duration: f64, h: f64) -> f64 {
    let steps = (duration / h).round() as u64;
    let h = duration / steps as f64;
    for _ in 0..steps {
        v += h * (i_h - v / r) / capacitance;
    }
    v
}
