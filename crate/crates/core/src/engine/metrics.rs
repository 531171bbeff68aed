// SPDX-License-Identifier: Apache-2.0
use serde::Serialize;

use super::{EventKind, SimEvent, VoltageSample};
use crate::device::PowerState;

const DAY: f64 = 86_400.0;

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct DayMetrics {
    pub day: u64,
    /// Whether the run covers the whole day.
    pub complete: bool,
    pub hot_fixes: u64,
    pub hot_ephemeris: u64,
    pub warm_ephemeris: u64,
    pub cold_starts: u64,
    pub total_fixes: u64,
    pub skipped_fixes: u64,
    pub transmissions: u64,
    pub depletions: u64,
}

/// Fix-mode counts plus reliability diagnostics for one run.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct SimMetrics {
    pub hot_fixes: u64,
    pub hot_ephemeris: u64,
    pub warm_ephemeris: u64,
    pub cold_starts: u64,
    pub total_fixes: u64,
    /// Over complete days only.
    pub fixes_per_day_mean: f64,
    /// Population deviation over complete days.
    pub fixes_per_day_std: f64,
    pub complete_days: u64,
    pub skipped_fixes: u64,
    pub failed_tasks: u64,
    pub transmissions: u64,
    pub skipped_transmissions: u64,
    pub failed_transmissions: u64,
    pub depletion_count: u64,
    pub total_off_seconds: f64,
    /// Longest stretch without a successful fix, run edges included.
    pub longest_data_gap: f64,
    pub min_voltage: f64,
    /// Lowest voltage observed while powered on.
    pub min_voltage_on: f64,
    pub per_day: Vec<DayMetrics>,
}

fn population_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

pub fn compute_metrics(events: &[SimEvent], series: &[VoltageSample], run_length: u64) -> SimMetrics {
    let run = run_length as f64;
    let n_days = (run_length as f64 / DAY).ceil().max(1.0) as u64;
    let complete_days = run_length / 86_400;
    let mut per_day: Vec<DayMetrics> = (0..n_days)
        .map(|day| DayMetrics {
            day,
            complete: day < complete_days,
            ..DayMetrics::default()
        })
        .collect();

    let mut m = SimMetrics {
        complete_days,
        ..SimMetrics::default()
    };
    let mut fix_times = Vec::new();
    let mut off_since: Option<f64> = None;

    for ev in events {
        let day = ((ev.time / DAY).floor() as u64).min(n_days - 1) as usize;
        let d = &mut per_day[day];
        match ev.kind {
            EventKind::FixHot => {
                m.hot_fixes += 1;
                d.hot_fixes += 1;
            }
            EventKind::FixHotEph => {
                m.hot_ephemeris += 1;
                d.hot_ephemeris += 1;
            }
            EventKind::FixWarmEph => {
                m.warm_ephemeris += 1;
                d.warm_ephemeris += 1;
            }
            EventKind::FixCold => {
                m.cold_starts += 1;
                d.cold_starts += 1;
            }
            EventKind::FixSkipped(_) => {
                m.skipped_fixes += 1;
                d.skipped_fixes += 1;
            }
            EventKind::Transmit { .. } => {
                m.transmissions += 1;
                d.transmissions += 1;
            }
            EventKind::TransmitSkipped(_) => m.skipped_transmissions += 1,
            EventKind::TransmitFailed => m.failed_transmissions += 1,
            EventKind::TaskFailed(_) => m.failed_tasks += 1,
            EventKind::Depletion => {
                m.depletion_count += 1;
                d.depletions += 1;
                off_since = Some(ev.time);
            }
            EventKind::Recovery => {
                if let Some(start) = off_since.take() {
                    m.total_off_seconds += ev.time - start;
                }
            }
            EventKind::Sense | EventKind::ClampStart | EventKind::ClampEnd => {}
        }
        if ev.kind.is_fix() {
            fix_times.push(ev.time);
            d.total_fixes += 1;
        }
    }
    if let Some(start) = off_since {
        m.total_off_seconds += run - start;
    }

    m.total_fixes = m.hot_fixes + m.hot_ephemeris + m.warm_ephemeris + m.cold_starts;

    let mut last = 0.0f64;
    let mut gap = 0.0f64;
    for &t in &fix_times {
        gap = gap.max(t - last);
        last = t;
    }
    m.longest_data_gap = gap.max(run - last);

    let daily: Vec<f64> = per_day
        .iter()
        .filter(|d| d.complete)
        .map(|d| d.total_fixes as f64)
        .collect();
    (m.fixes_per_day_mean, m.fixes_per_day_std) = population_std(&daily);

    m.min_voltage = series.iter().map(|s| s.voltage).fold(f64::INFINITY, f64::min);
    m.min_voltage_on = series
        .iter()
        .filter(|s| s.power == PowerState::On)
        .map(|s| s.voltage)
        .fold(f64::INFINITY, f64::min);
    if series.is_empty() {
        m.min_voltage = f64::NAN;
    }
    if !m.min_voltage_on.is_finite() {
        m.min_voltage_on = f64::NAN;
    }
    m.per_day = per_day;
    m
}
