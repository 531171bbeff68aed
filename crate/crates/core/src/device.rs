// SPDX-License-Identifier: Apache-2.0
//! Tracker behaviour: scheduling, GPS mode selection, power hysteresis,
//! the flash-backed data buffer and the Coulomb counter.

use std::fmt;

use serde::Serialize;

use crate::config::{SystemConfig, VoltageThresholds};
use crate::energy::TaskKind;

/// Bytes of a stored position: longitude/latitude (8) and GPS time (4).
pub const POSITION_BYTES: usize = 12;
/// Bytes of a 32-bit Coulomb counter reading.
pub const COULOMB_BYTES: usize = 4;
pub const SAMPLE_BYTES: usize = POSITION_BYTES + COULOMB_BYTES;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PowerState {
    On,
    Off,
}

impl fmt::Display for PowerState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PowerState::On => "On",
            PowerState::Off => "Off",
        })
    }
}

/// What the GPS module remembers between fixes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GpsContext {
    /// Seconds since the last ephemeris refresh; `None` when there is no usable ephemeris.
    pub ephemeris_age: Option<u64>,
    /// RTC and backup RAM alive.
    pub backup_valid: bool,
}

impl GpsContext {
    pub fn fresh() -> Self {
        Self {
            ephemeris_age: Some(0),
            backup_valid: true,
        }
    }

    pub fn lost() -> Self {
        Self {
            ephemeris_age: None,
            backup_valid: false,
        }
    }

    pub fn with_age(age: Option<u64>) -> Self {
        match age {
            Some(_) => Self {
                ephemeris_age: age,
                backup_valid: true,
            },
            None => Self::lost(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SkipReason {
    LowVoltage,
    /// Not enough of the tick left to run the task.
    Overrun,
}

impl fmt::Display for SkipReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SkipReason::LowVoltage => "low-voltage",
            SkipReason::Overrun => "overrun",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum GpsMode {
    Hot,
    HotWithEphemeris,
    WarmWithEphemeris,
    Cold,
    Skip(SkipReason),
}

impl GpsMode {
    /// The task segments that make up this fix, in execution order.
    pub fn plan(self) -> &'static [TaskKind] {
        match self {
            GpsMode::Hot => &[TaskKind::HotStart, TaskKind::GpsI2cWrite, TaskKind::I2cReadCoulomb],
            GpsMode::HotWithEphemeris => &[
                TaskKind::HotStart,
                TaskKind::EphemerisDownload,
                TaskKind::GpsI2cWrite,
                TaskKind::I2cReadCoulomb,
            ],
            GpsMode::WarmWithEphemeris => &[
                TaskKind::WarmStart,
                TaskKind::EphemerisDownload,
                TaskKind::GpsI2cWrite,
                TaskKind::I2cReadCoulomb,
            ],
            GpsMode::Cold => &[TaskKind::ColdStart, TaskKind::GpsI2cWrite, TaskKind::I2cReadCoulomb],
            GpsMode::Skip(_) => &[],
        }
    }

    pub fn refreshes_ephemeris(self) -> bool {
        matches!(
            self,
            GpsMode::HotWithEphemeris | GpsMode::WarmWithEphemeris | GpsMode::Cold
        )
    }
}

/// Picks the fix mode from ephemeris freshness and the present voltage.
pub fn select_gps_mode(
    gps: &GpsContext,
    voltage: f64,
    thresholds: &VoltageThresholds,
    cold_start_threshold: f64,
    config: &SystemConfig,
) -> GpsMode {
    let skip = GpsMode::Skip(SkipReason::LowVoltage);
    let eph = &config.ephemeris;
    let age = match (gps.backup_valid, gps.ephemeris_age) {
        (true, Some(age)) if age <= eph.warm_limit => age,
        _ => {
            return if voltage >= cold_start_threshold {
                GpsMode::Cold
            } else {
                skip
            };
        }
    };
    if age > eph.hot_limit {
        return if voltage >= thresholds.warm_eph {
            GpsMode::WarmWithEphemeris
        } else {
            skip
        };
    }
    if age >= eph.refresh_age && voltage >= thresholds.hot_eph {
        GpsMode::HotWithEphemeris
    } else if voltage >= thresholds.hot_start {
        GpsMode::Hot
    } else {
        skip
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ScheduledTask {
    Sense,
    Fix,
    Transmit,
}

/// Tasks due at `clock`, in execution order.
pub fn due_tasks(clock: u64, config: &SystemConfig) -> Vec<ScheduledTask> {
    let iv = &config.intervals;
    let sw = &config.schedule;
    let mut tasks = Vec::with_capacity(3);
    if sw.sensing && clock.is_multiple_of(iv.sense) {
        tasks.push(ScheduledTask::Sense);
    }
    if sw.gps && clock.is_multiple_of(iv.fix) {
        tasks.push(ScheduledTask::Fix);
    }
    if sw.nbiot && clock.is_multiple_of(iv.transmit) {
        tasks.push(ScheduledTask::Transmit);
    }
    tasks
}

/// A stored fix waiting for upload.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DataSample {
    /// s since simulation start
    pub time: f64,
    /// C accumulated since the previous reading
    pub coulomb_value: f64,
}

impl DataSample {
    pub const fn wire_size() -> usize {
        SAMPLE_BYTES
    }
}

/// Uplink payload for `samples` stored fixes.
pub fn payload_bytes(samples: usize) -> usize {
    SAMPLE_BYTES * samples
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeviceState {
    pub power: PowerState,
    pub gps: GpsContext,
    pub buffer: Vec<DataSample>,
    /// C of kinetic charge since the last read.
    pub coulomb_accumulator: f64,
    /// s since simulation start
    pub clock: u64,
    coulomb_read_total: f64,
}

impl DeviceState {
    pub fn new(gps: GpsContext) -> Self {
        Self {
            power: PowerState::On,
            gps,
            buffer: Vec::new(),
            coulomb_accumulator: 0.0,
            clock: 0,
            coulomb_read_total: 0.0,
        }
    }

    pub fn from_config(config: &SystemConfig) -> Self {
        Self::new(GpsContext::with_age(config.ephemeris.initial_age))
    }

    /// Moves the clock forward and ages the ephemeris.
    pub fn advance(&mut self, seconds: u64) {
        self.clock += seconds;
        if let Some(age) = self.gps.ephemeris_age.as_mut() {
            *age += seconds;
        }
    }

    /// Integrates kinetic current (A) over `seconds` into the counter.
    pub fn accumulate_kinetic(&mut self, current: f64, seconds: f64) {
        self.coulomb_accumulator += current * seconds;
    }

    /// Sum of every value returned by [`Self::read_coulomb`].
    pub fn coulomb_read_total(&self) -> f64 {
        self.coulomb_read_total
    }

    pub fn read_coulomb(&mut self) -> f64 {
        let value = std::mem::take(&mut self.coulomb_accumulator);
        self.coulomb_read_total += value;
        value
    }

    /// Records a completed fix taken at `time`, including its Coulomb reading.
    pub fn on_fix_success(&mut self, mode: GpsMode, time: f64, coulomb_value: f64) {
        self.buffer.push(DataSample { time, coulomb_value });
        self.gps.backup_valid = true;
        if mode.refreshes_ephemeris() {
            self.gps.ephemeris_age = Some(0);
        }
    }

    /// Empties the buffer after a successful upload, returning how many samples left.
    pub fn on_transmit_success(&mut self) -> usize {
        let sent = self.buffer.len();
        self.buffer.clear();
        sent
    }

    /// Voltage fell below v_min: shut down and lose the GPS backup domain.
    pub fn on_depletion(&mut self) {
        self.power = PowerState::Off;
        self.gps = GpsContext::lost();
    }

    /// Turns the device back on if `voltage` reached the turn-on level.
    pub fn on_recovery(&mut self, voltage: f64, thresholds: &VoltageThresholds) -> bool {
        if self.power == PowerState::Off && voltage >= thresholds.v_turn_on {
            self.power = PowerState::On;
            true
        } else {
            false
        }
    }
}
