// SPDX-License-Identifier: Apache-2.0
//! Task energy tables and current composition.
//!
//! Component-level draws are the measured/datasheet values for the GPS
//! module, MCU, NB-IoT modem and supercapacitor. System-level task currents
//! are composed from those rows: base component + MCU active base (when the
//! MCU is awake) + GPS hardware backup (when the GPS is not running) +
//! capacitor leakage. With the 5 F leakage of 30 µA the composition
//! reproduces the system-level table exactly.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// MCU active base current (mA).
pub const MCU_ACTIVE_BASE_MA: f64 = 0.091;
/// GPS hardware backup current keeping RTC and backup RAM alive (mA).
pub const GPS_BACKUP_MA: f64 = 0.028;
/// Leakage folded into the published system-level currents (5 F part, mA).
pub const REFERENCE_LEAKAGE_MA: f64 = 0.030;
/// Regulated supply rail (V).
pub const DEFAULT_SUPPLY_V: f64 = 3.3;

/// Identifies a row of the component table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Component {
    GpsHotStart,
    GpsWarmStart,
    GpsEphemerisDownload,
    GpsColdStart,
    GpsI2cWrite,
    GpsHardwareBackup,
    McuSleep,
    NbIot,
    McuAdcRead,
    McuI2cReadCoulomb,
    McuActiveBase,
    CapacitorLeakage,
}

/// One measured or datasheet draw of a single component.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentDraw {
    pub component: Component,
    pub name: &'static str,
    /// Mean current in mA.
    pub current: f64,
    /// Mean duration in seconds; `None` for continuous states.
    pub duration: Option<f64>,
    /// Standard deviation of the current, where measured.
    pub current_std: Option<f64>,
    /// Standard deviation of the duration, where measured.
    pub duration_std: Option<f64>,
    pub notes: &'static str,
}

impl ComponentDraw {
    const fn new(
        component: Component,
        name: &'static str,
        current: f64,
        duration: Option<f64>,
        notes: &'static str,
    ) -> Self {
        Self {
            component,
            name,
            current,
            duration,
            current_std: None,
            duration_std: None,
            notes,
        }
    }
}

static COMPONENT_TABLE: [ComponentDraw; 12] = [
    ComponentDraw::new(
        Component::GpsHotStart,
        "GPS hot start",
        7.5,
        Some(1.0),
        "SAM-M10Q datasheet",
    ),
    ComponentDraw::new(
        Component::GpsWarmStart,
        "GPS warm start",
        7.5,
        Some(4.0),
        "AssistNow Autonomous",
    ),
    ComponentDraw::new(
        Component::GpsEphemerisDownload,
        "GPS ephemeris download",
        7.5,
        Some(30.0),
        "module stays on after a fix",
    ),
    ComponentDraw {
        component: Component::GpsColdStart,
        name: "GPS cold start",
        current: 8.0,
        duration: Some(36.118),
        current_std: None,
        duration_std: Some(1.96),
        notes: "measured time-to-fix",
    },
    ComponentDraw::new(
        Component::GpsI2cWrite,
        "GPS I2C write",
        2.0,
        Some(0.00038),
        "12 bytes at 400 kbps incl. CPU overhead",
    ),
    ComponentDraw::new(
        Component::GpsHardwareBackup,
        "GPS hardware backup",
        0.028,
        None,
        "RTC + backup RAM",
    ),
    ComponentDraw::new(
        Component::McuSleep,
        "MCU Sleep (standby)",
        0.00065,
        None,
        "standby with RTC",
    ),
    ComponentDraw {
        component: Component::NbIot,
        name: "NB-IoT",
        current: 20.65,
        duration: Some(7.89),
        current_std: Some(2.78),
        duration_std: Some(1.66),
        notes: "wake, attach, read 480 B from flash, transmit",
    },
    ComponentDraw::new(
        Component::McuAdcRead,
        "MCU ADC read",
        0.311,
        Some(0.00005),
        "47.5 cycles at 1 MHz",
    ),
    ComponentDraw::new(
        Component::McuI2cReadCoulomb,
        "MCU I2C read Coulomb",
        0.091,
        Some(0.00023),
        "32-bit read at 400 kbps",
    ),
    ComponentDraw::new(
        Component::McuActiveBase,
        "MCU active base",
        MCU_ACTIVE_BASE_MA,
        None,
        "",
    ),
    ComponentDraw::new(
        Component::CapacitorLeakage,
        "Capacitor leakage",
        REFERENCE_LEAKAGE_MA,
        None,
        "5.5 V, 5 F part",
    ),
];

/// All component rows in table order.
pub fn builtin_component_table() -> &'static [ComponentDraw] {
    &COMPONENT_TABLE
}

pub fn component(component: Component) -> &'static ComponentDraw {
    COMPONENT_TABLE
        .iter()
        .find(|row| row.component == component)
        .expect("every component has a table row")
}

/// Looks a component row up by its printed name (case-insensitive).
pub fn component_by_name(name: &str) -> Option<&'static ComponentDraw> {
    COMPONENT_TABLE.iter().find(|row| row.name.eq_ignore_ascii_case(name))
}

/// A system-level task: what the whole device draws while doing one thing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TaskKind {
    HotStart,
    WarmStart,
    EphemerisDownload,
    ColdStart,
    GpsI2cWrite,
    Sleep,
    NbIot,
    AdcRead,
    I2cReadCoulomb,
    TurnedOff,
}

impl TaskKind {
    pub const ALL: [TaskKind; 10] = [
        TaskKind::HotStart,
        TaskKind::WarmStart,
        TaskKind::EphemerisDownload,
        TaskKind::ColdStart,
        TaskKind::GpsI2cWrite,
        TaskKind::Sleep,
        TaskKind::NbIot,
        TaskKind::AdcRead,
        TaskKind::I2cReadCoulomb,
        TaskKind::TurnedOff,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TaskKind::HotStart => "HotStart",
            TaskKind::WarmStart => "WarmStart",
            TaskKind::EphemerisDownload => "EphemerisDownload",
            TaskKind::ColdStart => "ColdStart",
            TaskKind::GpsI2cWrite => "GpsI2cWrite",
            TaskKind::Sleep => "Sleep",
            TaskKind::NbIot => "NbIot",
            TaskKind::AdcRead => "AdcRead",
            TaskKind::I2cReadCoulomb => "I2cReadCoulomb",
            TaskKind::TurnedOff => "TurnedOff",
        }
    }

    /// The component row that dominates this task, if any.
    pub fn base_component(self) -> Option<Component> {
        match self {
            TaskKind::HotStart => Some(Component::GpsHotStart),
            TaskKind::WarmStart => Some(Component::GpsWarmStart),
            TaskKind::EphemerisDownload => Some(Component::GpsEphemerisDownload),
            TaskKind::ColdStart => Some(Component::GpsColdStart),
            TaskKind::GpsI2cWrite => Some(Component::GpsI2cWrite),
            TaskKind::Sleep => Some(Component::McuSleep),
            TaskKind::NbIot => Some(Component::NbIot),
            TaskKind::AdcRead => Some(Component::McuAdcRead),
            TaskKind::I2cReadCoulomb => Some(Component::McuI2cReadCoulomb),
            TaskKind::TurnedOff => None,
        }
    }

    pub fn includes_mcu_active_base(self) -> bool {
        matches!(
            self,
            TaskKind::HotStart
                | TaskKind::WarmStart
                | TaskKind::EphemerisDownload
                | TaskKind::ColdStart
                | TaskKind::GpsI2cWrite
                | TaskKind::NbIot
        )
    }

    pub fn includes_gps_backup(self) -> bool {
        matches!(
            self,
            TaskKind::Sleep | TaskKind::NbIot | TaskKind::AdcRead | TaskKind::I2cReadCoulomb
        )
    }

    /// Nominal duration in seconds; `None` for the continuous states.
    pub fn duration(self) -> Option<f64> {
        self.base_component().and_then(|c| component(c).duration)
    }

    pub fn is_gps(self) -> bool {
        matches!(
            self,
            TaskKind::HotStart | TaskKind::WarmStart | TaskKind::EphemerisDownload | TaskKind::ColdStart
        )
    }
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown task name `{0}`")]
pub struct UnknownTask(pub String);

impl FromStr for TaskKind {
    type Err = UnknownTask;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TaskKind::ALL
            .into_iter()
            .find(|task| task.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| UnknownTask(s.to_string()))
    }
}

/// System-level current (mA) of a task for a given capacitor leakage (mA).
pub fn compose_task_current(task: TaskKind, leakage: f64) -> f64 {
    debug_assert!(leakage > 0.0, "leakage must be positive");
    let base = task.base_component().map_or(0.0, |c| component(c).current);
    let mcu = if task.includes_mcu_active_base() {
        MCU_ACTIVE_BASE_MA
    } else {
        0.0
    };
    let backup = if task.includes_gps_backup() { GPS_BACKUP_MA } else { 0.0 };
    base + mcu + backup + leakage
}

/// Name-based variant of [`compose_task_current`].
pub fn compose_named_task_current(task: &str, leakage: f64) -> Result<f64, UnknownTask> {
    Ok(compose_task_current(task.parse()?, leakage))
}

/// Energy in mJ of drawing `current` mA for `duration` s from `v_supply` V.
pub fn task_energy(current: f64, duration: f64, v_supply: f64) -> f64 {
    current * duration * v_supply
}

/// One row of the system-level table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TaskProfile {
    pub task: TaskKind,
    pub includes_mcu_active_base: bool,
    pub includes_gps_backup: bool,
    /// mA
    pub total_current: f64,
    /// s
    pub duration: Option<f64>,
    /// mJ
    pub energy: Option<f64>,
}

impl TaskProfile {
    pub fn new(task: TaskKind, leakage: f64, v_supply: f64) -> Self {
        let total_current = compose_task_current(task, leakage);
        let duration = task.duration();
        Self {
            task,
            includes_mcu_active_base: task.includes_mcu_active_base(),
            includes_gps_backup: task.includes_gps_backup(),
            total_current,
            duration,
            energy: duration.map(|d| task_energy(total_current, d, v_supply)),
        }
    }
}

/// The full system-level table for a given leakage.
pub fn system_task_table(leakage: f64, v_supply: f64) -> Vec<TaskProfile> {
    TaskKind::ALL
        .into_iter()
        .map(|task| TaskProfile::new(task, leakage, v_supply))
        .collect()
}

/// Lowest starting voltage from which the capacitor alone can deliver
/// `task_energy` mJ without falling below `v_min`: √(v_min² + 2E/C).
pub fn safe_voltage_threshold(task_energy: f64, capacitance: f64, v_min: f64) -> f64 {
    let joules = task_energy / 1000.0;
    (v_min * v_min + 2.0 * joules / capacitance).sqrt()
}
