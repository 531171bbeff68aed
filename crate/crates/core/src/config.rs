// SPDX-License-Identifier: Apache-2.0
//! System configuration, defaults and validation.
//!
//! The on-disk form is TOML with nested sections; every field has a default
//! so an empty file is a valid configuration.
//!
//! ```toml
//! random_seed = 42
//! initial_voltage = 5.5
//!
//! [capacitor]
//! capacitance = 2.5      # F; leakage is paired automatically for 1, 2.5 and 5 F
//! leakage_current = 0.016 # mA, optional for the paired sizes
//!
//! [thresholds]
//! hot_start = 1.9
//!
//! [intervals]
//! fix = 120
//!
//! [harvest]
//! days = 14
//! ```

use std::fmt;
use std::ops::Deref;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::energy::{self, TaskKind, DEFAULT_SUPPLY_V};
use crate::harvest::HarvestConfig;

/// Supported capacitor sizes with their datasheet leakage (F, mA).
pub const CAPACITOR_PAIRINGS: [(f64, f64); 3] = [(1.0, 0.010), (2.5, 0.016), (5.0, 0.030)];

/// Capacitor rated voltage (V).
pub const DEFAULT_V_MAX: f64 = 5.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CapacitorSection")]
pub struct CapacitorSpec {
    /// F
    pub capacitance: f64,
    /// mA
    pub leakage_current: f64,
    /// V
    pub v_max: f64,
}

impl CapacitorSpec {
    /// One of the paired sizes, or `None` if the capacitance is not in the table.
    pub fn paired(capacitance: f64) -> Option<Self> {
        CAPACITOR_PAIRINGS
            .iter()
            .find(|(c, _)| (c - capacitance).abs() < 1e-9)
            .map(|&(capacitance, leakage_current)| Self {
                capacitance,
                leakage_current,
                v_max: DEFAULT_V_MAX,
            })
    }

    pub fn with_leakage(capacitance: f64, leakage_current: f64) -> Self {
        Self {
            capacitance,
            leakage_current,
            v_max: DEFAULT_V_MAX,
        }
    }
}

impl Default for CapacitorSpec {
    fn default() -> Self {
        Self::paired(2.5).expect("2.5 F is a paired size")
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CapacitorSection {
    #[serde(default = "default_capacitance")]
    capacitance: f64,
    leakage_current: Option<f64>,
    #[serde(default = "default_v_max")]
    v_max: f64,
}

fn default_capacitance() -> f64 {
    2.5
}

fn default_v_max() -> f64 {
    DEFAULT_V_MAX
}

impl TryFrom<CapacitorSection> for CapacitorSpec {
    type Error = String;

    fn try_from(raw: CapacitorSection) -> Result<Self, Self::Error> {
        let leakage_current = match raw.leakage_current {
            Some(leak) => leak,
            None => CapacitorSpec::paired(raw.capacitance)
                .map(|spec| spec.leakage_current)
                .ok_or_else(|| {
                    format!(
                        "capacitance {} F has no default leakage pairing; set capacitor.leakage_current",
                        raw.capacitance
                    )
                })?,
        };
        Ok(Self {
            capacitance: raw.capacitance,
            leakage_current,
            v_max: raw.v_max,
        })
    }
}

/// Voltage thresholds (V) gating the power state and each task.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VoltageThresholds {
    pub v_min: f64,
    pub v_turn_on: f64,
    pub hot_start: f64,
    pub hot_eph: f64,
    pub warm_eph: f64,
    pub nbiot: f64,
    /// Filled from the safe-threshold bound during validation when absent.
    pub cold_start: Option<f64>,
}

impl Default for VoltageThresholds {
    fn default() -> Self {
        Self {
            v_min: 1.8,
            v_turn_on: 2.2,
            hot_start: 1.9,
            hot_eph: 2.0,
            warm_eph: 2.1,
            nbiot: 2.0,
            cold_start: None,
        }
    }
}

/// Scheduling cadence, all in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Intervals {
    pub base_tick: u64,
    pub sense: u64,
    pub fix: u64,
    pub transmit: u64,
}

impl Default for Intervals {
    fn default() -> Self {
        Self {
            base_tick: 60,
            sense: 60,
            fix: 120,
            transmit: 3600,
        }
    }
}

/// Ephemeris aging limits, all in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EphemerisPolicy {
    /// Oldest ephemeris usable for a hot start.
    pub hot_limit: u64,
    /// Oldest ephemeris usable for a warm start.
    pub warm_limit: u64,
    /// Age at which a fix also downloads fresh ephemeris.
    pub refresh_age: u64,
    /// Ephemeris age at t = 0; `None` starts with no backup (first fix is cold).
    pub initial_age: Option<u64>,
}

impl Default for EphemerisPolicy {
    fn default() -> Self {
        Self {
            hot_limit: 14_400,
            warm_limit: 172_800,
            refresh_age: 10_800,
            initial_age: Some(0),
        }
    }
}

/// Which periodic activities are scheduled at all.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TaskSwitches {
    pub sensing: bool,
    pub gps: bool,
    pub nbiot: bool,
}

impl TaskSwitches {
    pub const NONE: TaskSwitches = TaskSwitches {
        sensing: false,
        gps: false,
        nbiot: false,
    };
}

impl Default for TaskSwitches {
    fn default() -> Self {
        Self {
            sensing: true,
            gps: true,
            nbiot: true,
        }
    }
}

/// Optional stochastic and payload-dependent behaviour; all off by default.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Variability {
    /// Per-event Gaussian jitter (truncated at ±3σ) on measured task variances.
    pub jitter: bool,
    /// Scale transmit duration by payload size relative to the 480-byte profile.
    pub payload_energy_scaling: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemConfig {
    pub capacitor: CapacitorSpec,
    pub thresholds: VoltageThresholds,
    pub v_supply: f64,
    pub intervals: Intervals,
    pub ephemeris: EphemerisPolicy,
    pub schedule: TaskSwitches,
    pub initial_voltage: f64,
    pub combiner_efficiency: f64,
    pub random_seed: u64,
    pub variability: Variability,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self {
            capacitor: CapacitorSpec::default(),
            thresholds: VoltageThresholds::default(),
            v_supply: DEFAULT_SUPPLY_V,
            intervals: Intervals::default(),
            ephemeris: EphemerisPolicy::default(),
            schedule: TaskSwitches::default(),
            initial_voltage: DEFAULT_V_MAX,
            combiner_efficiency: 0.88,
            random_seed: 42,
            variability: Variability::default(),
        }
    }
}

/// A configuration file: device parameters plus the harvest section.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "toml::Table")]
pub struct ConfigFile {
    #[serde(flatten)]
    pub system: SystemConfig,
    pub harvest: HarvestConfig,
}

// Split by hand: `flatten` would let unknown top-level keys through.
impl TryFrom<toml::Table> for ConfigFile {
    type Error = toml::de::Error;

    fn try_from(mut table: toml::Table) -> Result<Self, Self::Error> {
        let harvest = match table.remove("harvest") {
            Some(section) => section.try_into()?,
            None => HarvestConfig::default(),
        };
        let system = toml::Value::Table(table).try_into()?;
        Ok(Self { system, harvest })
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigLoadError {
    #[error("reading {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("parsing {path}: {message}")]
    Parse { path: String, message: String },
}

impl ConfigFile {
    pub fn from_toml(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigLoadError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigLoadError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml(&text).map_err(|e| ConfigLoadError::Parse {
            path: path.display().to_string(),
            message: e.to_string(),
        })
    }
}

/// A violated configuration invariant.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub field: &'static str,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

impl std::error::Error for ConfigError {}

/// A threshold below the no-harvest safe bound for the work it gates.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigWarning {
    pub field: &'static str,
    pub configured: f64,
    pub safe_bound: f64,
}

impl fmt::Display for ConfigWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {:.3} V is below the capacitor-only safe bound {:.4} V",
            self.field, self.configured, self.safe_bound
        )
    }
}

/// A configuration that satisfied every invariant; read-only from here on.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidatedConfig {
    config: SystemConfig,
    cold_start_threshold: f64,
    warnings: Vec<ConfigWarning>,
}

impl ValidatedConfig {
    pub fn cold_start_threshold(&self) -> f64 {
        self.cold_start_threshold
    }

    pub fn warnings(&self) -> &[ConfigWarning] {
        &self.warnings
    }

    pub fn into_inner(self) -> SystemConfig {
        self.config
    }
}

impl Deref for ValidatedConfig {
    type Target = SystemConfig;

    fn deref(&self) -> &SystemConfig {
        &self.config
    }
}

/// Energy (mJ) of each fix plan at nominal durations, used for the safe bounds.
fn plan_energy(tasks: &[TaskKind], leakage: f64, v_supply: f64) -> f64 {
    tasks
        .iter()
        .map(|&task| {
            let current = energy::compose_task_current(task, leakage);
            energy::task_energy(current, task.duration().unwrap_or(0.0), v_supply)
        })
        .sum()
}

/// Default cold-start threshold: safe bound for the cold-start energy, rounded up to 10 mV.
pub fn default_cold_start_threshold(capacitor: &CapacitorSpec, v_min: f64, v_supply: f64) -> f64 {
    let cold = plan_energy(&[TaskKind::ColdStart], capacitor.leakage_current, v_supply);
    let bound = energy::safe_voltage_threshold(cold, capacitor.capacitance, v_min);
    // Guard against 2.0000000001 rounding up to 2.01.
    ((bound * 100.0) - 1e-9).ceil() / 100.0
}

pub fn validate_config(config: &SystemConfig) -> Result<ValidatedConfig, Vec<ConfigError>> {
    let mut errors = Vec::new();
    let mut fail = |field: &'static str, message: String| errors.push(ConfigError { field, message });

    let cap = &config.capacitor;
    if !(cap.capacitance > 0.0) {
        fail("capacitor.capacitance", format!("must be > 0, got {}", cap.capacitance));
    }
    if !(cap.leakage_current > 0.0) {
        fail(
            "capacitor.leakage_current",
            format!("must be > 0, got {}", cap.leakage_current),
        );
    }
    if !(cap.v_max > 0.0) {
        fail("capacitor.v_max", format!("must be > 0, got {}", cap.v_max));
    }
    if !(config.v_supply > 0.0) {
        fail("v_supply", format!("must be > 0, got {}", config.v_supply));
    }
    if !(config.combiner_efficiency > 0.0 && config.combiner_efficiency <= 1.0) {
        fail(
            "combiner_efficiency",
            format!("must be in (0, 1], got {}", config.combiner_efficiency),
        );
    }

    let th = &config.thresholds;
    if !(th.v_min > 0.0) {
        fail("thresholds.v_min", format!("must be > 0, got {}", th.v_min));
    }
    if !(th.v_min < th.v_turn_on) {
        fail(
            "thresholds.v_turn_on",
            format!("must exceed v_min {}, got {}", th.v_min, th.v_turn_on),
        );
    }
    if !(th.v_turn_on < cap.v_max) {
        fail(
            "thresholds.v_turn_on",
            format!("must be below v_max {}, got {}", cap.v_max, th.v_turn_on),
        );
    }
    let mut task_thresholds = vec![
        ("thresholds.hot_start", th.hot_start),
        ("thresholds.hot_eph", th.hot_eph),
        ("thresholds.warm_eph", th.warm_eph),
        ("thresholds.nbiot", th.nbiot),
    ];
    if let Some(cold) = th.cold_start {
        task_thresholds.push(("thresholds.cold_start", cold));
    }
    for (field, value) in task_thresholds {
        if !(value >= th.v_min && value < cap.v_max) {
            fail(
                field,
                format!("must lie in [v_min {}, v_max {}), got {}", th.v_min, cap.v_max, value),
            );
        }
    }

    let iv = &config.intervals;
    if iv.base_tick == 0 {
        fail("intervals.base_tick", "must be > 0".to_string());
    } else {
        for (field, value) in [
            ("intervals.sense", iv.sense),
            ("intervals.fix", iv.fix),
            ("intervals.transmit", iv.transmit),
        ] {
            if value == 0 || value % iv.base_tick != 0 {
                fail(
                    field,
                    format!("{value} s is not a multiple of base tick {} s", iv.base_tick),
                );
            }
        }
    }

    if config.initial_voltage > cap.v_max {
        fail(
            "initial_voltage",
            format!("{} V exceeds v_max {}", config.initial_voltage, cap.v_max),
        );
    } else if config.initial_voltage < th.v_min {
        fail(
            "initial_voltage",
            format!("{} V is below v_min {}", config.initial_voltage, th.v_min),
        );
    }

    let eph = &config.ephemeris;
    if !(eph.refresh_age < eph.hot_limit) {
        fail(
            "ephemeris.refresh_age",
            format!("must be below hot_limit {}, got {}", eph.hot_limit, eph.refresh_age),
        );
    }
    if !(eph.hot_limit < eph.warm_limit) {
        fail(
            "ephemeris.hot_limit",
            format!("must be below warm_limit {}, got {}", eph.warm_limit, eph.hot_limit),
        );
    }

    if !errors.is_empty() {
        return Err(errors);
    }

    let cold_start_threshold = th
        .cold_start
        .unwrap_or_else(|| default_cold_start_threshold(cap, th.v_min, config.v_supply));

    let leak = cap.leakage_current;
    let v = config.v_supply;
    let plans: [(&'static str, f64, &[TaskKind]); 5] = [
        (
            "thresholds.hot_start",
            th.hot_start,
            &[TaskKind::HotStart, TaskKind::GpsI2cWrite],
        ),
        (
            "thresholds.hot_eph",
            th.hot_eph,
            &[TaskKind::HotStart, TaskKind::EphemerisDownload, TaskKind::GpsI2cWrite],
        ),
        (
            "thresholds.warm_eph",
            th.warm_eph,
            &[TaskKind::WarmStart, TaskKind::EphemerisDownload, TaskKind::GpsI2cWrite],
        ),
        ("thresholds.nbiot", th.nbiot, &[TaskKind::NbIot]),
        ("thresholds.cold_start", cold_start_threshold, &[TaskKind::ColdStart]),
    ];
    let warnings = plans
        .into_iter()
        .filter_map(|(field, configured, tasks)| {
            let safe_bound = energy::safe_voltage_threshold(plan_energy(tasks, leak, v), cap.capacitance, th.v_min);
            (configured < safe_bound).then_some(ConfigWarning {
                field,
                configured,
                safe_bound,
            })
        })
        .collect();

    let mut config = config.clone();
    config.thresholds.cold_start = Some(cold_start_threshold);
    Ok(ValidatedConfig {
        config,
        cold_start_threshold,
        warnings,
    })
}
