// SPDX-License-Identifier: Apache-2.0
//! Trace-driven simulation of a solar + kinetic powered wildlife tracker
//! running off a supercapacitor.
//!
//! - [`energy`]: component draws and system-level task currents
//! - [`config`]: parameters, defaults and validation
//! - [`capacitor`]: closed-form RC voltage recurrence
//! - [`harvest`]: irradiance and kinetic traces, source combination
//! - [`device`]: scheduler, GPS mode selection, power hysteresis
//! - [`engine`]: the simulation loop, energy ledger and metrics

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod capacitor;
pub mod config;
pub mod device;
pub mod energy;
pub mod engine;
pub mod harvest;

pub use capacitor::{CapacitorState, Segment};
pub use config::{validate_config, CapacitorSpec, ConfigFile, SystemConfig, ValidatedConfig, VoltageThresholds};
pub use device::{DeviceState, GpsMode, PowerState, ScheduledTask};
pub use energy::{TaskKind, TaskProfile};
pub use engine::{run_simulation, EnergyLedger, EventKind, SimError, SimEvent, SimMetrics, SimOutput, Simulator};
pub use harvest::{HarvestConfig, HarvestTrace, IrradianceTrace};
