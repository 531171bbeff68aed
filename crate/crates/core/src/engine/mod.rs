// SPDX-License-Identifier: Apache-2.0
//! The simulation loop.
//!
//! Each base tick reads one harvest sample, runs the due tasks as
//! consecutive closed-form segments (each with its own R_eq), then sleeps
//! for the rest of the tick. Depletion and clamp crossings are located
//! analytically inside segments; recovery is only checked at tick
//! boundaries.

mod export;
mod ledger;
mod metrics;

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::capacitor::{self, CapacitorState, Segment};
use crate::config::ValidatedConfig;
use crate::device::{self, payload_bytes, DeviceState, GpsMode, PowerState, ScheduledTask, SkipReason};
use crate::energy::{self, Component, TaskKind};
use crate::harvest::HarvestTrace;

pub use export::{export_timeseries, write_event_log, write_timeseries};
pub use ledger::EnergyLedger;
pub use metrics::{compute_metrics, DayMetrics, SimMetrics};

/// Payload the transmit profile was measured with.
const REFERENCE_PAYLOAD_BYTES: f64 = 480.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EventKind {
    FixHot,
    FixHotEph,
    FixWarmEph,
    FixCold,
    FixSkipped(SkipReason),
    Transmit { samples: usize },
    TransmitSkipped(SkipReason),
    TransmitFailed,
    Sense,
    Depletion,
    Recovery,
    TaskFailed(TaskKind),
    ClampStart,
    ClampEnd,
}

impl EventKind {
    pub fn is_fix(&self) -> bool {
        matches!(
            self,
            EventKind::FixHot | EventKind::FixHotEph | EventKind::FixWarmEph | EventKind::FixCold
        )
    }

    fn for_mode(mode: GpsMode) -> Self {
        match mode {
            GpsMode::Hot => EventKind::FixHot,
            GpsMode::HotWithEphemeris => EventKind::FixHotEph,
            GpsMode::WarmWithEphemeris => EventKind::FixWarmEph,
            GpsMode::Cold => EventKind::FixCold,
            GpsMode::Skip(reason) => EventKind::FixSkipped(reason),
        }
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EventKind::FixHot => f.write_str("FixHot"),
            EventKind::FixHotEph => f.write_str("FixHotEph"),
            EventKind::FixWarmEph => f.write_str("FixWarmEph"),
            EventKind::FixCold => f.write_str("FixCold"),
            EventKind::FixSkipped(reason) => write!(f, "FixSkipped({reason})"),
            EventKind::Transmit { samples } => write!(f, "Transmit({samples})"),
            EventKind::TransmitSkipped(reason) => write!(f, "TransmitSkipped({reason})"),
            EventKind::TransmitFailed => f.write_str("TransmitFailed"),
            EventKind::Sense => f.write_str("Sense"),
            EventKind::Depletion => f.write_str("Depletion"),
            EventKind::Recovery => f.write_str("Recovery"),
            EventKind::TaskFailed(task) => write!(f, "TaskFailed({task})"),
            EventKind::ClampStart => f.write_str("ClampStart"),
            EventKind::ClampEnd => f.write_str("ClampEnd"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimEvent {
    /// s since simulation start
    pub time: f64,
    pub kind: EventKind,
    pub voltage_before: f64,
    pub voltage_after: f64,
}

/// A point of the voltage series: a tick boundary or an intra-tick event.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VoltageSample {
    pub time: f64,
    pub voltage: f64,
    pub power: PowerState,
    /// Harvest sample in effect.
    pub tick: usize,
    /// Index into the event log for event rows.
    pub event: Option<usize>,
}

/// Harvest inputs for one tick, in amperes.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TickHarvest {
    pub combined: f64,
    pub kinetic: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TickOutcome {
    pub voltage: f64,
    pub events: Vec<SimEvent>,
}

/// Charge bookkeeping for the movement proxy.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct CoulombSummary {
    /// ∫ kinetic current dt, C
    pub integrated: f64,
    pub read_total: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimOutput {
    pub events: Vec<SimEvent>,
    pub series: Vec<VoltageSample>,
    pub metrics: SimMetrics,
    pub ledger: EnergyLedger,
    pub coulomb: CoulombSummary,
    pub final_state: DeviceState,
    pub run_length: u64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error("trace resolution {trace} s does not match base tick {tick} s")]
    ResolutionMismatch { trace: u32, tick: u64 },
    #[error("trace covers {available} s but {requested} s were requested")]
    TraceTooShort { requested: u64, available: u64 },
    #[error("run length {0} s is not a positive multiple of the base tick")]
    InvalidDuration(u64),
}

#[derive(Debug, Clone, Copy)]
struct Load {
    task: TaskKind,
    current_ma: f64,
    duration: f64,
}

/// Sequential device + capacitor state advanced tick by tick.
pub struct Simulator {
    config: ValidatedConfig,
    currents: [f64; TaskKind::ALL.len()],
    voltage: f64,
    device: DeviceState,
    clamped: bool,
    ledger: EnergyLedger,
    rng: ChaCha8Rng,
    events: Vec<SimEvent>,
    series: Vec<VoltageSample>,
    kinetic_integral: f64,
    ticks: usize,
    // within the current tick
    tick_start: f64,
    elapsed: f64,
    kinetic_accounted: f64,
    harvest: TickHarvest,
}

fn task_index(task: TaskKind) -> usize {
    TaskKind::ALL
        .iter()
        .position(|&t| t == task)
        .expect("task listed in ALL")
}

impl Simulator {
    pub fn new(config: &ValidatedConfig) -> Self {
        let leak = config.capacitor.leakage_current;
        let currents = TaskKind::ALL.map(|task| energy::compose_task_current(task, leak));
        let mut rng = ChaCha8Rng::seed_from_u64(config.random_seed);
        rng.set_stream(2);
        let voltage = config.initial_voltage;
        let stored = capacitor::stored_energy(&CapacitorState::new(config.capacitor, voltage));
        Self {
            config: config.clone(),
            currents,
            voltage,
            device: DeviceState::from_config(config),
            clamped: false,
            ledger: EnergyLedger::new(stored),
            rng,
            events: Vec::new(),
            series: Vec::new(),
            kinetic_integral: 0.0,
            ticks: 0,
            tick_start: 0.0,
            elapsed: 0.0,
            kinetic_accounted: 0.0,
            harvest: TickHarvest::default(),
        }
    }

    pub fn voltage(&self) -> f64 {
        self.voltage
    }

    /// Overrides the capacitor voltage, e.g. to start a scenario mid-state.
    pub fn set_voltage(&mut self, voltage: f64) {
        self.voltage = voltage;
        self.ledger = EnergyLedger::new(self.stored());
    }

    pub fn device(&self) -> &DeviceState {
        &self.device
    }

    pub fn device_mut(&mut self) -> &mut DeviceState {
        &mut self.device
    }

    pub fn events(&self) -> &[SimEvent] {
        &self.events
    }

    pub fn ledger(&self) -> &EnergyLedger {
        &self.ledger
    }

    fn stored(&self) -> f64 {
        capacitor::stored_energy(&CapacitorState::new(self.config.capacitor, self.voltage))
    }

    fn now(&self) -> f64 {
        self.tick_start + self.elapsed
    }

    fn emit(&mut self, time: f64, kind: EventKind, voltage_before: f64) -> SimEvent {
        let event = SimEvent {
            time,
            kind,
            voltage_before,
            voltage_after: self.voltage,
        };
        self.events.push(event);
        self.series.push(VoltageSample {
            time,
            voltage: self.voltage,
            power: self.device.power,
            tick: self.ticks,
            event: Some(self.events.len() - 1),
        });
        event
    }

    fn truncated_normal(&mut self, mean: f64, std: f64) -> f64 {
        loop {
            let z: f64 = self.rng.sample(StandardNormal);
            if z.abs() <= 3.0 {
                let x = mean + std * z;
                if x > 0.0 {
                    return x;
                }
            }
        }
    }

    fn load(&mut self, task: TaskKind) -> Load {
        let mut current_ma = self.currents[task_index(task)];
        let mut duration = task.duration().unwrap_or(0.0);
        if self.config.variability.jitter {
            let spec = energy::component(match task {
                TaskKind::ColdStart => Component::GpsColdStart,
                TaskKind::NbIot => Component::NbIot,
                _ => {
                    return Load {
                        task,
                        current_ma,
                        duration,
                    }
                }
            });
            if let Some(std) = spec.current_std {
                current_ma += self.truncated_normal(spec.current, std) - spec.current;
            }
            if let Some(std) = spec.duration_std {
                duration = self.truncated_normal(duration, std);
            }
        }
        Load {
            task,
            current_ma,
            duration,
        }
    }

    /// Integrates one constant-load segment starting at the current offset.
    /// Returns the offset into the segment at which the voltage hit v_min, when
    /// `watch_depletion` is set and it did.
    fn run_segment(&mut self, load: Load, duration: f64, watch_depletion: bool) -> Option<f64> {
        let cfg = &self.config;
        let spec = cfg.capacitor;
        let v_min = cfg.thresholds.v_min;
        let leakage_fraction = spec.leakage_current / load.current_ma;
        let resistance = cfg.v_supply / (load.current_ma * 1e-3);
        let i_h = self.harvest.combined;
        let segment = Segment {
            harvest_current: i_h,
            equivalent_resistance: resistance,
            duration,
        };
        let asymptote = segment.asymptote();
        let state = CapacitorState::new(spec, self.voltage);
        let t0 = self.now();
        self.ledger.nominal_harvest += i_h * cfg.v_supply * duration;

        if watch_depletion && asymptote < v_min {
            let crossing = if self.voltage <= v_min {
                Some(0.0)
            } else {
                capacitor::time_to_voltage(&state, i_h, resistance, v_min)
            };
            if let Some(t) = crossing.filter(|&t| t <= duration) {
                let part = Segment { duration: t, ..segment };
                let e = capacitor::segment_energy(self.voltage, spec.capacitance, &part);
                self.ledger
                    .record(load.task, e.harvested, e.dissipated, leakage_fraction, 0.0);
                // the nominal share past the crossing is re-counted by the Off segment
                self.ledger.nominal_harvest -= i_h * cfg.v_supply * (duration - t);
                self.voltage = v_min.min(self.voltage);
                return Some(t);
            }
        }

        let step = capacitor::step_voltage(&state, &segment);
        match step.clamped_at {
            Some(tc) => {
                let part = Segment {
                    duration: tc,
                    ..segment
                };
                let e = capacitor::segment_energy(self.voltage, spec.capacitance, &part);
                let hold = duration - tc;
                let v_max = spec.v_max;
                let harvested = i_h * v_max * hold;
                let dissipated = v_max * v_max / resistance * hold;
                self.ledger.record(
                    load.task,
                    e.harvested + harvested,
                    e.dissipated + dissipated,
                    leakage_fraction,
                    harvested - dissipated,
                );
                let before = self.voltage;
                self.voltage = v_max;
                if !self.clamped {
                    self.clamped = true;
                    self.emit(t0 + tc, EventKind::ClampStart, before);
                }
            }
            None => {
                if self.clamped && asymptote <= spec.v_max {
                    self.clamped = false;
                    let v = self.voltage;
                    self.emit(t0, EventKind::ClampEnd, v);
                }
                let e = capacitor::segment_energy(self.voltage, spec.capacitance, &segment);
                self.ledger
                    .record(load.task, e.harvested, e.dissipated, leakage_fraction, 0.0);
                self.voltage = step.voltage;
            }
        }
        None
    }

    fn deplete(&mut self, failed: Option<EventKind>) {
        let v = self.voltage;
        if let Some(kind) = failed {
            self.emit(self.now(), kind, v);
        }
        self.device.on_depletion();
        self.emit(self.now(), EventKind::Depletion, v);
    }

    /// Runs a load chain; on depletion records the failure and returns false.
    fn run_chain(&mut self, loads: &[Load], failure: impl Fn(TaskKind) -> EventKind) -> bool {
        for &load in loads {
            if load.task == TaskKind::I2cReadCoulomb {
                // counter value is latched when the read starts
                self.accumulate_kinetic();
            }
            match self.run_segment(load, load.duration, true) {
                Some(t) => {
                    self.elapsed += t;
                    self.deplete(Some(failure(load.task)));
                    return false;
                }
                None => self.elapsed += load.duration,
            }
        }
        true
    }

    fn accumulate_kinetic(&mut self) {
        let dt = self.elapsed - self.kinetic_accounted;
        self.device.accumulate_kinetic(self.harvest.kinetic, dt);
        self.kinetic_accounted = self.elapsed;
    }

    fn remaining(&self) -> f64 {
        self.config.intervals.base_tick as f64 - self.elapsed
    }

    fn sense(&mut self) {
        let load = self.load(TaskKind::AdcRead);
        let before = self.voltage;
        let start = self.now();
        if self.run_chain(&[load], EventKind::TaskFailed) {
            let event = SimEvent {
                time: start,
                kind: EventKind::Sense,
                voltage_before: before,
                voltage_after: self.voltage,
            };
            self.push_event(event);
        }
    }

    fn push_event(&mut self, event: SimEvent) {
        self.events.push(event);
        self.series.push(VoltageSample {
            time: event.time,
            voltage: event.voltage_after,
            power: self.device.power,
            tick: self.ticks,
            event: Some(self.events.len() - 1),
        });
    }

    fn fix(&mut self) {
        let before = self.voltage;
        let start = self.now();
        let mode = device::select_gps_mode(
            &self.device.gps,
            before,
            &self.config.thresholds,
            self.config.cold_start_threshold(),
            &self.config,
        );
        if let GpsMode::Skip(_) = mode {
            self.emit(start, EventKind::for_mode(mode), before);
            return;
        }
        let loads: Vec<Load> = mode.plan().iter().map(|&task| self.load(task)).collect();
        if loads.iter().map(|l| l.duration).sum::<f64>() > self.remaining() {
            self.emit(start, EventKind::FixSkipped(SkipReason::Overrun), before);
            return;
        }
        if !self.run_chain(&loads, EventKind::TaskFailed) {
            return;
        }
        let coulomb = self.device.read_coulomb();
        self.device.on_fix_success(mode, start, coulomb);
        self.push_event(SimEvent {
            time: start,
            kind: EventKind::for_mode(mode),
            voltage_before: before,
            voltage_after: self.voltage,
        });
    }

    fn transmit(&mut self) {
        let before = self.voltage;
        let start = self.now();
        if before < self.config.thresholds.nbiot {
            self.emit(start, EventKind::TransmitSkipped(SkipReason::LowVoltage), before);
            return;
        }
        let mut load = self.load(TaskKind::NbIot);
        if self.config.variability.payload_energy_scaling {
            load.duration *= payload_bytes(self.device.buffer.len()) as f64 / REFERENCE_PAYLOAD_BYTES;
        }
        if load.duration > self.remaining() {
            self.emit(start, EventKind::TransmitSkipped(SkipReason::Overrun), before);
            return;
        }
        if !self.run_chain(&[load], |_| EventKind::TransmitFailed) {
            return;
        }
        let samples = self.device.on_transmit_success();
        self.push_event(SimEvent {
            time: start,
            kind: EventKind::Transmit { samples },
            voltage_before: before,
            voltage_after: self.voltage,
        });
    }

    /// Advances one base tick running `tasks` in order, then sleeps (or, when
    /// off, leaks) for the rest of the tick.
    pub fn integrate_tick(&mut self, tasks: &[ScheduledTask], harvest: TickHarvest) -> TickOutcome {
        let first_event = self.events.len();
        let tick = self.config.intervals.base_tick as f64;
        self.tick_start = self.device.clock as f64;
        self.elapsed = 0.0;
        self.kinetic_accounted = 0.0;
        self.harvest = harvest;

        if self.device.power == PowerState::Off && self.device.on_recovery(self.voltage, &self.config.thresholds) {
            let v = self.voltage;
            self.emit(self.tick_start, EventKind::Recovery, v);
        }
        if self.device.power == PowerState::On && self.voltage <= self.config.thresholds.v_min {
            self.deplete(None);
        }
        self.series.push(VoltageSample {
            time: self.tick_start,
            voltage: self.voltage,
            power: self.device.power,
            tick: self.ticks,
            event: None,
        });

        for &task in tasks {
            if self.device.power == PowerState::Off {
                break;
            }
            match task {
                ScheduledTask::Sense => self.sense(),
                ScheduledTask::Fix => self.fix(),
                ScheduledTask::Transmit => self.transmit(),
            }
        }

        if self.device.power == PowerState::On {
            let sleep = self.load(TaskKind::Sleep);
            let rest = self.remaining();
            if let Some(t) = self.run_segment(sleep, rest, true) {
                self.elapsed += t;
                self.deplete(None);
            } else {
                self.elapsed = tick;
            }
        }
        if self.device.power == PowerState::Off {
            let off = self.load(TaskKind::TurnedOff);
            let rest = self.remaining();
            self.run_segment(off, rest, false);
            self.elapsed = tick;
        }

        self.accumulate_kinetic();
        self.kinetic_integral += harvest.kinetic * tick;
        self.device.advance(self.config.intervals.base_tick);
        self.ticks += 1;
        let stored = self.stored();
        self.ledger.close(stored);

        TickOutcome {
            voltage: self.voltage,
            events: self.events[first_event..].to_vec(),
        }
    }

    /// Appends the closing boundary sample and assembles the run outputs.
    pub fn finish(mut self) -> SimOutput {
        let run_length = self.device.clock;
        self.series.push(VoltageSample {
            time: run_length as f64,
            voltage: self.voltage,
            power: self.device.power,
            tick: self.ticks.saturating_sub(1),
            event: None,
        });
        let metrics = compute_metrics(&self.events, &self.series, run_length);
        let coulomb = CoulombSummary {
            integrated: self.kinetic_integral,
            read_total: self.device.coulomb_read_total(),
            residual: self.device.coulomb_accumulator,
        };
        SimOutput {
            events: self.events,
            series: self.series,
            metrics,
            ledger: self.ledger,
            coulomb,
            final_state: self.device,
            run_length,
        }
    }
}

/// Runs the device over `harvest`, for `duration` seconds or the whole trace.
pub fn run_simulation(
    config: &ValidatedConfig,
    harvest: &HarvestTrace,
    duration: Option<u64>,
) -> Result<SimOutput, SimError> {
    let tick = config.intervals.base_tick;
    if harvest.resolution as u64 != tick {
        return Err(SimError::ResolutionMismatch {
            trace: harvest.resolution,
            tick,
        });
    }
    let available = harvest.duration();
    let requested = duration.unwrap_or(available);
    if requested == 0 || !requested.is_multiple_of(tick) {
        return Err(SimError::InvalidDuration(requested));
    }
    if requested > available {
        return Err(SimError::TraceTooShort { requested, available });
    }
    let ticks = (requested / tick) as usize;
    let mut sim = Simulator::new(config);
    for k in 0..ticks {
        let tasks = device::due_tasks(sim.device.clock, config);
        sim.integrate_tick(
            &tasks,
            TickHarvest {
                combined: harvest.combined()[k],
                kinetic: harvest.kinetic()[k],
            },
        );
    }
    Ok(sim.finish())
}
