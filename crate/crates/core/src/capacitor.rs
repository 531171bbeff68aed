// SPDX-License-Identifier: Apache-2.0
//! Supercapacitor voltage dynamics.
//!
//! The load is an equivalent resistance R = V_supply / I_task and the
//! harvester an ideal current source, so over a segment with constant
//! inputs the voltage follows the exact solution of C·dV/dt = I_H − V/R:
//!
//! V(Δt) = I_H·R·(1 − e^(−Δt/RC)) + V₀·e^(−Δt/RC)
//!
//! All quantities here are SI (A, Ω, F, s, V, J).

use crate::config::CapacitorSpec;

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum CapacitorError {
    #[error("task current must be positive, got {0} mA")]
    NonPositiveCurrent(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacitorState {
    pub spec: CapacitorSpec,
    pub voltage: f64,
}

impl CapacitorState {
    pub fn new(spec: CapacitorSpec, voltage: f64) -> Self {
        Self { spec, voltage }
    }

    fn time_constant(&self, resistance: f64) -> f64 {
        resistance * self.spec.capacitance
    }
}

/// Constant-input interval of the recurrence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    /// A
    pub harvest_current: f64,
    /// Ω
    pub equivalent_resistance: f64,
    /// s
    pub duration: f64,
}

impl Segment {
    pub fn asymptote(&self) -> f64 {
        self.harvest_current * self.equivalent_resistance
    }
}

/// R_eq in ohms for a task drawing `task_current` mA at `v_supply` V.
pub fn equivalent_resistance(v_supply: f64, task_current: f64) -> Result<f64, CapacitorError> {
    if !(task_current > 0.0) {
        return Err(CapacitorError::NonPositiveCurrent(task_current));
    }
    Ok(v_supply / (task_current * 1e-3))
}

/// The recurrence without the rated-voltage clamp.
pub fn step_unclamped(voltage: f64, capacitance: f64, segment: &Segment) -> f64 {
    let tau = segment.equivalent_resistance * capacitance;
    let decay = (-segment.duration / tau).exp();
    // -expm1 keeps precision when Δt ≪ τ.
    let charge = -(-segment.duration / tau).exp_m1();
    segment.asymptote() * charge + voltage * decay
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Step {
    pub voltage: f64,
    /// Offset into the segment at which the voltage reached `v_max`, if it did.
    pub clamped_at: Option<f64>,
}

/// Advances the capacitor over one segment, holding at `v_max` once reached.
pub fn step_voltage(state: &CapacitorState, segment: &Segment) -> Step {
    let v_max = state.spec.v_max;
    if segment.asymptote() > v_max {
        if let Some(t) = time_to_voltage(state, segment.harvest_current, segment.equivalent_resistance, v_max) {
            if t <= segment.duration {
                return Step {
                    voltage: v_max,
                    clamped_at: Some(t),
                };
            }
        }
    }
    Step {
        voltage: step_unclamped(state.voltage, state.spec.capacitance, segment).min(v_max),
        clamped_at: None,
    }
}

/// Time for the trajectory to reach `target`, or `None` if it never does.
pub fn time_to_voltage(
    state: &CapacitorState,
    harvest_current: f64,
    equivalent_resistance: f64,
    target: f64,
) -> Option<f64> {
    if state.voltage == target {
        return Some(0.0);
    }
    let asymptote = harvest_current * equivalent_resistance;
    let from = state.voltage - asymptote;
    let to = target - asymptote;
    // Target must lie strictly between the start and the asymptote.
    if from == 0.0 || to == 0.0 || from.signum() != to.signum() || to.abs() > from.abs() {
        return None;
    }
    Some(state.time_constant(equivalent_resistance) * (from / to).ln())
}

/// ½CV² in joules.
pub fn stored_energy(state: &CapacitorState) -> f64 {
    0.5 * state.spec.capacitance * state.voltage * state.voltage
}

/// Energy exchanged over an unclamped segment, integrated in closed form.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SegmentEnergy {
    /// ∫ I_H·V dt, J
    pub harvested: f64,
    /// ∫ V²/R dt, J
    pub dissipated: f64,
}

pub fn segment_energy(voltage: f64, capacitance: f64, segment: &Segment) -> SegmentEnergy {
    let r = segment.equivalent_resistance;
    let tau = r * capacitance;
    let t = segment.duration;
    let a = segment.asymptote();
    let d = voltage - a;
    let one_minus = -(-t / tau).exp_m1();
    let one_minus_2 = -(-2.0 * t / tau).exp_m1();
    let int_v = a * t + d * tau * one_minus;
    let int_v2 = a * a * t + 2.0 * a * d * tau * one_minus + d * d * 0.5 * tau * one_minus_2;
    SegmentEnergy {
        harvested: segment.harvest_current * int_v,
        dissipated: int_v2 / r,
    }
}
