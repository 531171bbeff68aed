// SPDX-License-Identifier: Apache-2.0
use std::collections::BTreeMap;

use serde::Serialize;

use crate::energy::TaskKind;

/// Energy bookkeeping over every integrated segment, in joules.
///
/// `harvested_in` is the energy the current source pushes into the
/// capacitor (∫ I_H·V dt). Load dissipation (∫ V²/R dt) is split into
/// the task's own share and the capacitor leakage share.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct EnergyLedger {
    pub harvested_in: f64,
    pub consumed_by_task: BTreeMap<TaskKind, f64>,
    pub leakage: f64,
    pub discarded_at_clamp: f64,
    pub delta_stored: f64,
    pub initial_stored: f64,
    pub final_stored: f64,
    /// Σ I_H·V_supply·Δt: the harvest expressed at the regulated rail.
    pub nominal_harvest: f64,
}

impl EnergyLedger {
    pub fn new(initial_stored: f64) -> Self {
        Self {
            initial_stored,
            final_stored: initial_stored,
            ..Self::default()
        }
    }

    pub(crate) fn record(
        &mut self,
        task: TaskKind,
        harvested: f64,
        dissipated: f64,
        leakage_fraction: f64,
        discarded: f64,
    ) {
        self.harvested_in += harvested;
        let leak = dissipated * leakage_fraction;
        self.leakage += leak;
        if task != TaskKind::TurnedOff {
            *self.consumed_by_task.entry(task).or_insert(0.0) += dissipated - leak;
        }
        self.discarded_at_clamp += discarded;
    }

    pub(crate) fn close(&mut self, final_stored: f64) {
        self.final_stored = final_stored;
        self.delta_stored = final_stored - self.initial_stored;
    }

    pub fn total_task_consumption(&self) -> f64 {
        self.consumed_by_task.values().sum()
    }

    /// Everything drawn by the load, leakage included.
    pub fn total_consumed(&self) -> f64 {
        self.total_task_consumption() + self.leakage
    }

    /// harvested − consumed − leakage − discarded − Δstored.
    pub fn closure_residual(&self) -> f64 {
        self.harvested_in - self.total_task_consumption() - self.leakage - self.discarded_at_clamp - self.delta_stored
    }

    pub fn relative_closure_error(&self) -> f64 {
        if self.harvested_in > 0.0 {
            self.closure_residual().abs() / self.harvested_in
        } else {
            self.closure_residual().abs()
        }
    }
}
