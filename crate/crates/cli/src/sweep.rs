// SPDX-License-Identifier: Apache-2.0
//! Capacitor × fix-interval grid over one shared trace.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Deserialize;
use wildtrack_core::{run_simulation, CapacitorSpec, ConfigFile, HarvestTrace, SimOutput, ValidatedConfig};

use crate::error::{CliError, CliResult};
use crate::inputs;
use crate::output;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub capacitors: Vec<CapacitorSpec>,
    pub fix_intervals: Vec<u64>,
    #[serde(default)]
    pub base: ConfigFile,
    #[serde(default)]
    pub trace: TraceSource,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceSource {
    /// Irradiance or harvest CSV, relative to the spec file.
    pub file: Option<PathBuf>,
    /// Harvest CSV whose kinetic column replaces the generated one.
    pub kinetic: Option<PathBuf>,
    pub days: Option<u32>,
}

pub struct Combination {
    pub capacitor: CapacitorSpec,
    pub fix_interval: u64,
    pub config: ValidatedConfig,
}

impl Combination {
    pub fn label(&self) -> String {
        format!("c{}F_fix{}s", self.capacitor.capacitance, self.fix_interval)
    }
}

impl SweepSpec {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        let mut spec: SweepSpec =
            toml::from_str(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        let dir = path.parent().unwrap_or(Path::new("."));
        for p in [&mut spec.trace.file, &mut spec.trace.kinetic].into_iter().flatten() {
            if p.is_relative() {
                *p = dir.join(&*p);
            }
        }
        Ok(spec)
    }

    /// Validates every combination; any failure aborts the whole sweep.
    pub fn combinations(&self) -> CliResult<Vec<Combination>> {
        if self.capacitors.is_empty() || self.fix_intervals.is_empty() {
            return Err(CliError::config(
                "sweep needs at least one capacitor and one fix interval",
            ));
        }
        let mut combos = Vec::new();
        let mut errors = Vec::new();
        for &capacitor in &self.capacitors {
            for &fix_interval in &self.fix_intervals {
                let mut system = self.base.system.clone();
                system.capacitor = capacitor;
                system.intervals.fix = fix_interval;
                let label = format!("{} F / {} s", capacitor.capacitance, fix_interval);
                match inputs::validate(&system, Some(&label)) {
                    Ok(config) => combos.push(Combination {
                        capacitor,
                        fix_interval,
                        config,
                    }),
                    Err(e) => errors.push(format!("{label}: {}", e.message)),
                }
            }
        }
        if errors.is_empty() {
            Ok(combos)
        } else {
            Err(CliError::config(errors.join("; ")))
        }
    }
}

const COLUMNS: &str = "capacitance_f,leakage_ma,fix_interval_s,hot_fixes,hot_ephemeris,warm_ephemeris,\
cold_starts,total_fixes,fixes_per_day_mean,fixes_per_day_std,complete_days,skipped_fixes,failed_tasks,\
transmissions,skipped_transmissions,failed_transmissions,depletions,off_s,longest_data_gap_s,\
min_voltage_v,min_voltage_on_v,harvested_j,consumed_j,discarded_j,delta_stored_j";

fn comparison_row(combo: &Combination, out: &SimOutput, row: &mut String) {
    let m = &out.metrics;
    let l = &out.ledger;
    let _ = writeln!(
        row,
        "{},{},{},{},{},{},{},{},{:.2},{:.2},{},{},{},{},{},{},{},{:.0},{:.0},{:.4},{:.4},{:.3},{:.3},{:.3},{:.4}",
        combo.capacitor.capacitance,
        combo.capacitor.leakage_current,
        combo.fix_interval,
        m.hot_fixes,
        m.hot_ephemeris,
        m.warm_ephemeris,
        m.cold_starts,
        m.total_fixes,
        m.fixes_per_day_mean,
        m.fixes_per_day_std,
        m.complete_days,
        m.skipped_fixes,
        m.failed_tasks,
        m.transmissions,
        m.skipped_transmissions,
        m.failed_transmissions,
        m.depletion_count,
        m.total_off_seconds,
        m.longest_data_gap,
        m.min_voltage,
        m.min_voltage_on,
        l.harvested_in,
        l.total_consumed(),
        l.discarded_at_clamp,
        l.delta_stored,
    );
}

/// Runs every combination in parallel, then writes per-run directories and
/// `comparison.csv` in spec order.
pub fn run(combos: &[Combination], trace: &HarvestTrace, duration: Option<u64>, out_dir: &Path) -> CliResult<String> {
    output::create_dir(out_dir)?;
    let results: Vec<CliResult<String>> = combos
        .par_iter()
        .map(|combo| {
            let out = run_simulation(&combo.config, trace, duration).map_err(|e| CliError::trace(e.to_string()))?;
            output::write_run(&out_dir.join(combo.label()), &out, trace)?;
            let mut row = String::new();
            comparison_row(combo, &out, &mut row);
            Ok(row)
        })
        .collect();
    let mut table = String::from(COLUMNS);
    table.push('\n');
    for row in results {
        table.push_str(&row?);
    }
    output::write_atomic(&out_dir.join("comparison.csv"), table.as_bytes())?;
    Ok(table)
}
