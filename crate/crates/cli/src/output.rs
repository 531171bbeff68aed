// SPDX-License-Identifier: Apache-2.0
//! Run artifacts and atomic file writes.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use wildtrack_core::engine::{write_event_log, write_timeseries, CoulombSummary};
use wildtrack_core::{EnergyLedger, HarvestTrace, SimMetrics, SimOutput};

use crate::error::{CliError, CliResult};

/// Writes `bytes` to a sibling temp file and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let tmp: PathBuf = path.with_file_name(format!(".{name}.tmp"));
    let result = fs::File::create(&tmp)
        .and_then(|mut f| {
            f.write_all(bytes)?;
            f.sync_all()
        })
        .and_then(|_| fs::rename(&tmp, path));
    if let Err(err) = result {
        let _ = fs::remove_file(&tmp);
        return Err(CliError::io(path, err));
    }
    Ok(())
}

pub fn create_dir(path: &Path) -> CliResult<()> {
    fs::create_dir_all(path).map_err(|e| CliError::io(path, e))
}

#[derive(Serialize)]
struct MetricsReport<'a> {
    run_length_s: u64,
    #[serde(flatten)]
    metrics: &'a SimMetrics,
    coulomb: CoulombSummary,
}

#[derive(Serialize)]
struct LedgerReport<'a> {
    #[serde(flatten)]
    ledger: &'a EnergyLedger,
    total_task_consumption: f64,
    total_consumed: f64,
    closure_residual: f64,
    relative_closure_error: f64,
}

fn json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("reports serialise");
    bytes.push(b'\n');
    bytes
}

pub fn metrics_json(output: &SimOutput) -> Vec<u8> {
    json(&MetricsReport {
        run_length_s: output.run_length,
        metrics: &output.metrics,
        coulomb: output.coulomb,
    })
}

pub fn ledger_json(ledger: &EnergyLedger) -> Vec<u8> {
    json(&LedgerReport {
        ledger,
        total_task_consumption: ledger.total_task_consumption(),
        total_consumed: ledger.total_consumed(),
        closure_residual: ledger.closure_residual(),
        relative_closure_error: ledger.relative_closure_error(),
    })
}

/// Writes timeseries.csv, events.csv, metrics.json and ledger.json into `dir`.
pub fn write_run(dir: &Path, output: &SimOutput, harvest: &HarvestTrace) -> CliResult<()> {
    create_dir(dir)?;
    let mut series = Vec::new();
    write_timeseries(output, harvest, &mut series).expect("in-memory write");
    write_atomic(&dir.join("timeseries.csv"), &series)?;
    let mut events = Vec::new();
    write_event_log(&output.events, &mut events).expect("in-memory write");
    write_atomic(&dir.join("events.csv"), &events)?;
    write_atomic(&dir.join("metrics.json"), &metrics_json(output))?;
    write_atomic(&dir.join("ledger.json"), &ledger_json(&output.ledger))
}
