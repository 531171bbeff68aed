// SPDX-License-Identifier: Apache-2.0
//! Configuration and trace resolution shared by the commands.

use std::fs;
use std::io::{BufRead, BufReader};
use std::path::Path;

use wildtrack_core::harvest::{load_harvest_csv, load_irradiance_csv, DEFAULT_GAP_FILL_LIMIT};
use wildtrack_core::{validate_config, ConfigFile, HarvestTrace, SystemConfig, ValidatedConfig};

use crate::error::{CliError, CliResult};

pub fn load_config(path: Option<&Path>, seed: Option<u64>) -> CliResult<ConfigFile> {
    let mut config = match path {
        Some(p) => ConfigFile::load(p).map_err(|e| CliError::config(e.to_string()))?,
        None => ConfigFile::default(),
    };
    if let Some(seed) = seed {
        apply_seed(&mut config, seed);
    }
    Ok(config)
}

pub fn apply_seed(config: &mut ConfigFile, seed: u64) {
    config.system.random_seed = seed;
    config.harvest = config.harvest.clone().with_seed(seed);
}

/// Validates and prints any warnings, prefixed with `context` when given.
pub fn validate(system: &SystemConfig, context: Option<&str>) -> CliResult<ValidatedConfig> {
    let validated = validate_config(system).map_err(|errors| {
        let lines: Vec<String> = errors.iter().map(|e| e.to_string()).collect();
        CliError::config(lines.join("; "))
    })?;
    for w in validated.warnings() {
        match context {
            Some(c) => eprintln!("warning [{c}]: {w}"),
            None => eprintln!("warning: {w}"),
        }
    }
    Ok(validated)
}

fn is_harvest_csv(path: &Path) -> CliResult<bool> {
    let file = fs::File::open(path).map_err(|e| CliError::trace(format!("{}: {e}", path.display())))?;
    let mut header = String::new();
    BufReader::new(file)
        .read_line(&mut header)
        .map_err(|e| CliError::trace(format!("{}: {e}", path.display())))?;
    Ok(header.trim_start().starts_with("t_s,"))
}

fn trace_error(path: &Path, err: impl std::fmt::Display) -> CliError {
    CliError::trace(format!("{}: {err}", path.display()))
}

/// Reads a harvest CSV's kinetic column.
pub fn load_kinetic(path: &Path, config: &ConfigFile) -> CliResult<Vec<f64>> {
    let trace = load_harvest_csv(path, config.harvest.start_time, config.system.combiner_efficiency)
        .map_err(|e| trace_error(path, e))?;
    Ok(trace.kinetic().to_vec())
}

/// Builds the harvest trace for a run.
///
/// `trace` may be an irradiance CSV or a harvest CSV (detected by header);
/// without one a synthetic trace of `days` is generated. `kinetic` replaces
/// the generated kinetic series.
pub fn resolve_trace(
    config: &ConfigFile,
    trace: Option<&Path>,
    kinetic: Option<&Path>,
    days: Option<u32>,
) -> CliResult<HarvestTrace> {
    let harvest = &config.harvest;
    let efficiency = config.system.combiner_efficiency;
    let irradiance = match trace {
        Some(path) if is_harvest_csv(path)? => {
            if kinetic.is_some() {
                return Err(CliError::trace("--kinetic cannot be combined with a harvest-trace CSV"));
            }
            return load_harvest_csv(path, harvest.start_time, efficiency).map_err(|e| trace_error(path, e));
        }
        Some(path) => {
            let resolution = config.system.intervals.base_tick as u32;
            let (irr, report) =
                load_irradiance_csv(path, resolution, DEFAULT_GAP_FILL_LIMIT).map_err(|e| trace_error(path, e))?;
            if report.gaps > 0 {
                eprintln!(
                    "note: filled {} gaps ({} samples) in {}",
                    report.gaps,
                    report.held_samples,
                    path.display()
                );
            }
            irr
        }
        None => harvest
            .synthetic_irradiance(days.unwrap_or(harvest.days))
            .map_err(|e| CliError::config(e.to_string()))?,
    };
    let kinetic = match kinetic {
        Some(path) => {
            let mut k = load_kinetic(path, config)?;
            if k.len() < irradiance.len() {
                return Err(trace_error(
                    path,
                    format!("{} kinetic samples for {} solar samples", k.len(), irradiance.len()),
                ));
            }
            k.truncate(irradiance.len());
            Some(k)
        }
        None => None,
    };
    harvest
        .build_trace(&irradiance, kinetic, efficiency)
        .map_err(|e| CliError::trace(e.to_string()))
}

/// Run length to request: `days` of a file-backed trace, else the whole trace.
pub fn run_length(trace_file: bool, days: Option<u32>) -> Option<u64> {
    days.filter(|_| trace_file).map(|d| d as u64 * 86_400)
}
