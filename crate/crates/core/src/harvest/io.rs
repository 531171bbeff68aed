// SPDX-License-Identifier: Apache-2.0
//! CSV formats for irradiance input and harvest-trace export.
//!
//! Irradiance: header `timestamp,irradiance_wm2`; timestamps are RFC 3339
//! UTC or integer epoch seconds, one row per resolution step. Short gaps
//! are filled by holding the previous value.
//!
//! Harvest trace: header `t_s,solar_a,kinetic_a,combined_a`.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use chrono::{DateTime, SecondsFormat, Utc};

use super::{HarvestError, HarvestTrace, IrradianceTrace};

/// Largest number of consecutive missing samples filled by default.
pub const DEFAULT_GAP_FILL_LIMIT: u64 = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CsvLoadReport {
    /// Number of gaps that were filled.
    pub gaps: u64,
    /// Number of samples inserted by holding the previous value.
    pub held_samples: u64,
}

fn parse_timestamp(field: &str) -> Option<i64> {
    let field = field.trim();
    if let Ok(epoch) = field.parse::<i64>() {
        return Some(epoch);
    }
    DateTime::parse_from_rfc3339(field).ok().map(|t| t.timestamp())
}

pub fn read_irradiance_csv<R: Read>(
    reader: R,
    resolution: u32,
    gap_limit: u64,
) -> Result<(IrradianceTrace, CsvLoadReport), HarvestError> {
    if resolution == 0 {
        return Err(HarvestError::InvalidParameter("resolution must be > 0".into()));
    }
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut report = CsvLoadReport::default();
    let mut samples = Vec::new();
    let mut start = None;
    let mut last: Option<i64> = None;
    let step = resolution as i64;

    for record in csv.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != 2 {
            return Err(HarvestError::Malformed {
                line,
                message: format!("expected 2 fields, found {}", record.len()),
            });
        }
        let t = parse_timestamp(&record[0]).ok_or_else(|| HarvestError::Malformed {
            line,
            message: format!("bad timestamp `{}`", &record[0]),
        })?;
        let g: f64 = record[1].parse().map_err(|_| HarvestError::Malformed {
            line,
            message: format!("bad irradiance `{}`", &record[1]),
        })?;
        if !(g >= 0.0) {
            return Err(HarvestError::Malformed {
                line,
                message: format!("negative irradiance {g}"),
            });
        }
        if let Some(prev) = last {
            let delta = t - prev;
            if delta <= 0 || delta % step != 0 {
                return Err(HarvestError::NonMonotone { line, resolution });
            }
            let missing = (delta / step - 1) as u64;
            if missing > gap_limit {
                return Err(HarvestError::GapTooLarge {
                    line,
                    missing,
                    limit: gap_limit,
                });
            }
            if missing > 0 {
                let held = *samples.last().expect("previous sample exists");
                samples.extend(std::iter::repeat_n(held, missing as usize));
                report.gaps += 1;
                report.held_samples += missing;
            }
        } else {
            start = Some(t);
        }
        samples.push(g);
        last = Some(t);
    }

    let start = start.ok_or(HarvestError::Empty)?;
    let start_time = DateTime::from_timestamp(start, 0).ok_or_else(|| HarvestError::Malformed {
        line: 2,
        message: format!("timestamp {start} out of range"),
    })?;
    Ok((IrradianceTrace::new(start_time, resolution, samples)?, report))
}

pub fn load_irradiance_csv(
    path: impl AsRef<Path>,
    resolution: u32,
    gap_limit: u64,
) -> Result<(IrradianceTrace, CsvLoadReport), HarvestError> {
    read_irradiance_csv(File::open(path)?, resolution, gap_limit)
}

pub fn write_irradiance_csv<W: Write>(trace: &IrradianceTrace, mut out: W) -> std::io::Result<()> {
    writeln!(out, "timestamp,irradiance_wm2")?;
    for (i, g) in trace.samples.iter().enumerate() {
        let t = trace.start_time + chrono::TimeDelta::seconds(i as i64 * trace.resolution as i64);
        writeln!(out, "{},{}", t.to_rfc3339_opts(SecondsFormat::Secs, true), g)?;
    }
    Ok(())
}

pub fn write_harvest_csv<W: Write>(trace: &HarvestTrace, mut out: W) -> std::io::Result<()> {
    writeln!(out, "t_s,solar_a,kinetic_a,combined_a")?;
    for i in 0..trace.len() {
        writeln!(
            out,
            "{},{},{},{}",
            i as u64 * trace.resolution as u64,
            trace.solar()[i],
            trace.kinetic()[i],
            trace.combined()[i]
        )?;
    }
    Ok(())
}

/// Reads a harvest-trace CSV; the combined column is recomputed with `efficiency`.
pub fn load_harvest_csv(
    path: impl AsRef<Path>,
    start_time: DateTime<Utc>,
    efficiency: f64,
) -> Result<HarvestTrace, HarvestError> {
    let mut csv = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(File::open(path)?);
    let mut times = Vec::new();
    let mut solar = Vec::new();
    let mut kinetic = Vec::new();
    for record in csv.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != 4 {
            return Err(HarvestError::Malformed {
                line,
                message: format!("expected 4 fields, found {}", record.len()),
            });
        }
        let num = |i: usize| -> Result<f64, HarvestError> {
            record[i].parse().map_err(|_| HarvestError::Malformed {
                line,
                message: format!("bad number `{}`", &record[i]),
            })
        };
        let t = record[0].parse::<u64>().map_err(|_| HarvestError::Malformed {
            line,
            message: format!("bad t_s `{}`", &record[0]),
        })?;
        times.push((t, line));
        solar.push(num(1)?);
        kinetic.push(num(2)?);
    }
    if times.is_empty() {
        return Err(HarvestError::Empty);
    }
    let resolution = if times.len() > 1 { times[1].0 - times[0].0 } else { 60 };
    if resolution == 0 {
        return Err(HarvestError::NonMonotone {
            line: times[1].1,
            resolution: 0,
        });
    }
    for (i, &(t, line)) in times.iter().enumerate() {
        if t != times[0].0 + i as u64 * resolution {
            return Err(HarvestError::NonMonotone {
                line,
                resolution: resolution as u32,
            });
        }
    }
    HarvestTrace::new(start_time, resolution as u32, solar, kinetic, efficiency)
}
