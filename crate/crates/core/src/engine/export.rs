// SPDX-License-Identifier: Apache-2.0
//! CSV views of a finished run.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use super::{SimEvent, SimOutput};
use crate::harvest::HarvestTrace;

/// `t_s,voltage_v,i_solar_a,i_kinetic_a,i_combined_a,power_state,event`:
/// one row per tick boundary plus one per event, in time order.
pub fn write_timeseries<W: Write>(output: &SimOutput, harvest: &HarvestTrace, out: W) -> io::Result<()> {
    let mut out = BufWriter::new(out);
    writeln!(
        out,
        "t_s,voltage_v,i_solar_a,i_kinetic_a,i_combined_a,power_state,event"
    )?;
    let last = harvest.len().saturating_sub(1);
    for sample in &output.series {
        let k = sample.tick.min(last);
        let event = sample
            .event
            .map(|i| output.events[i].kind.to_string())
            .unwrap_or_default();
        writeln!(
            out,
            "{:.3},{:.6},{:e},{:e},{:e},{},{}",
            sample.time,
            sample.voltage,
            harvest.solar()[k],
            harvest.kinetic()[k],
            harvest.combined()[k],
            sample.power,
            event
        )?;
    }
    out.flush()
}

pub fn export_timeseries(output: &SimOutput, harvest: &HarvestTrace, path: impl AsRef<Path>) -> io::Result<()> {
    write_timeseries(output, harvest, File::create(path)?)
}

/// `time_s,event,voltage_before_v,voltage_after_v`.
pub fn write_event_log<W: Write>(events: &[SimEvent], out: W) -> io::Result<()> {
    let mut out = BufWriter::new(out);
    writeln!(out, "time_s,event,voltage_before_v,voltage_after_v")?;
    for ev in events {
        writeln!(
            out,
            "{:.6},{},{:.9},{:.9}",
            ev.time, ev.kind, ev.voltage_before, ev.voltage_after
        )?;
    }
    out.flush()
}
