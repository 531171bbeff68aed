// SPDX-License-Identifier: Apache-2.0
//! `wildtrack`: run, sweep and generate traces for the tracker simulator.
//!
//! Exit codes: 0 success, 2 usage, 3 invalid configuration, 4 invalid
//! trace, 5 i/o failure.

mod error;
mod inputs;
mod output;
mod sweep;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use wildtrack_core::harvest::{
    generate_kinetic_trace, solar_current_from_irradiance, write_harvest_csv, write_irradiance_csv,
};
use wildtrack_core::{run_simulation, HarvestTrace};

use error::{CliError, CliResult};

#[derive(Parser)]
#[command(name = "wildtrack", version, about = "Energy-neutral wildlife tracker simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML configuration file; built-in defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Seed for every random generator, overriding the configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// Days to generate, or to simulate from a trace file.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    days: Option<u32>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation and write timeseries, event log, metrics and ledger.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Irradiance CSV or harvest CSV; a synthetic winter trace when omitted.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Harvest CSV whose kinetic column replaces the generated one.
        #[arg(long)]
        kinetic: Option<PathBuf>,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a capacitor × fix-interval grid from a sweep spec (--config).
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Overrides the spec's trace file.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write a synthetic irradiance CSV.
    GenSolar {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write a synthetic kinetic harvest CSV (solar column zero).
    GenKinetic {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate {
            common,
            trace,
            kinetic,
            out,
        } => simulate(&common, trace.as_deref(), kinetic.as_deref(), &out),
        Command::Sweep { common, trace, out } => sweep(&common, trace, &out),
        Command::GenSolar { common, out } => gen_solar(&common, &out),
        Command::GenKinetic { common, out } => gen_kinetic(&common, &out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}

fn simulate(common: &Common, trace: Option<&Path>, kinetic: Option<&Path>, out: &Path) -> CliResult<()> {
    let config = inputs::load_config(common.config.as_deref(), common.seed)?;
    let validated = inputs::validate(&config.system, None)?;
    let harvest = inputs::resolve_trace(&config, trace, kinetic, common.days)?;
    let duration = inputs::run_length(trace.is_some(), common.days);
    let output = run_simulation(&validated, &harvest, duration).map_err(|e| CliError::trace(e.to_string()))?;
    output::write_run(out, &output, &harvest)?;

    let m = &output.metrics;
    println!(
        "{} s simulated: {} fixes ({} hot, {} hot+eph, {} warm+eph, {} cold), {:.2} ± {:.2} per day",
        output.run_length,
        m.total_fixes,
        m.hot_fixes,
        m.hot_ephemeris,
        m.warm_ephemeris,
        m.cold_starts,
        m.fixes_per_day_mean,
        m.fixes_per_day_std
    );
    println!(
        "{} transmissions, {} depletions, {:.0} s off, min voltage {:.3} V",
        m.transmissions, m.depletion_count, m.total_off_seconds, m.min_voltage
    );
    println!(
        "harvested {:.2} J, consumed {:.2} J, discarded {:.2} J, closure residual {:.1e}",
        output.ledger.harvested_in,
        output.ledger.total_consumed(),
        output.ledger.discarded_at_clamp,
        output.ledger.relative_closure_error()
    );
    println!("outputs written to {}", out.display());
    Ok(())
}

fn sweep(common: &Common, trace: Option<PathBuf>, out: &Path) -> CliResult<()> {
    let path = common
        .config
        .as_deref()
        .ok_or_else(|| CliError::config("sweep requires --config <sweep spec>"))?;
    let mut spec = sweep::SweepSpec::load(path)?;
    if let Some(seed) = common.seed {
        inputs::apply_seed(&mut spec.base, seed);
    }
    if trace.is_some() {
        spec.trace.file = trace;
    }
    let days = common.days.or(spec.trace.days);
    let combos = spec.combinations()?;
    let harvest = inputs::resolve_trace(
        &spec.base,
        spec.trace.file.as_deref(),
        spec.trace.kinetic.as_deref(),
        days,
    )?;
    let duration = inputs::run_length(spec.trace.file.is_some(), days);
    let table = sweep::run(&combos, &harvest, duration, out)?;
    print!("{table}");
    Ok(())
}

/// Peak current (mA) and per-day harvested energy (J at the supply rail).
fn summarise(currents: &[f64], resolution: u32, v_supply: f64) {
    let per_day = (86_400 / resolution) as usize;
    for (d, day) in currents.chunks(per_day).enumerate() {
        let energy: f64 = day.iter().sum::<f64>() * resolution as f64 * v_supply;
        println!("day {d}: {energy:.3} J");
    }
    let peak = currents.iter().copied().fold(0.0, f64::max);
    println!("peak current {:.4} mA", peak * 1e3);
}

fn gen_solar(common: &Common, out: &Path) -> CliResult<()> {
    let config = inputs::load_config(common.config.as_deref(), common.seed)?;
    let days = common.days.unwrap_or(config.harvest.days);
    let irradiance = config
        .harvest
        .synthetic_irradiance(days)
        .map_err(|e| CliError::config(e.to_string()))?;
    let mut bytes = Vec::new();
    write_irradiance_csv(&irradiance, &mut bytes).expect("in-memory write");
    output::write_atomic(out, &bytes)?;
    let amps = solar_current_from_irradiance(&irradiance, &config.harvest.solar_chain)
        .map_err(|e| CliError::config(e.to_string()))?;
    summarise(&amps, irradiance.resolution, config.harvest.solar_chain.v_supply);
    Ok(())
}

fn gen_kinetic(common: &Common, out: &Path) -> CliResult<()> {
    let config = inputs::load_config(common.config.as_deref(), common.seed)?;
    let days = common.days.unwrap_or(config.harvest.days);
    let resolution = config.system.intervals.base_tick as u32;
    let v_supply = config.harvest.solar_chain.v_supply;
    let kinetic = generate_kinetic_trace(days, &config.harvest.kinetic, resolution, v_supply)
        .map_err(|e| CliError::config(e.to_string()))?;
    let n = kinetic.len();
    let trace = HarvestTrace::new(
        config.harvest.start_time,
        resolution,
        vec![0.0; n],
        kinetic,
        config.system.combiner_efficiency,
    )
    .map_err(|e| CliError::config(e.to_string()))?;
    let mut bytes = Vec::new();
    write_harvest_csv(&trace, &mut bytes).expect("in-memory write");
    output::write_atomic(out, &bytes)?;
    summarise(trace.kinetic(), resolution, v_supply);
    Ok(())
}
