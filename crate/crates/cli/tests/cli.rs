// SPDX-License-Identifier: Apache-2.0
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn wildtrack(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wildtrack"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn simulate_bundled_trace() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("run");
    let trace = data("winter_3d.csv");
    let res = wildtrack(&["simulate", "--trace", path_str(&trace), "--out", path_str(&out)]);
    assert_eq!(code(&res), 0, "{}", stderr(&res));
    for f in ["timeseries.csv", "metrics.json", "ledger.json", "events.csv"] {
        assert!(out.join(f).is_file(), "{f} missing");
    }
    let metrics: serde_json::Value = serde_json::from_slice(&fs::read(out.join("metrics.json")).unwrap()).unwrap();
    let total = metrics["total_fixes"].as_u64().unwrap();
    let parts: u64 = ["hot_fixes", "hot_ephemeris", "warm_ephemeris", "cold_starts"]
        .iter()
        .map(|k| metrics[k].as_u64().unwrap())
        .sum();
    assert_eq!(total, parts);
    assert_eq!(metrics["run_length_s"].as_u64(), Some(3 * 86_400));

    let ledger: serde_json::Value = serde_json::from_slice(&fs::read(out.join("ledger.json")).unwrap()).unwrap();
    assert!(ledger["relative_closure_error"].as_f64().unwrap() < 0.005);

    let series = fs::read_to_string(out.join("timeseries.csv")).unwrap();
    assert!(series.starts_with("t_s,voltage_v,i_solar_a,i_kinetic_a,i_combined_a,power_state,event\n"));
    assert!(series.lines().count() > 3 * 1440);
}

#[test]
fn simulate_days_limits_run() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("run");
    let trace = data("winter_3d.csv");
    let res = wildtrack(&[
        "simulate",
        "--trace",
        path_str(&trace),
        "--days",
        "1",
        "--out",
        path_str(&out),
    ]);
    assert_eq!(code(&res), 0, "{}", stderr(&res));
    let metrics: serde_json::Value = serde_json::from_slice(&fs::read(out.join("metrics.json")).unwrap()).unwrap();
    assert_eq!(metrics["run_length_s"].as_u64(), Some(86_400));

    let res = wildtrack(&[
        "simulate",
        "--trace",
        path_str(&trace),
        "--days",
        "4",
        "--out",
        path_str(&out),
    ]);
    assert_eq!(code(&res), 4, "{}", stderr(&res));
}

#[test]
fn simulate_synthetic_with_config() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("run");
    let config = data("tracker.toml");
    let res = wildtrack(&[
        "simulate",
        "--config",
        path_str(&config),
        "--days",
        "1",
        "--seed",
        "5",
        "--out",
        path_str(&out),
    ]);
    assert_eq!(code(&res), 0, "{}", stderr(&res));
    assert!(String::from_utf8_lossy(&res.stdout).contains("86400 s simulated"));
}

#[test]
fn invalid_config_exit_code() {
    let dir = TempDir::new().unwrap();
    let config = dir.path().join("bad.toml");
    fs::write(&config, "[intervals]\nfix = 90\n").unwrap();
    let res = wildtrack(&[
        "simulate",
        "--config",
        path_str(&config),
        "--days",
        "1",
        "--out",
        path_str(&dir.path().join("o")),
    ]);
    assert_eq!(code(&res), 3);
    let msg = stderr(&res);
    assert!(msg.contains("intervals.fix"), "{msg}");
    assert!(msg.contains("not a multiple of base tick"), "{msg}");

    fs::write(&config, "initial_voltage = 6.0\n").unwrap();
    let res = wildtrack(&[
        "simulate",
        "--config",
        path_str(&config),
        "--days",
        "1",
        "--out",
        path_str(&dir.path().join("o")),
    ]);
    assert_eq!(code(&res), 3);
    assert!(stderr(&res).contains("exceeds v_max"));

    fs::write(&config, "no_such_key = 1\n").unwrap();
    let res = wildtrack(&[
        "simulate",
        "--config",
        path_str(&config),
        "--out",
        path_str(&dir.path().join("o")),
    ]);
    assert_eq!(code(&res), 3);
}

#[test]
fn missing_trace_exit_code() {
    let dir = TempDir::new().unwrap();
    let res = wildtrack(&[
        "simulate",
        "--trace",
        path_str(&dir.path().join("absent.csv")),
        "--out",
        path_str(&dir.path().join("o")),
    ]);
    assert_eq!(code(&res), 4, "{}", stderr(&res));
}

#[test]
fn malformed_trace_exit_code() {
    let dir = TempDir::new().unwrap();
    let trace = dir.path().join("bad.csv");
    fs::write(&trace, "timestamp,irradiance_wm2\n0,10\n60,-5\n").unwrap();
    let res = wildtrack(&[
        "simulate",
        "--trace",
        path_str(&trace),
        "--out",
        path_str(&dir.path().join("o")),
    ]);
    assert_eq!(code(&res), 4, "{}", stderr(&res));
}

#[test]
fn unwritable_output_exit_code() {
    let dir = TempDir::new().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "").unwrap();
    let res = wildtrack(&["simulate", "--days", "1", "--out", path_str(&blocker.join("sub"))]);
    assert_eq!(code(&res), 5, "{}", stderr(&res));
}

#[test]
fn usage_errors() {
    let dir = TempDir::new().unwrap();
    let res = wildtrack(&["gen-solar", "--days", "0", "--out", path_str(&dir.path().join("s.csv"))]);
    assert_eq!(code(&res), 2);
    assert_eq!(code(&wildtrack(&["frobnicate"])), 2);
}

#[test]
fn gen_kinetic_reports_daily_energy_and_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let res = wildtrack(&["gen-kinetic", "--days", "1", "--out", path_str(&a)]);
    assert_eq!(code(&res), 0);
    assert!(String::from_utf8_lossy(&res.stdout).contains("day 0: 13.070 J"));
    wildtrack(&["gen-kinetic", "--days", "1", "--out", path_str(&b)]);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());

    let c = dir.path().join("c.csv");
    wildtrack(&["gen-kinetic", "--days", "1", "--seed", "9", "--out", path_str(&c)]);
    assert_ne!(fs::read(&a).unwrap(), fs::read(&c).unwrap());
    assert!(fs::read_to_string(&a)
        .unwrap()
        .starts_with("t_s,solar_a,kinetic_a,combined_a\n"));
}

#[test]
fn gen_solar_matches_bundled_trace() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("s.csv");
    let res = wildtrack(&["gen-solar", "--days", "3", "--seed", "42", "--out", path_str(&out)]);
    assert_eq!(code(&res), 0);
    assert_eq!(fs::read(&out).unwrap(), fs::read(data("winter_3d.csv")).unwrap());
    assert!(String::from_utf8_lossy(&res.stdout).contains("peak current"));
}

#[test]
fn simulate_with_separate_kinetic_file() {
    let dir = TempDir::new().unwrap();
    let kinetic = dir.path().join("k.csv");
    assert_eq!(
        code(&wildtrack(&["gen-kinetic", "--days", "3", "--out", path_str(&kinetic)])),
        0
    );
    let solar = data("winter_3d.csv");
    let run = |kin: Option<&Path>, name: &str| {
        let out = dir.path().join(name);
        let mut args = vec!["simulate", "--trace", path_str(&solar), "--out", path_str(&out)];
        if let Some(k) = kin {
            args.extend(["--kinetic", path_str(k)]);
        }
        let res = wildtrack(&args);
        assert_eq!(code(&res), 0, "{}", stderr(&res));
        fs::read(out.join("timeseries.csv")).unwrap()
    };
    // the generated kinetic series is the default profile, so both agree
    assert_eq!(run(Some(&kinetic), "with"), run(None, "without"));

    let harvest_only = dir.path().join("kin_run");
    let res = wildtrack(&[
        "simulate",
        "--trace",
        path_str(&kinetic),
        "--out",
        path_str(&harvest_only),
    ]);
    assert_eq!(code(&res), 0, "{}", stderr(&res));
}

#[test]
fn sweep_grid() {
    let dir = TempDir::new().unwrap();
    let spec = data("sweep_grid.toml");
    let first = dir.path().join("one");
    let second = dir.path().join("two");
    for out in [&first, &second] {
        let res = wildtrack(&["sweep", "--config", path_str(&spec), "--out", path_str(out)]);
        assert_eq!(code(&res), 0, "{}", stderr(&res));
    }
    let table = fs::read_to_string(first.join("comparison.csv")).unwrap();
    assert_eq!(table, fs::read_to_string(second.join("comparison.csv")).unwrap());

    let mut lines = table.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = |name: &str| header.iter().position(|h| *h == name).unwrap();
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 9);
    let order: Vec<(&str, &str)> = rows
        .iter()
        .map(|r| (r[col("capacitance_f")], r[col("fix_interval_s")]))
        .collect();
    assert_eq!(order[0], ("1", "60"));
    assert_eq!(order[4], ("2.5", "120"));
    assert_eq!(order[8], ("5", "300"));
    for r in &rows {
        let n = |c: &str| r[col(c)].parse::<u64>().unwrap();
        assert_eq!(
            n("total_fixes"),
            n("hot_fixes") + n("hot_ephemeris") + n("warm_ephemeris") + n("cold_starts")
        );
    }
    for name in ["fixes_per_day_mean", "fixes_per_day_std"] {
        assert!(header.contains(&name));
    }
    assert!(first.join("c2.5F_fix120s").join("metrics.json").is_file());
}

#[test]
fn sweep_rejects_invalid_combination_before_running() {
    let dir = TempDir::new().unwrap();
    let spec = dir.path().join("spec.toml");
    fs::write(
        &spec,
        "fix_intervals = [120, 90]\n[[capacitors]]\ncapacitance = 2.5\n[trace]\ndays = 1\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    let res = wildtrack(&["sweep", "--config", path_str(&spec), "--out", path_str(&out)]);
    assert_eq!(code(&res), 3);
    assert!(stderr(&res).contains("90 s"));
    assert!(!out.exists());

    fs::write(&spec, "fix_intervals = [120]\n[[capacitors]]\ncapacitance = 3.3\n").unwrap();
    let res = wildtrack(&["sweep", "--config", path_str(&spec), "--out", path_str(&out)]);
    assert_eq!(code(&res), 3);
}
