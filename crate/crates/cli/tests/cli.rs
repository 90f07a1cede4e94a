// Copyright 2026 nv-ltm Contributors
// SPDX-License-Identifier: Apache-2.0

use std::process::{Command, Output};

use ltm_cli::commands::read_table;
use ltm_cli::OutputTable;

fn ltm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ltm"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_table(args: &[&str]) -> OutputTable {
    let out = ltm(args);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    OutputTable::from_csv(&String::from_utf8(out.stdout).unwrap()).unwrap()
}

fn code(args: &[&str]) -> i32 {
    ltm(args).status.code().expect("exit code")
}

#[test]
fn exit_codes() {
    assert_eq!(code(&["--help"]), 0);
    assert_eq!(code(&["--version"]), 0);
    assert_eq!(code(&["warp-drive"]), 1);
    assert_eq!(code(&["steady-state", "--set", "drive.warp=1"]), 1);
    assert_eq!(
        code(&["steady-state", "--set", "drive.omega=3 furlongs"]),
        1
    );
    assert_eq!(code(&["steady-state", "--preset", "nope"]), 1);
    assert_eq!(code(&["experiment", "fig9"]), 1);
    assert_eq!(code(&["steady-state", "--config", "/nonexistent.toml"]), 1);
    assert_eq!(
        code(&[
            "sensitivity-dc",
            "--field",
            "0",
            "--set",
            "drive.lambda=0.1 MHz"
        ]),
        3
    );
    assert_eq!(code(&["response", "--from", "40 MHz", "--to", "40 MHz"]), 3);
    assert_eq!(code(&["steady-state", "--delta", "100 MHz"]), 0);
}

#[test]
fn two_by_two_sweep_has_four_rows_in_order() {
    let t = stdout_table(&[
        "sweep",
        "--axis1",
        "drive.delta:0:100 MHz:2",
        "--axis2",
        "drive.lambda:1 MHz:2 MHz:2",
        "--outputs",
        "n,p_out,populations,eta",
    ]);
    assert_eq!(t.rows.len(), 4);
    assert_eq!(t.columns.len(), 2 + 2 + 9 + 1);
    let x = t.column("drive.delta").unwrap();
    let y = t.column("drive.lambda").unwrap();
    assert_eq!(x, [Some(0.0), Some(0.0), Some(1e8), Some(1e8)]);
    assert_eq!(y, [Some(1e6), Some(2e6), Some(1e6), Some(2e6)]);
    assert!(t.columns.iter().all(|c| !c.unit.is_empty()));
    // Dark point: no sensitivity, but a defined zero output.
    assert_eq!(t.column("P_out").unwrap()[0], Some(0.0));
    assert_eq!(t.column("eta_dc").unwrap()[0], None);
}

#[test]
fn sweeps_are_deterministic_across_runs_and_schedulers() {
    let args = [
        "sweep",
        "--axis1",
        "drive.delta:-150 MHz:150 MHz:31",
        "--axis2",
        "drive.lambda:0 MHz:4 MHz:9",
        "--outputs",
        "n,p_out",
    ];
    let a = ltm(&args).stdout;
    let b = ltm(&args).stdout;
    let mut seq_args = args.to_vec();
    seq_args.push("--sequential");
    let c = ltm(&seq_args).stdout;
    assert!(!a.is_empty());
    assert_eq!(a, b);
    assert_eq!(a, c);
}

#[test]
fn files_round_trip_in_both_formats() {
    let dir = tempfile::tempdir().unwrap();
    for ext in ["csv", "json"] {
        let path = dir.path().join(format!("s.{ext}"));
        let out = ltm(&[
            "sweep",
            "--axis1",
            "drive.delta:-50 MHz:50 MHz:5",
            "--outputs",
            "n,eta",
            "--format",
            ext,
            "--out",
            path.to_str().unwrap(),
        ]);
        assert!(out.status.success());
        let t = read_table(&path).unwrap();
        assert_eq!(t.rows.len(), 5);
        let again = match ext {
            "csv" => OutputTable::from_csv(&t.to_csv().unwrap()).unwrap(),
            _ => OutputTable::from_json(&t.to_json()).unwrap(),
        };
        assert_eq!(again, t);
    }
}

fn hash(args: &[&str]) -> String {
    let mut a = vec!["operating-point"];
    a.extend_from_slice(args);
    stdout_table(&a).provenance.config_hash
}

#[test]
fn config_hash_tracks_physical_parameters_only() {
    let base = hash(&[]);
    assert_eq!(base, hash(&["--set", "drive.omega=3.67 MHz"]));
    assert_eq!(base, hash(&["--set", "drive.omega=3670 kHz"]));
    assert_ne!(base, hash(&["--set", "drive.omega=3.68 MHz"]));
    assert_ne!(base, hash(&["--set", "rates.l27=1 kHz"]));
    assert_ne!(base, hash(&["--set", "orientation.mode=four_orientation"]));
    assert_ne!(base, hash(&["--preset", "high_sensitivity"]));
}

#[test]
fn toml_and_json_files_agree() {
    let dir = tempfile::tempdir().unwrap();
    let toml_path = dir.path().join("c.toml");
    std::fs::write(
        &toml_path,
        r#"
preset = "baseline"

[drive]
omega = { value = 2.5, unit = "MHz" }
delta = { value = 80, unit = "MHz" }

[geometry]
nv_concentration = { value = 5.7, unit = "ppb" }
kappa = "3 MHz"
"#,
    )
    .unwrap();
    let json_path = dir.path().join("c.json");
    std::fs::write(
        &json_path,
        r#"{
  "preset": "baseline",
  "drive": {
    "omega": {"value": 2500, "unit": "kHz"},
    "delta": {"value": 8e7, "unit": "rad/s"}
  },
  "geometry": {
    "nv_concentration": {"value": 5.7, "unit": "ppb"},
    "kappa": {"value": 3e6, "unit": "rad/s"}
  }
}"#,
    )
    .unwrap();
    let a = stdout_table(&["steady-state", "--config", toml_path.to_str().unwrap()]);
    let b = stdout_table(&["steady-state", "--config", json_path.to_str().unwrap()]);
    assert_eq!(a.provenance.config_hash, b.provenance.config_hash);
    assert_eq!(a.rows, b.rows);
    assert_eq!(a.column("drive.delta").unwrap()[0], Some(8e7));
    let overridden = stdout_table(&[
        "steady-state",
        "--config",
        toml_path.to_str().unwrap(),
        "--set",
        "drive.delta=0",
    ]);
    assert_eq!(overridden.column("drive.delta").unwrap()[0], Some(0.0));
}

#[test]
fn response_trace_has_time_series_header() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.csv");
    let status = ltm(&[
        "response",
        "--trace",
        "--samples",
        "50",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(
        status.status.success(),
        "{}",
        String::from_utf8_lossy(&status.stderr)
    );
    let summary = read_table(&dir.path().join("r_response.csv")).unwrap();
    let t63 = summary.column("t_63").unwrap()[0].unwrap();
    let t90 = summary.column("t_90").unwrap()[0].unwrap();
    assert!(0.0 < t63 && t63 <= t90);
    let trace_path = dir.path().join("r_trace.csv");
    let text = std::fs::read_to_string(&trace_path).unwrap();
    let header = text.lines().find(|l| !l.starts_with('#')).unwrap();
    let names: Vec<&str> = header
        .split(',')
        .map(|c| c.split(" [").next().unwrap())
        .collect();
    assert_eq!(
        names,
        [
            "t", "rho11", "rho22", "rho33", "rho44", "rho55", "rho66", "rho77", "rho14_re",
            "rho14_im", "n", "P_out_W"
        ]
    );
    let trace = read_table(&trace_path).unwrap();
    assert_eq!(trace.rows.len(), 50);
    let n = trace.column("n").unwrap();
    assert!(n.last().unwrap().unwrap() > n[0].unwrap());
}

fn note(t: &OutputTable, key: &str) -> String {
    t.provenance
        .notes
        .iter()
        .find(|(k, _)| k == key)
        .map(|(_, v)| v.clone())
        .unwrap_or_else(|| panic!("missing note {key}"))
}

#[test]
fn fig1b_threshold_is_higher_on_resonance() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fig1b.csv");
    assert_eq!(
        code(&["experiment", "fig1b", "--out", out.to_str().unwrap()]),
        0
    );
    let res = read_table(&dir.path().join("fig1b_resonant.csv")).unwrap();
    let off = read_table(&dir.path().join("fig1b_off_resonant.csv")).unwrap();
    let th = |t: &OutputTable| {
        note(t, "lambda_threshold_rad_per_s")
            .parse::<f64>()
            .unwrap()
    };
    assert!(th(&res) > th(&off));
    assert_eq!(res.rows.len(), 201);
    // The output kinks at threshold: zero below, rising above.
    let lam = off.column("drive.lambda").unwrap();
    let p = off.column("P_out").unwrap();
    for (l, p) in lam.iter().zip(&p) {
        let (l, p) = (l.unwrap(), p.unwrap());
        if l < 0.99 * th(&off) {
            assert_eq!(p, 0.0);
        } else if l > 1.01 * th(&off) {
            assert!(p > 0.0);
        }
    }
}

#[test]
fn fig2a_map_has_dark_resonance_at_operating_pump() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("map.json");
    assert_eq!(
        code(&[
            "experiment",
            "fig2a",
            "--format",
            "json",
            "--out",
            out.to_str().unwrap()
        ]),
        0
    );
    let t = read_table(&out).unwrap();
    assert_eq!(t.rows.len(), 61 * 41);
    let cell = |delta: f64, lambda: f64| {
        t.rows
            .iter()
            .find(|r| (r[0].unwrap() - delta).abs() < 1.0 && (r[1].unwrap() - lambda).abs() < 1.0)
            .unwrap()[2]
            .unwrap()
    };
    assert_eq!(cell(0.0, 1e6), 0.0);
    assert!(cell(100e6, 1.1e6) > 1e-4);
    assert!(cell(-100e6, 1.1e6) > 1e-4);
}

#[test]
fn fig3b_is_flat_then_degrades() {
    let t = stdout_table(&["experiment", "fig3b"]);
    let f = t.column("frequency").unwrap();
    let eta = t.column("eta_ac").unwrap();
    let at = |hz: f64| {
        let k = f
            .iter()
            .position(|v| (v.unwrap() / hz - 1.0).abs() < 1e-9)
            .unwrap();
        eta[k].unwrap()
    };
    assert!((at(1e4) / at(1e3) - 1.0).abs() < 0.01);
    assert!(at(1e7) > 2.0 * at(1e3));
}

#[test]
fn fig4_reports_deviation_per_ratio() {
    let out = ltm(&["experiment", "fig4"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let tables: Vec<&str> = text.split("\n\n").collect();
    assert_eq!(tables.len(), 4);
    for chunk in tables {
        let t = OutputTable::from_csv(chunk).unwrap();
        for ratio in ["0.1", "0.01"] {
            let d: f64 = note(&t, &format!("max_rel_deviation_{ratio}"))
                .parse()
                .unwrap();
            assert!(d.is_finite() && d >= 0.0);
        }
        assert_eq!(t.columns.len(), 4);
    }
}

#[test]
fn remaining_commands_run() {
    for args in [
        vec!["ac", "--preset", "high_sensitivity"],
        vec![
            "sensitivity-ac",
            "--preset",
            "high_sensitivity",
            "--method",
            "quasi-static",
        ],
        vec!["sensitivity-dc", "--range", "-200 uT:200 uT:9"],
        vec!["operating-point", "--omega", "5 MHz"],
        vec!["optimize", "--vary", "lambda", "--factor", "1"],
    ] {
        let out = ltm(&args);
        assert!(
            out.status.success(),
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        let t = OutputTable::from_csv(&String::from_utf8(out.stdout).unwrap()).unwrap();
        assert!(!t.rows.is_empty());
    }
    let ac = stdout_table(&["sensitivity-ac", "--preset", "high_sensitivity"]);
    let eta = ac.column("eta_ac").unwrap()[0].unwrap();
    assert!(eta > 0.0 && eta < 1e-13);
}
