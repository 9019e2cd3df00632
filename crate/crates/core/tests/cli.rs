//! End-to-end tests of the `lattice-clock` binary.

use std::process::{Command, Output};

use lattice_clock::output::JsonDocument;
use lattice_clock::sweep::{DisplacementRow, NoiseRow};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lattice-clock"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn params_reports_amplitude_for_ten_nanometres() {
    let out = run(&["params", "--d", "10nm"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert_eq!(text.lines().next(), Some("name,value,unit"));
    let alpha_line = text.lines().find(|l| l.starts_with("alpha(")).unwrap();
    let alpha: f64 = alpha_line.split(',').nth(1).unwrap().parse().unwrap();
    assert!((alpha - 0.395).abs() < 1e-3);
}

#[test]
fn params_json_carries_schema() {
    let out = run(&["params", "--atom", "sr87", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["schema"], 1);
}

#[test]
fn invalid_inputs_exit_with_usage_code() {
    for args in [
        &["params", "--depth", "0"][..],
        &["params", "--atom", "unobtainium"],
        &["params", "--d", "ten"],
        &["no-such-command"],
        &["verify", "--dim", "4", "--alpha", "2.0"],
        &["verify", "--check", "no-such-check"],
        &["sweep-noise", "--format", "xml"],
    ] {
        assert_eq!(run(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn help_exits_cleanly() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn config_errors_exit_with_usage_code() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "displacement_nm = [3.0, 1.0]\n").unwrap();
    assert_eq!(
        run(&["sweep-displacement", "--config", path.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
    std::fs::write(&path, "no_such_key = 1\n").unwrap();
    assert_eq!(
        run(&["sweep-displacement", "--config", path.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn displacement_sweep_writes_csv_file_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("sweep.toml");
    std::fs::write(
        &config,
        "atom = \"mg24\"\nrelative_phase = 0.0\ndisplacement_nm = { start = 0.0, stop = 20.0, count = 5 }\n",
    )
    .unwrap();
    let mut outputs = Vec::new();
    for name in ["a.csv", "b.csv"] {
        let target = dir.path().join(name);
        let out = run(&[
            "sweep-displacement",
            "--config",
            config.to_str().unwrap(),
            "--output",
            target.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0));
        outputs.push(std::fs::read_to_string(target).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    let lines: Vec<&str> = outputs[0].lines().collect();
    assert_eq!(lines.len(), 6);
    assert!(lines[0].starts_with("displacement_m,alpha,"));
    // with equal-phase branches the d = 0 state is a single coherent state: no discrepancy
    let first: Vec<f64> = lines[1].split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(first[2], 0.0);
}

#[test]
fn displacement_sweep_json_round_trips_undefined_points() {
    let out = run(&["sweep-displacement", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let doc: JsonDocument<DisplacementRow> = JsonDocument::parse(&stdout(&out)).unwrap();
    assert_eq!(doc.kind, "displacement-sweep");
    assert!(doc.rows[0].delta1_abs.is_nan());
    assert!(doc.rows[1..].iter().all(|r| r.delta1_abs > 0.0));
}

#[test]
fn noise_sweep_covers_the_rate_grid() {
    let out = run(&["sweep-noise", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let doc: JsonDocument<NoiseRow> = JsonDocument::parse(&stdout(&out)).unwrap();
    assert_eq!(doc.rows.len(), 100);
    let corner = &doc.rows[0];
    assert_eq!((corner.amplitude_rate, corner.diffusion_rate), (0.0, 0.0));
    assert!(doc.rows.iter().all(|r| r.delta1_abs <= corner.delta1_abs));
}

#[test]
fn wrong_channel_rule_fails_verification() {
    let out = run(&[
        "verify",
        "--quick",
        "--check",
        "channel-rules",
        "--corrupt-rules",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("channel-rules,FAIL"));
}

#[test]
fn quick_engine_check_passes() {
    let out = run(&["verify", "--quick", "--check", "engine-vs-closed-form"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("engine-vs-closed-form,PASS"));
}
