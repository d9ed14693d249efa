use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn rni(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rni"))
        .args(args)
        .env_remove("RNI_SEED")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

#[test]
fn sdp_example_reports_both_variants() {
    let v = json(&rni(&["sdp-example"]));
    let variants = v["variants"].as_array().unwrap();
    assert_eq!(variants.len(), 2);
    for r in variants {
        assert!(r["gap"].as_f64().unwrap() <= 1e-6);
    }
    assert_eq!(v["matching_variants"][0], "paper");
}

#[test]
fn closed_form_post_for_amplitude_damping() {
    let v = json(&rni(&[
        "measure",
        "builtin:ad:1",
        "--method",
        "closed-form",
        "--mode",
        "post",
    ]));
    assert!((v["value"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    assert_eq!(v["cross_check"]["agrees"], true);
}

#[test]
fn closed_form_post_rejects_other_channels() {
    let out = rni(&[
        "measure",
        "builtin:hadamard",
        "--method",
        "closed-form",
        "--mode",
        "post",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn hadamard_distance_under_strict_variant() {
    let v = json(&rni(&[
        "measure",
        "builtin:hadamard",
        "--method",
        "sdp-diamond",
    ]));
    assert!((v["value"].as_f64().unwrap() - 1.0).abs() < 1e-6);
    assert_eq!(v["slater_point_strictly_feasible"], true);
}

#[test]
fn optimize_method_with_l1() {
    let v = json(&rni(&["measure", "builtin:hadamard", "--measure", "l1"]));
    assert!((v["value"].as_f64().unwrap() - 1.0).abs() < 1e-6);
}

#[test]
fn measure_writes_report_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let out_s = out.to_str().unwrap();
    let v = json(&rni(&[
        "--seed",
        "7",
        "measure",
        "builtin:dephasing",
        "--method",
        "t-a-non",
        "--out",
        out_s,
    ]));
    assert!(v["value"].as_f64().unwrap().abs() < 1e-6);
    let saved: Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(saved, v);
    let manifest: Value =
        serde_json::from_str(&fs::read_to_string(format!("{out_s}.manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["seed"], 7);
    assert_eq!(manifest["command"], "measure");
    assert_eq!(manifest["parameters"]["mio_variant"], "strict");
}

#[test]
fn sweep_writes_csv_and_plot() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("sweep.csv");
    let svg = dir.path().join("sweep.svg");
    let out = rni(&[
        "sweep",
        "--channel",
        "ad",
        "--steps",
        "5",
        "--out",
        csv.to_str().unwrap(),
        "--plot",
        svg.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "eta,t_post,t_nonpost");
    assert_eq!(lines.len(), 6);
    assert_eq!(lines[5], "1.00000000,0.500000000,0.500000000");
    for line in &lines[1..] {
        let f: Vec<f64> = line.split(',').map(|s| s.parse().unwrap()).collect();
        assert!(f[1] >= f[2] - 1e-8);
    }
    assert!(fs::read_to_string(&svg).unwrap().starts_with("<svg"));
}

#[test]
fn sweep_rejects_single_step() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("s.csv");
    let out = rni(&[
        "sweep",
        "--channel",
        "ad",
        "--steps",
        "1",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn discriminate_is_reproducible_and_close_to_optimal() {
    let args = [
        "discriminate",
        "builtin:identity",
        "builtin:pauli-x",
        "--trials",
        "5000",
    ];
    let a = json(&rni(&args));
    let b = json(&rni(&args));
    assert_eq!(a, b);
    assert!((a["optimal_success"].as_f64().unwrap() - 1.0).abs() < 1e-6);
    assert_eq!(a["empirical_rate"].as_f64().unwrap(), 1.0);
}

#[test]
fn fixture_round_trips_through_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ad.json");
    let p = path.to_str().unwrap();
    assert!(rni(&["fixture", "builtin:ad:0.5", "--out", p])
        .status
        .success());
    let v = json(&rni(&[
        "measure",
        p,
        "--method",
        "closed-form",
        "--mode",
        "post",
    ]));
    assert!((v["eta"].as_f64().unwrap() - 0.5).abs() < 1e-9);
}

#[test]
fn unreadable_or_invalid_channel_files_exit_with_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{ not json").unwrap();
    assert_eq!(
        rni(&["measure", bad.to_str().unwrap()]).status.code(),
        Some(2)
    );
    assert_eq!(
        rni(&["measure", "/nonexistent/channel.json"]).status.code(),
        Some(2)
    );
    assert_eq!(rni(&["measure", "builtin:unknown"]).status.code(), Some(2));
}
