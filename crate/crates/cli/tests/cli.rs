use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn bundled(rel: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join(rel).to_string_lossy().into_owned()
}

fn qrelay(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qrelay")).args(args).output().expect("binary runs")
}

fn ok_json(args: &[&str]) -> Value {
    let out = qrelay(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn write_temp(dir: &tempfile::TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn rate(report: &Value, label: &str) -> f64 {
    report["entries"]
        .as_array()
        .unwrap()
        .iter()
        .find(|e| e["label"] == label)
        .unwrap_or_else(|| panic!("no `{label}` in {report}"))["rate"]
        .as_f64()
        .unwrap()
}

#[test]
fn redistribution_rates_of_alice_charlie_pair() {
    let r = ok_json(&["rates", &bundled("states/phi_ac.json"), "--protocol", "redistribution"]);
    assert_eq!(r["protocol"], "redistribution");
    assert!(rate(&r, "qubits").abs() < 1e-9);
    assert!((rate(&r, "ebits") - 1.0).abs() < 1e-9);
}

#[test]
fn relay_rates_of_pairs() {
    let r = ok_json(&["rates", &bundled("states/pairs.json"), "--protocol", "relay"]);
    // e_ac is produced, so its signed rate is negative
    for (label, want) in [("q_ac", 1.0), ("e_ac", -1.0), ("q_cb", 1.0), ("e_cb", 1.0)] {
        assert!((rate(&r, label) - want).abs() < 1e-9, "{label}");
    }
    let all = ok_json(&["rates", &bundled("states/pairs.json"), "--all"]);
    assert!(all.as_array().unwrap().len() >= 5);
}

#[test]
fn missing_register_names_it() {
    let dir = tempfile::tempdir().unwrap();
    let amps = vec!["[0,0]"; 7].join(",");
    let f = write_temp(
        &dir,
        "abc.json",
        &format!(r#"{{"registers":[{{"name":"A","dim":2}},{{"name":"B","dim":2}},{{"name":"C","dim":2}}],"amplitudes":[[1,0],{amps}]}}"#),
    );
    let out = qrelay(&["rates", &f, "--protocol", "relay"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("`R`"));
}

#[test]
fn malformed_files_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    for (name, text) in [
        ("garbage.json", "{not json"),
        ("norm.json", r#"{"registers":[{"name":"A","dim":2}],"amplitudes":[[1,0],[1,0]]}"#),
        ("family.json", r#"{"family":{"name":"ghz","params":{"parties":["Q"]}}}"#),
    ] {
        let f = write_temp(&dir, name, text);
        assert_eq!(qrelay(&["state", &f]).status.code(), Some(2), "{name}");
    }
    assert_eq!(qrelay(&["rates", "/nonexistent/state.json", "--all"]).status.code(), Some(2));
}

#[test]
fn bundled_relay_script_matches_rates() {
    let l = ok_json(&["ledger", &bundled("scripts/relay.proto"), &bundled("states/pairs.json")]);
    assert!(l["residual_vs_relay_rates"].as_f64().unwrap() <= 1e-9);
    assert_eq!(l["trace"].as_array().unwrap().len(), 3);
}

#[test]
fn empty_script_has_empty_tallies() {
    let dir = tempfile::tempdir().unwrap();
    let f = write_temp(&dir, "empty.proto", "");
    let l = ok_json(&["ledger", &f, &bundled("states/pairs.json")]);
    assert_eq!(l["tallies"].as_array().unwrap().len(), 0);
}

#[test]
fn syntax_error_reports_position() {
    let dir = tempfile::tempdir().unwrap();
    let f = write_temp(&dir, "bad.proto", "coherent_merge alice -> charlie\nmerge bob ->\n");
    let out = qrelay(&["ledger", &f, &bundled("states/pairs.json")]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains(":2:"), "{}", String::from_utf8_lossy(&out.stderr));
}

fn ghz_sweep(threads: &str) -> Vec<u8> {
    let out = qrelay(&[
        "simulate",
        &bundled("states/ghz_abr.json"),
        "--mode",
        "merge",
        "--copies",
        "6",
        "--sent-qubits",
        "1..6",
        "--trials",
        "20",
        "--seed",
        "7",
        "--idealize",
        "--threads",
        threads,
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    out.stdout
}

#[test]
fn merge_sweep_is_byte_identical() {
    let a = ghz_sweep("1");
    assert_eq!(a, ghz_sweep("1"));
    assert_eq!(a, ghz_sweep("4"));
    let text = String::from_utf8(a).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("copies,sent_qubits,trial,decoupling_error,uhlmann_fidelity,decoder_fidelity")
    );
    assert_eq!(lines.count(), 120);
}

#[test]
fn merge_with_decoder_fills_the_column() {
    let out = qrelay(&[
        "simulate",
        &bundled("states/ghz_abr.json"),
        "--mode",
        "merge",
        "--copies",
        "2",
        "--sent-qubits",
        "1",
        "--trials",
        "3",
        "--output",
        "json",
    ]);
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 3);
    for r in rows {
        let (f, d) = (r["uhlmann_fidelity"].as_f64().unwrap(), r["decoder_fidelity"].as_f64().unwrap());
        assert!((f - d).abs() < 1e-6);
    }
}

#[test]
fn exact_relay_on_pairs() {
    let out = qrelay(&[
        "simulate",
        &bundled("states/pairs.json"),
        "--mode",
        "relay",
        "--sent-qubits-ac",
        "1",
        "--sent-qubits-cb",
        "1",
        "--preshared",
        "1",
        "--trials",
        "3",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    assert_eq!(
        rdr.headers().unwrap().iter().collect::<Vec<_>>(),
        ["trial", "fidelity_final", "catalyst_deviation", "qubits_ac", "qubits_cb", "ebits_consumed", "ebits_produced"]
    );
    let mut n = 0;
    for rec in rdr.records() {
        let rec = rec.unwrap();
        let f: f64 = rec[1].parse().unwrap();
        assert!((f - 1.0).abs() <= 1e-9);
        n += 1;
    }
    assert_eq!(n, 3);
}

#[test]
fn past_the_cap_exits_3() {
    let out = qrelay(&[
        "simulate",
        &bundled("states/ghz_abr.json"),
        "--mode",
        "merge",
        "--copies",
        "9",
        "--sent-qubits",
        "1",
        "--idealize",
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("MiB"));
    let relay = qrelay(&[
        "simulate",
        &bundled("states/pairs.json"),
        "--mode",
        "relay",
        "--copies",
        "2",
        "--sent-qubits-ac",
        "2",
        "--sent-qubits-cb",
        "2",
        "--preshared",
        "2",
        "--max-amplitudes",
        "1000",
    ]);
    assert_eq!(relay.status.code(), Some(3));
}

#[test]
fn inconsistent_flags_exit_2() {
    let out = qrelay(&["simulate", &bundled("states/ghz_abr.json"), "--mode", "relay", "--sent-qubits-ac", "1"]);
    assert_eq!(out.status.code(), Some(2));
    let out = qrelay(&["simulate", &bundled("states/ghz_abr.json"), "--mode", "merge", "--sent-qubits", "3..1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn state_round_trip_is_bit_exact() {
    let dir = tempfile::tempdir().unwrap();
    for family in ["states/random4.json", "states/pairs.json", "states/ghz_abr.json"] {
        let once = qrelay(&["state", &bundled(family)]);
        assert!(once.status.success());
        let f = write_temp(&dir, "once.json", std::str::from_utf8(&once.stdout).unwrap());
        let twice = qrelay(&["state", &f]);
        assert_eq!(once.stdout, twice.stdout, "{family}");
        let a: Value = serde_json::from_slice(&once.stdout).unwrap();
        let b: Value = serde_json::from_slice(&twice.stdout).unwrap();
        assert_eq!(a, b);
    }
}
