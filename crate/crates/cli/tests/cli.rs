use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_keylog-sim"))
        .args(args)
        .env_remove("KEYLOG_SIM_THREADS")
        .output()
        .expect("binary runs")
}

fn json_stdout(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("JSON document on stdout")
}

fn error_line(out: &Output) -> Value {
    let text = String::from_utf8_lossy(&out.stderr);
    assert_eq!(text.trim_end().lines().count(), 1, "{text}");
    serde_json::from_str(text.trim()).expect("JSON error line")
}

#[test]
fn superdense_bits_ten() {
    let doc = json_stdout(&run(&["superdense", "--bits", "10"]));
    assert_eq!(doc["protocol"], "superdense");
    assert_eq!(doc["result"]["decoded"], "10");
    assert_eq!(doc["result"]["zz_outcome"], "11");
    assert_eq!(doc["version"], env!("CARGO_PKG_VERSION"));
}

#[test]
fn qpe_standard_five_eighths() {
    let doc = json_stdout(&run(&["qpe-standard", "--n", "3", "--theta", "1.9634954"]));
    let dist = doc["result"]["distribution"].as_array().unwrap();
    assert_eq!(dist.len(), 8);
    assert!((dist[5].as_f64().unwrap() - 1.0).abs() < 1e-10);
    assert_eq!(doc["result"]["ell"], 5);
    assert_eq!(doc["config"]["n"], 3);
}

#[test]
fn csv_export() {
    let out = run(&["qpe-standard", "--n", "1", "--theta", "1.5707963267948966", "--format", "csv"]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "k,probability\n0,0.000000000000\n1,1.000000000000\n");
}

#[test]
fn schema_fields_for_attack() {
    let doc = json_stdout(&run(&["attack", "--letter", "Y", "--n", "2"]));
    let result = &doc["result"];
    for key in ["distribution", "ell", "delta", "inferred_letter", "codeword_fidelity", "leakage_max"] {
        assert!(!result[key].is_null(), "missing {key}");
    }
    assert_eq!(result["inferred_letter"], "Y");
    assert_eq!(result["argmax"], 2);
    assert_eq!(result["argmax_imag"], 2);
    assert_eq!(doc["config"]["letter"], "Y");
}

#[test]
fn fock_attack_with_headroom() {
    let doc = json_stdout(&run(&["attack", "--letter", "Z", "--n", "1", "--backend", "fock", "--delta", "0.25", "--cutoff", "250"]));
    assert_eq!(doc["result"]["inferred_letter"], "Z");
    assert!(doc["result"]["codeword_fidelity"].as_f64().unwrap() >= 0.999999);
}

#[test]
fn truncation_exits_two_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.json");
    let out = run(&[
        "attack", "--letter", "Z", "--n", "1", "--backend", "fock", "--delta", "0.25", "--cutoff", "150",
        "--output", path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_line(&out)["code"], "numerical");
    assert!(!path.exists());
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0, "no temporary files left behind");
}

#[test]
fn config_errors_exit_one() {
    for args in [
        &["attack", "--letter", "Q"][..],
        &["qpe-oneshot", "--beta", "1.0"][..],
        &["superdense"][..],
        &["qpe-standard", "--n", "11"][..],
        &["attack", "--bogus"][..],
        &["attack", "--backend", "fock", "--delta", "-1"][..],
    ] {
        let out = run(args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        let err = error_line(&out);
        assert_eq!(err["code"], "config", "{args:?}");
        assert!(err["message"].is_string() && err["context"].is_string());
    }
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# attack setup\nletter = X\nn = 2   # two bits\nbackend=exact\n").unwrap();
    let doc = json_stdout(&run(&["attack", "--config", cfg.to_str().unwrap()]));
    assert_eq!(doc["result"]["inferred_letter"], "X");
    assert_eq!(doc["config"]["n"], 2);
    let doc = json_stdout(&run(&["attack", "--config", cfg.to_str().unwrap(), "--letter", "Z"]));
    assert_eq!(doc["result"]["inferred_letter"], "Z");

    std::fs::write(&cfg, "colour = blue\n").unwrap();
    let out = run(&["attack", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

fn write_twice(args: &[&str], dir: &Path) -> (Vec<u8>, Vec<u8>) {
    let a = dir.join("a.out");
    let b = dir.join("b.out");
    for p in [&a, &b] {
        let mut full: Vec<&str> = args.to_vec();
        full.extend(["--output", p.to_str().unwrap()]);
        let out = run(&full);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        assert_eq!(String::from_utf8_lossy(&out.stdout).lines().count(), 1);
    }
    (std::fs::read(a).unwrap(), std::fs::read(b).unwrap())
}

#[test]
fn identical_configs_give_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = write_twice(&["qpe-oneshot", "--n", "2", "--beta", "0.4,-0.3", "--alpha", "0.9,0.8", "--seed", "7"], dir.path());
    assert_eq!(a, b);
    let (a, b) = write_twice(&["attack", "--letter", "Y", "--backend", "fock", "--cutoff", "200", "--format", "csv"], dir.path());
    assert_eq!(a, b);
}

#[test]
fn seeded_sample_is_reproducible() {
    let args = ["qpe-oneshot", "--n", "3", "--beta", "0.3,0.0", "--alpha", "0.2,0.7", "--seed", "42"];
    let a = json_stdout(&run(&args));
    let b = json_stdout(&run(&args));
    assert_eq!(a["result"]["sampled_outcome"], b["result"]["sampled_outcome"]);
    assert!(a["result"]["sampled_outcome"].as_u64().unwrap() < 8);
}

#[test]
fn sweep_rows_and_thread_env() {
    let out = Command::new(env!("CARGO_BIN_EXE_keylog-sim"))
        .args(["sweep", "--letters", "I,X,Z,Y", "--n-values", "1,2", "--deltas", "0.3", "--cutoffs", "30,250", "--backend", "fock"])
        .env("KEYLOG_SIM_THREADS", "2")
        .output()
        .unwrap();
    let doc = json_stdout(&out);
    let rows = doc["result"]["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 16);
    assert_eq!(rows[0]["cutoff"], 30);
    assert!(rows[0]["error"].is_string());
    for row in rows.iter().filter(|r| r["error"].is_null()) {
        assert_eq!(row["inferred_letter"], row["letter"]);
    }

    let out = Command::new(env!("CARGO_BIN_EXE_keylog-sim"))
        .args(["sweep"])
        .env("KEYLOG_SIM_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn crosskerr_reports_heralded_readout() {
    let h = "1.2533141373155001";
    let doc = json_stdout(&run(&["qpe-crosskerr", "--n", "1", "--beta", &format!("{h},0"), "--alpha", &format!("0,{h}")]));
    let herald = &doc["result"]["heralded"];
    assert!((herald["distribution"][1].as_f64().unwrap() - 1.0).abs() < 1e-10);
    assert!((herald["success_probability"].as_f64().unwrap() - 0.5).abs() < 1e-10);
}
