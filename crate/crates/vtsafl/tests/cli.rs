//! End-to-end tests of the `vtsafl` binary: exit codes and JSON output.

use std::process::{Command, Output};

use vtsafl::fl_sim::{fedavg_oracle, synth_client_update};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vtsafl"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json_lines(out: &Output) -> Vec<serde_json::Value> {
    String::from_utf8_lossy(&out.stdout)
        .lines()
        .map(|l| serde_json::from_str(l).unwrap_or_else(|e| panic!("bad JSON line {l}: {e}")))
        .collect()
}

#[test]
fn simulate_honest_rounds_match_oracle() {
    let out = run(&[
        "simulate",
        "--clients", "5",
        "--aggregators", "4",
        "--threshold", "3",
        "--rounds", "3",
        "--dim", "8",
        "--seed", "7",
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let lines = json_lines(&out);
    assert_eq!(lines.len(), 4); // 3 rounds + summary
    for (k, line) in lines[..3].iter().enumerate() {
        let round = k + 1;
        assert_eq!(line["round"], round);
        assert_eq!(line["success"], true);
        let updates: Vec<Vec<f64>> = (1..=5)
            .map(|i| synth_client_update(7, round, i, 8))
            .collect();
        let oracle = fedavg_oracle(&updates, 100);
        let got = line["aggregate"].as_array().unwrap();
        for (g, want) in got.iter().zip(&oracle) {
            assert!((g.as_f64().unwrap() - want).abs() < 1e-12);
        }
    }
    let summary = &lines[3];
    assert_eq!(summary["type"], "summary");
    assert_eq!(summary["success"], true);
    assert_eq!(summary["rounds_completed"], 3);
    assert!(summary["total_bytes"]["clients_ciphertexts"].as_u64().unwrap() > 0);
}

#[test]
fn simulate_with_tamper_adversary() {
    let out = run(&[
        "simulate",
        "--clients", "3",
        "--aggregators", "4",
        "--threshold", "3",
        "--rounds", "3",
        "--dim", "2",
        "--seed", "7",
        "--malicious", "2:tamper",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let lines = json_lines(&out);
    for line in &lines[..3] {
        assert_eq!(line["success"], true);
        let rejected = line["rejected"].as_array().unwrap();
        assert!(
            rejected.iter().any(|r| r[0] == 2),
            "aggregator 2 not rejected: {rejected:?}"
        );
    }
}

#[test]
fn threshold_above_aggregators_is_usage_error() {
    let out = run(&["simulate", "--threshold", "5", "--aggregators", "4"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
}

#[test]
fn unknown_flag_is_usage_error() {
    let out = run(&["simulate", "--bogus-flag", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bad_malicious_arg_is_usage_error() {
    let out = run(&["simulate", "--malicious", "2:bogus"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn round_failure_exits_one() {
    // Two crashing aggregators leave only 2 of 4 usable; t=3 cannot be met.
    let out = run(&[
        "simulate",
        "--clients", "2",
        "--aggregators", "4",
        "--threshold", "3",
        "--rounds", "1",
        "--dim", "1",
        "--malicious", "1:crash",
        "--malicious", "2:crash",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let lines = json_lines(&out);
    let summary = lines.last().unwrap();
    assert_eq!(summary["success"], false);
    assert!(summary["failure"].as_str().unwrap().contains("usable aggregators"));
}

#[test]
fn sizes_reports_and_checks_constancy() {
    let out = run(&["sizes", "--clients", "5"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let lines = json_lines(&out);
    let share = lines.iter().find(|l| l["object"] == "key-share").unwrap();
    assert_eq!(share["bytes"], share["scalar_bytes"]);
    let commitments = lines
        .iter()
        .find(|l| l["object"] == "round-key-commitments")
        .unwrap();
    assert_eq!(
        commitments["bytes"].as_u64().unwrap(),
        2 * commitments["group_element_bytes"].as_u64().unwrap()
    );
    let ct = lines
        .iter()
        .find(|l| l["object"] == "ciphertext-per-coordinate")
        .unwrap();
    assert_eq!(ct["bytes"], ct["group_element_bytes"]);
    let summary = lines.last().unwrap();
    assert_eq!(summary["ok"], true);
}

#[test]
fn bench_emits_rows_per_client_count() {
    let out = run(&["bench", "--dims", "5,10"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let lines = json_lines(&out);
    assert_eq!(lines.len(), 2);
    for (line, n) in lines.iter().zip([5u64, 10]) {
        assert_eq!(line["clients"].as_u64().unwrap(), n);
        for key in [
            "dkeygen_ms",
            "encrypt_avg_ms",
            "share_decrypt_avg_ms",
            "verify_ms",
            "combine_ms",
        ] {
            assert!(line[key].as_f64().unwrap() >= 0.0);
        }
    }
}

#[test]
fn config_file_with_flag_override() {
    let dir = std::env::temp_dir().join("vtsafl-cli-harness");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("sim.json");
    std::fs::write(
        &path,
        r#"{"clients":2,"aggregators":3,"threshold":2,"rounds":1,"dim":1,"scale":10,"seed":3}"#,
    )
    .unwrap();
    let out_path = dir.join("report.jsonl");
    let out = run(&[
        "simulate",
        "--config", path.to_str().unwrap(),
        "--rounds", "2",
        "--out", out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&out_path).unwrap();
    let lines: Vec<serde_json::Value> = text
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 3); // 2 rounds (flag override) + summary
    assert_eq!(lines[2]["rounds_requested"], 2);
}
